#include "xvann/instruments/bermudan.hpp"

#include <algorithm>
#include <cmath>

#include "xvann/errors.hpp"

namespace xvann::instruments {

namespace {
constexpr double kDateTol = 1e-9;
}

void BermudanSpec::validate() const {
    fixed_leg.validate();
    float_leg.validate();
    if (fixed_leg.type != LegType::Fixed || float_leg.type != LegType::Float)
        throw ConfigError("bermudan: expected one fixed and one float leg");
    if (fixed_leg.currency != 0 || float_leg.currency != 0)
        throw ConfigError("bermudan: legs must be in the domestic currency");
    if (exercise_dates.empty()) throw ConfigError("bermudan: no exercise dates");
    for (std::size_t m = 0; m < exercise_dates.size(); ++m) {
        if (!(exercise_dates[m] > 0.0)) throw ScheduleError("bermudan: exercise dates must be positive");
        if (m > 0 && !(exercise_dates[m] > exercise_dates[m - 1]))
            throw ScheduleError("bermudan: exercise dates must be strictly increasing");
    }
    const double last_start = std::min(fixed_leg.periods.back().start, float_leg.periods.back().start);
    if (exercise_dates.back() > last_start + kDateTol)
        throw ScheduleError("bermudan: exercise dates must precede the final accrual start");
}

SwapLeg entered_leg(const SwapLeg& leg, double t_ex) {
    SwapLeg out = leg;
    out.periods.clear();
    for (const auto& p : leg.periods)
        if (p.start >= t_ex - kDateTol) out.periods.push_back(p);
    return out;
}

namespace {
std::vector<double> schedule(double a, double b, double step) {
    if (!(step > 0.0) || !(b > a)) throw ScheduleError("invalid regular schedule");
    std::vector<double> out;
    const auto n = static_cast<std::size_t>(std::llround((b - a) / step));
    if (std::abs(a + static_cast<double>(n) * step - b) > 1e-9) throw ScheduleError("schedule step does not divide the swap");
    for (std::size_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
}
}  // namespace

BermudanSpec make_bermudan(const BermudanTerms& t) {
    BermudanSpec b;
    b.fixed_leg.type = LegType::Fixed;
    b.fixed_leg.notional = t.notional;
    b.fixed_leg.periods = make_periods(schedule(t.start, t.end, t.fixed_step));
    for (auto& q : b.fixed_leg.periods) q.coupon = t.fixed_rate;
    b.float_leg.type = LegType::Float;
    b.float_leg.notional = t.notional;
    b.float_leg.periods = make_periods(schedule(t.start, t.end, t.float_step));
    b.payer = t.payer;
    b.exercise_dates = t.exercise_dates;
    b.settlement = t.settlement;
    b.validate();
    return b;
}

double underlying_value(const BermudanSpec& b, double t_ex, const LegState& st,
                        std::span<const double> float_fixings) {
    const SwapLeg fx = entered_leg(b.fixed_leg, t_ex);
    const SwapLeg fl = entered_leg(b.float_leg, t_ex);
    if (fx.periods.empty() && fl.periods.empty()) return 0.0;
    const double fixed = fx.periods.empty() ? 0.0 : fixed_leg_value(fx, st);
    const double flt = fl.periods.empty() ? 0.0 : float_leg_value(fl, st, float_fixings);
    return b.payer ? flt - fixed : fixed - flt;
}

double swap_exercise_value(const BermudanSpec& b, std::size_t m, const market::CurrencyModel& ccy,
                           double x) {
    if (m >= b.exercise_dates.size()) throw ScheduleError("swap_exercise_value: not an exercise date");
    const double t = b.exercise_dates[m];
    return underlying_value(b, t, make_state(ccy, t, x));
}

std::vector<double> exercise_value_cube(const BermudanSpec& b, const market::CurrencyModel& ccy,
                                        const market::TimeGrid& grid, const market::PathCube& cube) {
    const std::size_t n_ex = b.exercise_dates.size();
    std::vector<double> u(cube.paths() * n_ex);
    for (std::size_t m = 0; m < n_ex; ++m) {
        const double t = b.exercise_dates[m];
        const std::size_t k = grid.index_of(t);
        const SwapLeg fx = entered_leg(b.fixed_leg, t);
        const SwapLeg fl = entered_leg(b.float_leg, t);
        LegState st = make_state(ccy, t, 0.0);
        for (std::size_t p = 0; p < cube.paths(); ++p) {
            st.x = cube.x(0, p, k);
            const double v = float_leg_value(fl, st) - fixed_leg_value(fx, st);
            u[p * n_ex + m] = b.payer ? v : -v;
        }
    }
    return u;
}

}  // namespace xvann::instruments
