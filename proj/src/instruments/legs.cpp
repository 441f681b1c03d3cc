#include "xvann/instruments/legs.hpp"

#include <cmath>
#include <sstream>

#include "xvann/errors.hpp"

namespace xvann::instruments {

void SwapLeg::validate() const {
    if (periods.empty()) throw ConfigError("swap leg has no periods");
    if (!(notional > 0.0)) throw ConfigError("swap leg notional must be positive");
    if (direction != 1 && direction != -1) throw ConfigError("swap leg direction must be +1 or -1");
    for (std::size_t i = 0; i < periods.size(); ++i) {
        const auto& p = periods[i];
        if (!(p.tau > 0.0)) throw ConfigError("accrual fraction must be positive");
        if (!(p.end > p.start)) throw ConfigError("accrual period must have end after start");
        if (i > 0 && p.start < periods[i - 1].end - 1e-12)
            throw ConfigError("accrual periods overlap");
    }
}

std::vector<Period> make_periods(const std::vector<double>& boundaries,
                                 const std::vector<double>& taus) {
    if (boundaries.size() < 2) throw ConfigError("a schedule needs at least two dates");
    if (!taus.empty() && taus.size() != boundaries.size() - 1)
        throw ConfigError("number of accrual fractions does not match the schedule");
    std::vector<Period> out;
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i) {
        Period p;
        p.start = boundaries[i];
        p.end = boundaries[i + 1];
        p.tau = taus.empty() ? p.end - p.start : taus[i];
        out.push_back(p);
    }
    return out;
}

double LegState::bond(double T) const {
    return market::zero_bond(ccy->curve, ccy->hw.kappa, t, T, x, y);
}

LegState make_state(const market::CurrencyModel& ccy, double t, double x, double fx) {
    return LegState{&ccy, t, x, market::hw_variance_integral(ccy.hw, t), fx};
}

double forward_rate(const LegState& st, double s, double e, double tau) {
    return (st.bond(s) / st.bond(e) - 1.0) / tau;
}

double libor_fixing(const market::CurrencyModel& ccy, double s, double e, double tau, double x_s) {
    const double p = market::zero_bond(ccy.curve, ccy.hw, s, e, x_s);
    return (1.0 / p - 1.0) / tau;
}

double fixed_leg_value(const SwapLeg& leg, const LegState& st) {
    double sum = 0.0;
    const std::size_t last = leg.periods.size() - 1;
    for (std::size_t i = 0; i < leg.periods.size(); ++i) {
        const auto& p = leg.periods[i];
        if (p.end <= st.t) continue;
        double amount = p.coupon * p.tau;
        if (leg.final_exchange && i == last) amount += 1.0;
        sum += amount * st.bond(p.end);
    }
    return leg.notional * st.fx * sum;
}

double float_leg_value(const SwapLeg& leg, const LegState& st, std::span<const double> fixings) {
    double sum = 0.0;
    const std::size_t last = leg.periods.size() - 1;
    for (std::size_t i = 0; i < leg.periods.size(); ++i) {
        const auto& p = leg.periods[i];
        if (p.end <= st.t) continue;
        double rate;
        if (p.start < st.t) {
            if (i >= fixings.size() || std::isnan(fixings[i])) {
                std::ostringstream os;
                os << "missing fixing for period starting at " << p.start;
                throw FixingError(os.str());
            }
            rate = fixings[i];
        } else {
            rate = forward_rate(st, p.start, p.end, p.tau);
        }
        double amount = (p.alpha * rate + p.beta) * p.tau;
        if (leg.final_exchange && i == last) amount += 1.0;
        sum += amount * st.bond(p.end);
    }
    return leg.notional * st.fx * sum;
}

double leg_value(const SwapLeg& leg, const LegState& st, std::span<const double> fixings) {
    return leg.type == LegType::Fixed ? fixed_leg_value(leg, st) : float_leg_value(leg, st, fixings);
}

}  // namespace xvann::instruments
