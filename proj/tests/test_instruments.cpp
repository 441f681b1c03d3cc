#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "xvann/errors.hpp"
#include "xvann/instruments/bermudan.hpp"
#include "xvann/instruments/legs.hpp"
#include "xvann/instruments/xccy.hpp"
#include "xvann/market/simulation.hpp"

using namespace xvann;
using namespace xvann::instruments;
using namespace xvann::market;

namespace {

CurrencyModel flat_ccy(double f, double sigma = 0.01) {
    return {"USD", YieldCurve::flat(f), {0.01, PiecewiseConstant(sigma)}};
}

SwapLeg fixed_leg(double notional, double k, std::vector<double> dates) {
    SwapLeg leg;
    leg.type = LegType::Fixed;
    leg.notional = notional;
    leg.periods = make_periods(dates);
    for (auto& p : leg.periods) p.coupon = k;
    return leg;
}

SwapLeg float_leg(double notional, std::vector<double> dates) {
    SwapLeg leg;
    leg.type = LegType::Float;
    leg.notional = notional;
    leg.periods = make_periods(dates);
    return leg;
}

std::vector<double> range(double a, double b, double step) {
    std::vector<double> out;
    for (double t = a; t < b + 1e-9; t += step) out.push_back(std::round(t * 1e8) / 1e8);
    return out;
}

BermudanSpec desk_bermudan(Settlement s = Settlement::Cash) {
    BermudanTerms t;
    t.settlement = s;
    return make_bermudan(t);
}

MarketModel usd_cad(double s0, double s1, double eta) {
    MarketModel m;
    m.domestic = {"USD", YieldCurve::flat(0.01), {0.01, PiecewiseConstant(s0)}};
    m.foreign.push_back({"CAD", YieldCurve::flat(0.02), {0.01, PiecewiseConstant(s1)}});
    m.fx.push_back({0.76, PiecewiseConstant(eta)});
    m.corr = CorrelationMatrix::from_upper(3, {0.149, 0.139, 0.676});
    return m;
}

MtmXccySpec desk_xccy() {
    MtmXccySpec s;
    s.foreign_notional = 10000;
    s.dates = {0.0, 0.25, 0.5, 0.75, 0.83};
    return s;
}

}  // namespace

TEST(Legs, FixedLegHandEvaluation) {
    auto ccy = flat_ccy(0.01);
    auto leg = fixed_leg(10000, 0.028, {0.0, 0.5});
    // 10000 * 0.028 * 0.5 * exp(-0.005) = 139.30175
    EXPECT_NEAR(fixed_leg_value(leg, make_state(ccy, 0.0, 0.0)), 140.0 * std::exp(-0.005), 1e-10);
    EXPECT_NEAR(fixed_leg_value(leg, make_state(ccy, 0.0, 0.0)), 139.30175, 5e-6);
    EXPECT_EQ(fixed_leg_value(leg, make_state(ccy, 0.5, 0.01)), 0.0);
    EXPECT_EQ(fixed_leg_value(leg, make_state(ccy, 0.7, 0.01)), 0.0);
}

TEST(Legs, PureNotionalAndHomogeneity) {
    auto ccy = flat_ccy(0.015);
    auto leg = fixed_leg(500, 0.0, {0.0, 1.0, 2.0});
    leg.final_exchange = true;
    const auto st = make_state(ccy, 0.3, 0.004, 0.8);
    EXPECT_NEAR(fixed_leg_value(leg, st), 500 * 0.8 * st.bond(2.0), 1e-12);
    auto leg2 = fixed_leg(1000, 0.03, {0.0, 1.0, 2.0});
    auto leg1 = fixed_leg(100, 0.03, {0.0, 1.0, 2.0});
    EXPECT_NEAR(fixed_leg_value(leg2, st), 10.0 * fixed_leg_value(leg1, st), 1e-10);
}

TEST(Legs, FloatLegParIdentity) {
    auto ccy = flat_ccy(0.02);
    auto leg = float_leg(1000, range(0.0, 3.0, 0.25));
    leg.final_exchange = true;
    EXPECT_NEAR(float_leg_value(leg, make_state(ccy, 0.0, 0.0, 0.76)), 1000 * 0.76, 1e-12 * 760);

    // telescoping sum at a period start with a non-zero state
    const auto st = make_state(ccy, 1.0, 0.013, 0.9);
    const double expect = 1000 * 0.9 * (st.bond(1.0) - st.bond(3.0)) + 1000 * 0.9 * st.bond(3.0);
    EXPECT_NEAR(float_leg_value(leg, st), expect, 1e-12 * expect);
    leg.final_exchange = false;
    const double expect2 = 1000 * 0.9 * (st.bond(1.0) - st.bond(3.0));
    EXPECT_NEAR(float_leg_value(leg, st), expect2, 1e-12 * expect2);
}

TEST(Legs, DegenerateFloatIsFixed) {
    auto ccy = flat_ccy(0.02);
    auto fl = float_leg(1000, range(0.0, 2.0, 0.5));
    for (auto& p : fl.periods) {
        p.alpha = 0.0;
        p.beta = 0.01;
    }
    auto fx = fixed_leg(1000, 0.01, range(0.0, 2.0, 0.5));
    const auto st = make_state(ccy, 0.0, 0.0);
    EXPECT_NEAR(float_leg_value(fl, st), fixed_leg_value(fx, st), 1e-12);
}

TEST(Legs, PastFixingIsUsed) {
    auto ccy = flat_ccy(0.01);
    auto leg = float_leg(1000, {0.0, 0.25});
    const auto st = make_state(ccy, 0.1, 0.0);
    std::vector<double> fixings{0.02};
    EXPECT_NEAR(float_leg_value(leg, st, fixings), 1000 * 0.02 * 0.25 * st.bond(0.25), 1e-12);
    EXPECT_THROW(float_leg_value(leg, st), FixingError);
    std::vector<double> missing{kNoFixing};
    EXPECT_THROW(float_leg_value(leg, st, missing), FixingError);
}

TEST(Bermudan, ExerciseValueNearParAtForwardStrike) {
    auto b = desk_bermudan();
    b.validate();
    auto ccy = flat_ccy(0.028);
    // continuous 2.8% forward versus a 2.8% semi-annual simple coupon: close to par
    for (std::size_t m = 0; m < b.exercise_dates.size(); ++m)
        EXPECT_LT(std::abs(swap_exercise_value(b, m, ccy, 0.0)), 1e-3 * b.notional());
    EXPECT_THROW(swap_exercise_value(b, 5, ccy, 0.0), ScheduleError);
}

TEST(Bermudan, ExerciseValueMonotoneAndNearlyLinear) {
    auto b = desk_bermudan();
    auto ccy = flat_ccy(0.028);
    for (std::size_t m = 0; m < b.exercise_dates.size(); ++m) {
        double prev = -1e300;
        for (double x = -0.05; x <= 0.05; x += 0.001) {
            const double u = swap_exercise_value(b, m, ccy, x);
            EXPECT_GT(u, prev);
            prev = u;
        }
        // sign change across the root
        EXPECT_LT(swap_exercise_value(b, m, ccy, -0.005), 0.0);
        EXPECT_GT(swap_exercise_value(b, m, ccy, 0.005), 0.0);
    }
    // deep in the money: second difference small relative to the slope
    const double h = 0.01;
    const double u0 = swap_exercise_value(b, 1, ccy, 0.03), up = swap_exercise_value(b, 1, ccy, 0.03 + h),
                 dn = swap_exercise_value(b, 1, ccy, 0.03 - h);
    const double slope = (up - dn) / (2 * h);
    EXPECT_GT(u0, 0.0);
    EXPECT_LT(std::abs(up - 2 * u0 + dn) / (slope * h), 0.05);
}

TEST(Bermudan, ValidationRejectsLateExercise) {
    auto b = desk_bermudan();
    b.exercise_dates.push_back(3.75);
    EXPECT_THROW(b.validate(), ScheduleError);
    b = desk_bermudan();
    b.exercise_dates = {2.0, 1.5};
    EXPECT_THROW(b.validate(), ScheduleError);
}

TEST(Bermudan, ReceiverIsNegatedPayer) {
    auto b = desk_bermudan();
    auto r = b;
    r.payer = false;
    auto ccy = flat_ccy(0.028);
    EXPECT_DOUBLE_EQ(swap_exercise_value(b, 2, ccy, 0.01), -swap_exercise_value(r, 2, ccy, 0.01));
}

TEST(Xccy, MtmCashflowHandEvaluation) {
    EXPECT_EQ(mtm_leg_cashflow(100, 0.8, 0.8, 0.0, 0.25), 0.0);
    EXPECT_NEAR(mtm_leg_cashflow(1, 0.76, 0.76, 0.02, 0.25), 0.0038, 1e-15);
    EXPECT_LT(mtm_leg_cashflow(1, 0.76, 0.78, 0.02, 0.25), 0.0);
}

TEST(Xccy, ProxyForwardAndResetDates) {
    auto m = usd_cad(0.01, 0.01, 0.2);
    auto spec = desk_xccy();
    spec.validate(m);
    EXPECT_NEAR(decoupled_fx_forward(m, 1, XccyState{0.0, 0.0, 0.0, 0.76}, 0.25), 0.758102, 5e-7);
    EXPECT_NEAR(decoupled_fx_forward(m, 1, XccyState{0.5, 0.0, 0.0, 0.76}, 0.75), 0.758102, 5e-7);

    // full swap at a reset date with fixings taken at that date: exactly zero
    for (double t : {0.0, 0.25, 0.5, 0.75}) {
        for (double xd : {-0.02, 0.0, 0.03})
            for (double s : {0.5, 0.76, 1.1}) {
                XccyState rs{t, xd, -0.5 * xd, s};
                XccyFixings fx;
                for (double d : spec.dates) {
                    if (d >= spec.dates.back()) break;
                    fx.fx.push_back(d < t ? 0.7 : kNoFixing);
                    fx.dom_rate.push_back(d < t ? 0.01 : kNoFixing);
                    fx.for_rate.push_back(d < t ? 0.02 : kNoFixing);
                }
                EXPECT_LE(std::abs(proxy_swap_value(spec, m, rs, fx)), 1e-12 * spec.foreign_notional)
                    << t << " " << xd << " " << s;
            }
    }
}

TEST(Xccy, ProxyMatchesDeterministicCashflowsWithoutVolatility) {
    auto m = usd_cad(0.0, 0.0, 0.0);
    auto spec = desk_xccy();
    spec.float_spread = 0.001;  // non-zero value so the check is not trivially 0
    auto g = TimeGrid::build(0.83, 12, spec.dates);
    auto cube = simulate_multiccy(m, g, 2, 3);
    auto cf = xccy_cashflows(spec, m, g, cube);
    auto fix = path_fixings(spec, m, g, cube, 0);
    for (double t : {0.0, 1.0 / 12, 0.25, 7.0 / 12}) {
        const std::size_t k = g.index_of(t);
        const double tt = g[k];
        double pv = 0.0;
        for (std::size_t n = k + 1; n < g.size(); ++n) pv += cf[n] * cube.discount(0, n) / cube.discount(0, k);
        XccyState st{tt, 0.0, 0.0, std::exp(cube.x(2, 0, k))};
        XccyFixings past = fix;
        for (std::size_t i = 0; i < past.fx.size(); ++i)
            if (spec.dates[i] >= tt) past.fx[i] = past.dom_rate[i] = past.for_rate[i] = kNoFixing;
        EXPECT_NEAR(proxy_swap_value(spec, m, st, past), pv, 1e-10) << tt;
    }
}

TEST(Xccy, PathwiseMtmLegValueMatchesAnalytic) {
    auto m = usd_cad(0.01, 0.01, 0.2);
    auto spec = desk_xccy();
    auto g = TimeGrid::build(0.83, 12, spec.dates);
    const std::size_t n = 20000;
    auto cube = simulate_multiccy(m, g, n, 21);
    const auto periods = spec.periods();
    std::vector<double> pv(n, 0.0), swap_pv(n, 0.0);
    auto cf = xccy_cashflows(spec, m, g, cube);
    for (std::size_t p = 0; p < n; ++p) {
        auto f = path_fixings(spec, m, g, cube, p);
        for (std::size_t k = 0; k < periods.size(); ++k) {
            const std::size_t e = g.index_of(periods[k].end);
            pv[p] += cube.discount(p, e) *
                     mtm_leg_cashflow(spec.foreign_notional, f.fx[k], std::exp(cube.x(2, p, e)), f.dom_rate[k], periods[k].tau);
        }
        for (std::size_t k = 0; k < g.size(); ++k) swap_pv[p] += cube.discount(p, k) * cf[p * g.size() + k];
    }
    auto stats = [](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double ss = 0;
        for (double a : v) ss += (a - mean) * (a - mean);
        return std::pair{mean, std::sqrt(ss / (v.size() - 1) / v.size())};
    };
    auto [mean, se] = stats(pv);
    const double analytic = proxy_mtm_value(spec, m, XccyState{0.0, 0.0, 0.0, 0.76}, {});
    EXPECT_NEAR(mean, analytic, 3 * se);
    auto [smean, sse] = stats(swap_pv);
    EXPECT_NEAR(smean, 0.0, 3 * sse);
}
