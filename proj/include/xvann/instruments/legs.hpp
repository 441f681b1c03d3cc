#pragma once

#include <limits>
#include <span>
#include <vector>

#include "xvann/market/model.hpp"

namespace xvann::instruments {

enum class LegType { Fixed, Float };

// One accrual period; payment happens at `end`.
struct Period {
    double start = 0.0;
    double end = 0.0;
    double tau = 0.0;
    double coupon = 0.0;  // fixed rate K_n
    double alpha = 1.0;   // float multiplier
    double beta = 0.0;    // float spread
};

struct SwapLeg {
    LegType type = LegType::Fixed;
    double notional = 1.0;  // in the leg currency
    int direction = 1;      // +1 receive, -1 pay
    std::size_t currency = 0;  // 0 domestic, i > 0 foreign currency i
    bool final_exchange = false;
    std::vector<Period> periods;

    double maturity() const { return periods.empty() ? 0.0 : periods.back().end; }
    void validate() const;
};

// Periods between consecutive boundary dates. tau defaults to the date
// difference; a non-empty `taus` overrides it.
std::vector<Period> make_periods(const std::vector<double>& boundaries,
                                 const std::vector<double>& taus = {});

// Valuation state of the leg currency at time t.
struct LegState {
    const market::CurrencyModel* ccy = nullptr;
    double t = 0.0;
    double x = 0.0;  // short-rate factor of the leg currency
    double y = 0.0;  // y(t) of the leg currency
    double fx = 1.0;  // S(t), domestic per leg currency unit (1 for domestic legs)

    double bond(double T) const;
};

LegState make_state(const market::CurrencyModel& ccy, double t, double x, double fx = 1.0);

// Single-curve simple forward rate for [s, e] seen from the state.
double forward_rate(const LegState& st, double s, double e, double tau);
// Rate fixed at s (state observed at time s).
double libor_fixing(const market::CurrencyModel& ccy, double s, double e, double tau, double x_s);

constexpr double kNoFixing = std::numeric_limits<double>::quiet_NaN();

// Unsigned present values in domestic units (leg value times S(t)). Payments at
// or before t are excluded. Float periods that started at or before t need a
// fixing in `fixings` (indexed like the periods).
double fixed_leg_value(const SwapLeg& leg, const LegState& st);
double float_leg_value(const SwapLeg& leg, const LegState& st, std::span<const double> fixings = {});
double leg_value(const SwapLeg& leg, const LegState& st, std::span<const double> fixings = {});

}  // namespace xvann::instruments
