#pragma once

#include <span>
#include <vector>

#include "xvann/instruments/legs.hpp"
#include "xvann/market/model.hpp"
#include "xvann/market/path_cube.hpp"
#include "xvann/market/time_grid.hpp"

namespace xvann::instruments {

enum class FloatLegCurrency { Foreign, Domestic };

// Swap of a mark-to-market leg against a plain float leg.
//
// The MtM leg is paid in domestic currency on a notional N_f * S(T_n) reset at
// each period start T_n. Its payment at T_{n+1} combines the notional reset
// N_f [S(T_n) - S(T_{n+1})] and the rate payment N_f S(T_n) L_n tau_n, where
// L_n is the domestic rate fixed at T_n.
//
// The float leg is either in the foreign currency on notional N_f (converted at
// the spot of each payment date) or in the domestic currency on N_f * S(0).
struct MtmXccySpec {
    double foreign_notional = 1.0;
    std::vector<double> dates;  // T_0 < T_1 < ... < T_N (resets and payments)
    std::vector<double> taus;   // empty: date differences
    int mtm_direction = 1;      // +1 receive the MtM leg
    FloatLegCurrency float_currency = FloatLegCurrency::Foreign;
    bool float_final_exchange = false;
    double float_spread = 0.0;
    std::size_t foreign = 1;  // foreign currency index (1-based)

    std::vector<Period> periods() const { return make_periods(dates, taus); }
    SwapLeg float_leg(const market::MarketModel& model) const;
    double domestic_notional(const market::MarketModel& model) const;
    void validate(const market::MarketModel& model) const;
};

// N_f [S(T_n)(1 + L_n tau_n) - S(T_{n+1})], domestic units, paid at T_{n+1}.
double mtm_leg_cashflow(double foreign_notional, double s_n, double s_next, double libor, double tau);

// State of the XCCY risk factors at time t.
struct XccyState {
    double t = 0.0;
    double x_dom = 0.0;
    double x_for = 0.0;
    double fx = 1.0;
};

// Fixings observed on a path, indexed by period: S(T_n) and the domestic and
// foreign rates fixed at T_n. NaN where not yet observed.
struct XccyFixings {
    std::vector<double> fx;
    std::vector<double> dom_rate;
    std::vector<double> for_rate;
};

// E_t[S(T)] = S(t) P_f(t,T) / P_d(t,T) for foreign currency `foreign`.
double decoupled_fx_forward(const market::MarketModel& model, std::size_t foreign,
                            const XccyState& st, double T);

// MtM leg value with every future S(T_n) replaced by its decoupled forward
// S(t) P_f(t,T_n) / P_d(t,T_n) and future rates by their forwards. Unsigned,
// payments at or before t excluded.
double proxy_mtm_value(const MtmXccySpec& spec, const market::MarketModel& model,
                       const XccyState& st, const XccyFixings& fixings);

// Whole swap, signed, proxy treatment for the MtM leg and analytic float leg.
double proxy_swap_value(const MtmXccySpec& spec, const market::MarketModel& model,
                        const XccyState& st, const XccyFixings& fixings);

// Per path fixings from the simulated factors.
XccyFixings path_fixings(const MtmXccySpec& spec, const market::MarketModel& model,
                         const market::TimeGrid& grid, const market::PathCube& cube, std::size_t p);

// Signed domestic cashflows of the swap at each grid date, CF[p * dates + n].
std::vector<double> xccy_cashflows(const MtmXccySpec& spec, const market::MarketModel& model,
                                   const market::TimeGrid& grid, const market::PathCube& cube);

}  // namespace xvann::instruments
