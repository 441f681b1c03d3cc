#pragma once

#include <span>
#include <vector>

#include "xvann/instruments/legs.hpp"
#include "xvann/market/path_cube.hpp"
#include "xvann/market/time_grid.hpp"

namespace xvann::instruments {

enum class Settlement { Cash, Physical };

// Option to enter, on any exercise date T_m, the part of the underlying swap
// whose accrual periods start on or after T_m (co-terminal exercise).
struct BermudanSpec {
    SwapLeg fixed_leg;
    SwapLeg float_leg;
    bool payer = true;  // payer swaption: receive float, pay fixed
    std::vector<double> exercise_dates;
    Settlement settlement = Settlement::Cash;

    double notional() const { return fixed_leg.notional; }
    void validate() const;
};

// Co-terminal Bermudan on a vanilla swap with regular schedules.
struct BermudanTerms {
    double notional = 10000.0;
    double fixed_rate = 0.028;
    double start = 1.5, end = 4.0;
    double fixed_step = 0.5, float_step = 0.25;
    std::vector<double> exercise_dates{1.5, 2.0, 2.5, 3.0, 3.5};
    bool payer = true;
    Settlement settlement = Settlement::Cash;
};
BermudanSpec make_bermudan(const BermudanTerms& t);

// Legs restricted to periods starting on or after t_ex.
SwapLeg entered_leg(const SwapLeg& leg, double t_ex);

// Value at st.t of the swap entered at t_ex (payer sign convention applied).
// float_fixings are indexed like the periods of the entered float leg.
double underlying_value(const BermudanSpec& b, double t_ex, const LegState& st,
                        std::span<const double> float_fixings = {});

// U_m(x): value at exercise date m of the swap entered there.
double swap_exercise_value(const BermudanSpec& b, std::size_t m, const market::CurrencyModel& ccy,
                           double x);

// U[p * M + m] over all paths for factor 0 of the cube.
std::vector<double> exercise_value_cube(const BermudanSpec& b, const market::CurrencyModel& ccy,
                                        const market::TimeGrid& grid, const market::PathCube& cube);

}  // namespace xvann::instruments
