#pragma once

#include <cstdint>

#include "xvann/market/model.hpp"
#include "xvann/market/path_cube.hpp"
#include "xvann/market/time_grid.hpp"

namespace xvann::market {

// Fills cube.dw with sqrt(dt) * L * xi, xi i.i.d. standard normals drawn from
// the counter-based generator keyed on (seed, factor, step, path).
void build_correlated_increments(const CorrelationMatrix& corr, const TimeGrid& grid,
                                 std::uint64_t seed, PathCube& cube, int threads = 1);

// Exact Ornstein-Uhlenbeck update of factor `factor` driven by its increments.
// eta/rho add the quanto drift -rho * sigma * eta of a foreign currency.
void simulate_hw1f(const HullWhiteParams& params, const TimeGrid& grid, PathCube& cube,
                   std::size_t factor, const PiecewiseConstant* eta = nullptr, double rho = 0.0);

// Full scenario generation for the domestic + foreign model, including ln S
// (Euler, left-endpoint rates) and the numeraire B (left Riemann sum of r_0).
PathCube simulate_multiccy(const MarketModel& model, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed, int threads = 1);

// Short rate r_i = x_i + f_i(0,t) of currency i (0 = domestic).
double short_rate(const MarketModel& model, std::size_t currency, double x, double t);

}  // namespace xvann::market
