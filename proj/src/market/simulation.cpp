#include "xvann/market/simulation.hpp"

#include <cmath>
#include <vector>

#include "xvann/errors.hpp"
#include "xvann/parallel.hpp"
#include "xvann/rng.hpp"

namespace xvann::market {

namespace {
constexpr std::size_t kPathBlock = 1024;
}

void build_correlated_increments(const CorrelationMatrix& corr, const TimeGrid& grid,
                                 std::uint64_t seed, PathCube& cube, int threads) {
    const std::size_t k = cube.factors();
    if (static_cast<std::size_t>(corr.dim()) != k)
        throw CorrelationError("correlation dimension does not match the number of factors");
    if (grid.size() != cube.dates()) throw DimensionError("grid does not match path cube dates");
    const Eigen::MatrixXd& l = corr.factor();
    const std::size_t n_blocks = (cube.paths() + kPathBlock - 1) / kPathBlock;
    parallel_for(n_blocks, threads, [&](std::size_t b) {
        std::vector<double> xi(k);
        const std::size_t p_end = std::min(cube.paths(), (b + 1) * kPathBlock);
        for (std::size_t p = b * kPathBlock; p < p_end; ++p) {
            for (std::size_t n = 0; n < grid.steps(); ++n) {
                const double sq = std::sqrt(grid.dt(n));
                for (std::size_t j = 0; j < k; ++j) xi[j] = counter_normal(seed, j, n, p);
                for (std::size_t j = 0; j < k; ++j) {
                    double s = 0.0;
                    for (std::size_t m = 0; m <= j; ++m) s += l(j, m) * xi[m];
                    cube.dw(j, p, n) = sq * s;
                }
            }
        }
    });
}

void simulate_hw1f(const HullWhiteParams& params, const TimeGrid& grid, PathCube& cube,
                   std::size_t factor, const PiecewiseConstant* eta, double rho) {
    if (grid.size() != cube.dates()) throw DimensionError("grid does not match path cube dates");
    if (factor >= cube.factors()) throw DimensionError("factor index out of range");
    const std::size_t steps = grid.steps();
    std::vector<OuTransition> tr(steps);
    std::vector<double> scale(steps);
    for (std::size_t n = 0; n < steps; ++n) {
        tr[n] = hw_transition(params, grid[n], grid[n + 1], eta, rho);
        scale[n] = std::sqrt(tr[n].variance / grid.dt(n));
    }
    for (std::size_t p = 0; p < cube.paths(); ++p) {
        cube.x(factor, p, 0) = 0.0;
        for (std::size_t n = 0; n < steps; ++n) {
            const double h = scale[n] * cube.dw(factor, p, n);
            cube.hedge(factor, p, n) = h;
            cube.x(factor, p, n + 1) = tr[n].decay * cube.x(factor, p, n) + tr[n].mean_shift + h;
        }
    }
}

double short_rate(const MarketModel& model, std::size_t currency, double x, double t) {
    const auto& c = currency == 0 ? model.domestic : model.foreign.at(currency - 1);
    return x + c.curve.forward(t);
}

PathCube simulate_multiccy(const MarketModel& model, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed, int threads) {
    model.validate();
    if (n_paths == 0) throw DimensionError("need at least one path");
    const std::size_t nf = model.n_foreign();
    PathCube cube(model.n_factors(), n_paths, grid.size());
    build_correlated_increments(model.corr, grid, seed, cube, threads);

    simulate_hw1f(model.domestic.hw, grid, cube, 0);
    for (std::size_t i = 0; i < nf; ++i) {
        const std::size_t s = model.fx_index(i);
        simulate_hw1f(model.foreign[i].hw, grid, cube, 1 + i, &model.fx[i].eta,
                      model.corr(static_cast<int>(1 + i), static_cast<int>(s)));
    }

    const std::size_t steps = grid.steps();
    std::vector<double> f0(steps);
    for (std::size_t n = 0; n < steps; ++n) f0[n] = model.domestic.curve.forward(grid[n]);
    for (std::size_t i = 0; i < nf; ++i) {
        const std::size_t s = model.fx_index(i);
        std::vector<double> fi(steps), eta(steps);
        for (std::size_t n = 0; n < steps; ++n) {
            fi[n] = model.foreign[i].curve.forward(grid[n]);
            eta[n] = model.fx[i].eta(grid[n]);
        }
        const double ls0 = std::log(model.fx[i].spot);
        for (std::size_t p = 0; p < n_paths; ++p) {
            cube.x(s, p, 0) = ls0;
            for (std::size_t n = 0; n < steps; ++n) {
                const double h = grid.dt(n);
                const double r0 = cube.x(0, p, n) + f0[n];
                const double ri = cube.x(1 + i, p, n) + fi[n];
                const double noise = eta[n] * cube.dw(s, p, n);
                cube.x(s, p, n + 1) = cube.x(s, p, n) + (r0 - ri - 0.5 * eta[n] * eta[n]) * h + noise;
                cube.hedge(s, p, n) = std::expm1(noise - 0.5 * eta[n] * eta[n] * h);
            }
        }
    }

    for (std::size_t p = 0; p < n_paths; ++p) {
        double integral = 0.0;
        cube.numeraire(p, 0) = 1.0;
        for (std::size_t n = 0; n < steps; ++n) {
            integral += (cube.x(0, p, n) + f0[n]) * grid.dt(n);
            cube.numeraire(p, n + 1) = std::exp(integral);
        }
    }
    return cube;
}

}  // namespace xvann::market
