#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "xvann/bsde/problem.hpp"
#include "xvann/instruments/bermudan.hpp"
#include "xvann/market/model.hpp"
#include "xvann/market/time_grid.hpp"

namespace xvann::amc {

enum class Basis { One, X, X2, X3, Exercise, Exercise2, Zcb, European };

struct RegressionBasis {
    std::vector<Basis> fns{Basis::One, Basis::Exercise, Basis::Exercise2, Basis::Zcb};
};

// Basis values for path p at grid date n, written to out (one per function).
using FeatureFn = std::function<void(std::size_t n, std::size_t p, std::span<double> out)>;

// Features of a Bermudan on a one-factor cube: "Exercise" is the value at t_n
// of the swap entered at the next exercise date on or after t_n, "Zcb" is
// P(t_n, final maturity) and "European" the closed-form option on that swap.
FeatureFn bermudan_features(const instruments::BermudanSpec& b, const market::CurrencyModel& ccy,
                            const market::TimeGrid& grid, const market::PathCube& cube, const RegressionBasis& basis);

struct AmcResult {
    double v0 = 0.0, v0_se = 0.0;  // currency units
    // Regressed values like the rollout surfaces, [p * dates + n], currency units.
    std::vector<double> v_pre, v_post;
    std::vector<std::uint8_t> eta;  // [p * M + m]
    std::vector<Eigen::VectorXd> exercise_coef;  // continuation regression per exercise date
};

// Longstaff-Schwartz on the problem's cashflows and exercise values. With
// policy given, its exercise regressions are reused (out-of-sample run) and
// only the value regressions are fitted.
AmcResult amc_exposure(const bsde::Problem& pr, const FeatureFn& features, std::size_t n_basis,
                       const std::vector<Eigen::VectorXd>* policy = nullptr);

}  // namespace xvann::amc
