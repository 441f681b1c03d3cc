#pragma once

#include <vector>

#include "xvann/market/yield_curve.hpp"

namespace xvann::market {

// Right-continuous step function on [0, inf): values[i] on [breaks[i], breaks[i+1]).
class PiecewiseConstant {
   public:
    PiecewiseConstant() : PiecewiseConstant(0.0) {}
    explicit PiecewiseConstant(double flat) : breaks_{0.0}, values_{flat} {}
    PiecewiseConstant(std::vector<double> breaks, std::vector<double> values);

    double operator()(double t) const;
    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }
    bool is_flat() const { return values_.size() == 1; }

   private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

struct HullWhiteParams {
    double kappa = 0.01;
    PiecewiseConstant sigma;
};

// (1 - exp(-k h)) / k, with the k -> 0 limit handled
double decay_factor(double k, double h);

// G(t,T) = (1 - exp(-kappa (T-t))) / kappa
inline double bond_g(double kappa, double tau) { return decay_factor(kappa, tau); }

// y(t) = int_0^t exp(-2 kappa (t-u)) sigma(u)^2 du
double hw_variance_integral(const HullWhiteParams& p, double t);

// P(t,T) given the state x(t); y_t may be supplied to avoid recomputation.
double zero_bond(const YieldCurve& curve, const HullWhiteParams& p, double t, double T, double x_t);
double zero_bond(const YieldCurve& curve, double kappa, double t, double T, double x_t, double y_t);

// Exact one-step transition of x over [s,t]:
//   x(t) = decay * x(s) + mean_shift + sqrt(variance) * N(0,1)
// mean_shift includes the y-drift and, when rho != 0, the quanto correction
// -rho * sigma(u) * eta(u).
struct OuTransition {
    double decay = 1.0;
    double mean_shift = 0.0;
    double variance = 0.0;
};

OuTransition hw_transition(const HullWhiteParams& p, double s, double t,
                           const PiecewiseConstant* eta = nullptr, double rho = 0.0);

}  // namespace xvann::market
