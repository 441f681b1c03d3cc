#pragma once

#include "xvann/instruments/bermudan.hpp"
#include "xvann/market/hull_white.hpp"

namespace xvann::amc {

struct LatticeSpec {
    std::size_t steps_per_year = 600;
    double width_sd = 7.0;  // truncation of the x grid in standard deviations

    void validate() const;
};

// Trinomial Hull-White tree (constant kappa and sigma) fitted to the initial
// curve. Event dates are snapped to the nearest time step.
double lattice_bermudan(const market::YieldCurve& curve, const market::HullWhiteParams& p,
                        const instruments::BermudanSpec& b, const LatticeSpec& spec = {});

// Closed-form European swaption on the swap entered at exercise date m, seen
// from (t, x_t), via Jamshidian's decomposition. The bond strikes are solved
// once at construction.
class EuropeanSwaption {
   public:
    EuropeanSwaption(const market::YieldCurve& curve, const market::HullWhiteParams& p,
                     const instruments::BermudanSpec& b, std::size_t m);
    double operator()(double t, double x_t) const;

   private:
    const market::YieldCurve* curve_;
    market::HullWhiteParams p_;
    bool payer_;
    double te_, a0_ = 0.0, y_te_ = 0.0;
    std::vector<double> times_, coupons_, strikes_;
};

double jamshidian_swaption(const market::YieldCurve& curve, const market::HullWhiteParams& p,
                           const instruments::BermudanSpec& b, std::size_t m, double t = 0.0, double x_t = 0.0);

// Deterministic-cashflow form of the swap entered at t_ex: payment times and
// amounts (payer sign). Float periods with fixing at their start are replaced
// by alpha N at the start and -(alpha - beta tau) N at the end.
struct Flow {
    double t;
    double amount;
};
std::vector<Flow> underlying_flows(const instruments::BermudanSpec& b, double t_ex);

}  // namespace xvann::amc
