#pragma once

#include <cstddef>
#include <vector>

namespace xvann::market {

// Simulated scenario set. Factor values x(i,p,n) live on all grid dates
// n = 0..N; Brownian increments dw(j,p,n) and the hedge increments
// hedge(i,p,n) belong to the step [T_n, T_{n+1}].
//
// The hedge increment of a factor is the martingale part of its move over the
// step: the Gaussian part of the x-factor transition, and the relative
// lognormal FX move exp(eta dW - eta^2 dt / 2) - 1 for ln S factors. A value
// V with Delta Z_i = dV/dX_i then changes in discounted terms by
// sum_i Z_i hedge_i / B_n.
class PathCube {
   public:
    PathCube() = default;
    PathCube(std::size_t factors, std::size_t paths, std::size_t dates);

    std::size_t factors() const { return factors_; }
    std::size_t paths() const { return paths_; }
    std::size_t dates() const { return dates_; }
    std::size_t steps() const { return dates_ - 1; }

    double& x(std::size_t i, std::size_t p, std::size_t n) { return x_[(i * paths_ + p) * dates_ + n]; }
    double x(std::size_t i, std::size_t p, std::size_t n) const { return x_[(i * paths_ + p) * dates_ + n]; }
    double& dw(std::size_t j, std::size_t p, std::size_t n) { return dw_[(j * paths_ + p) * steps() + n]; }
    double dw(std::size_t j, std::size_t p, std::size_t n) const { return dw_[(j * paths_ + p) * steps() + n]; }
    double& hedge(std::size_t i, std::size_t p, std::size_t n) { return hedge_[(i * paths_ + p) * steps() + n]; }
    double hedge(std::size_t i, std::size_t p, std::size_t n) const { return hedge_[(i * paths_ + p) * steps() + n]; }
    double& numeraire(std::size_t p, std::size_t n) { return b_[p * dates_ + n]; }
    double numeraire(std::size_t p, std::size_t n) const { return b_[p * dates_ + n]; }
    double discount(std::size_t p, std::size_t n) const { return 1.0 / b_[p * dates_ + n]; }

    // Flat row-major storage, factors outermost.
    const std::vector<double>& factor_data() const { return x_; }
    const std::vector<double>& increment_data() const { return dw_; }
    const std::vector<double>& hedge_data() const { return hedge_; }
    const std::vector<double>& numeraire_data() const { return b_; }
    std::vector<double>& factor_data() { return x_; }
    std::vector<double>& increment_data() { return dw_; }
    std::vector<double>& hedge_data() { return hedge_; }
    std::vector<double>& numeraire_data() { return b_; }

   private:
    std::size_t factors_ = 0, paths_ = 0, dates_ = 0;
    std::vector<double> x_, dw_, hedge_, b_;
};

}  // namespace xvann::market
