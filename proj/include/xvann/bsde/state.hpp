#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xvann/bsde/problem.hpp"
#include "xvann/neural/mlp.hpp"

namespace xvann::bsde {

struct NetConfig {
    std::size_t extra_width = 10;  // hidden width is d + extra_width
    neural::Activation activation = neural::Activation::Tanh;
    bool bias = true;
    bool share_weights = false;  // one network for all steps, time as an extra input
};

// All trainables in one flat vector theta = [V0, Z0 (d), network parameters].
// With per-step networks, network n (n = 1..steps-1) occupies slot n-1.
// Network inputs are the factors at T_n, standardized with the per-date path
// mean and standard deviation of the training set.
class TrainableState {
   public:
    TrainableState() = default;
    TrainableState(std::size_t factors, std::size_t steps, const NetConfig& cfg);

    std::size_t factors() const { return d_; }
    std::size_t steps() const { return steps_; }
    const NetConfig& config() const { return cfg_; }
    const neural::Mlp& net() const { return net_; }
    std::size_t network_count() const;

    std::vector<double>& theta() { return theta_; }
    const std::vector<double>& theta() const { return theta_; }
    double& v0() { return theta_[0]; }
    double v0() const { return theta_[0]; }
    std::span<double> z0() { return {theta_.data() + 1, d_}; }
    std::span<const double> z0() const { return {theta_.data() + 1, d_}; }
    std::size_t net_offset(std::size_t n) const;  // offset of the network used at step n >= 1
    std::span<const double> net_params(std::size_t n) const { return {theta_.data() + net_offset(n), net_.size()}; }

    // Standardization, [n * d + i] for grid dates 0..steps.
    std::vector<double>& input_mean() { return mean_; }
    std::vector<double>& input_scale() { return scale_; }
    const std::vector<double>& input_mean() const { return mean_; }
    const std::vector<double>& input_scale() const { return scale_; }
    double time_scale() const { return time_scale_; }
    void set_time_scale(double s) { time_scale_ = s; }

   private:
    std::size_t d_ = 0, steps_ = 0;
    NetConfig cfg_;
    neural::Mlp net_;
    std::vector<double> theta_;
    std::vector<double> mean_, scale_;
    double time_scale_ = 1.0;
};

// Fresh state for a problem: V0 = 0, Z0 = 0, Glorot networks, input
// standardization fitted on the problem's paths.
TrainableState init_state(const Problem& problem, const NetConfig& cfg, std::uint64_t seed);

}  // namespace xvann::bsde
