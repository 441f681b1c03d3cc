#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace xvann::neural {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over a flat parameter vector.
class Adam {
   public:
    Adam() = default;
    Adam(std::size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

    // One update with learning rate lr (defaults to the configured one).
    // A non-finite gradient entry raises TrainingError naming the step.
    void step(std::span<double> params, std::span<const double> grad, double lr = -1.0);

    std::size_t iterations() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<double>& first_moment() const { return m_; }
    const std::vector<double>& second_moment() const { return v_; }

   private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace xvann::neural
