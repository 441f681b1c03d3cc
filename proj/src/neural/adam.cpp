#include "xvann/neural/adam.hpp"

#include <cmath>
#include <string>

#include "xvann/errors.hpp"

namespace xvann::neural {

void Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw DimensionError("adam: parameter and gradient lengths differ from the optimizer state");
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (!std::isfinite(grad[i]))
            throw TrainingError("non-finite gradient at optimizer step " + std::to_string(t_ + 1) +
                                " (entry " + std::to_string(i) + ")");
    if (lr < 0.0) lr = cfg_.lr;
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double g = grad[i];
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
        const double mh = m_[i] / c1, vh = v_[i] / c2;
        params[i] -= lr * mh / (std::sqrt(vh) + cfg_.eps);
    }
}

}  // namespace xvann::neural
