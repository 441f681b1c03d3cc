#include "xvann/bsde/state.hpp"

#include <algorithm>
#include <cmath>

#include "xvann/errors.hpp"

namespace xvann::bsde {

TrainableState::TrainableState(std::size_t factors, std::size_t steps, const NetConfig& cfg)
    : d_(factors), steps_(steps), cfg_(cfg) {
    if (factors == 0 || steps == 0) throw DimensionError("state needs at least one factor and one step");
    const std::size_t input = cfg.share_weights ? factors + 1 : factors;
    net_ = neural::Mlp(neural::MlpSpec::delta_net(factors, cfg.extra_width, cfg.activation, cfg.bias, input));
    theta_.assign(1 + d_ + network_count() * net_.size(), 0.0);
    mean_.assign((steps_ + 1) * d_, 0.0);
    scale_.assign((steps_ + 1) * d_, 1.0);
}

std::size_t TrainableState::network_count() const {
    if (steps_ <= 1) return 0;
    return cfg_.share_weights ? 1 : steps_ - 1;
}

std::size_t TrainableState::net_offset(std::size_t n) const {
    if (n == 0 || n >= steps_) throw DimensionError("no network at this step");
    const std::size_t slot = cfg_.share_weights ? 0 : n - 1;
    return 1 + d_ + slot * net_.size();
}

TrainableState init_state(const Problem& problem, const NetConfig& cfg, std::uint64_t seed) {
    const auto& cube = *problem.cube;
    const std::size_t d = cube.factors();
    TrainableState st(d, problem.horizon, cfg);
    for (std::size_t k = 0; k < st.network_count(); ++k) {
        std::span<double> slot(st.theta().data() + 1 + d + k * st.net().size(), st.net().size());
        st.net().init(slot, seed + 0x9e37 * (k + 1));
    }
    const double np = static_cast<double>(cube.paths());
    for (std::size_t n = 0; n <= problem.horizon; ++n) {
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t p = 0; p < cube.paths(); ++p) s += cube.x(i, p, n);
            const double mean = s / np;
            double ss = 0.0;
            for (std::size_t p = 0; p < cube.paths(); ++p) {
                const double e = cube.x(i, p, n) - mean;
                ss += e * e;
            }
            const double sd = std::sqrt(ss / np);
            st.input_mean()[n * d + i] = mean;
            st.input_scale()[n * d + i] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
        }
    }
    st.set_time_scale(problem.horizon);
    return st;
}

}  // namespace xvann::bsde
