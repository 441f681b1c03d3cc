#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xvann/bsde/problem.hpp"
#include "xvann/errors.hpp"
#include "xvann/bsde/state.hpp"
#include "xvann/neural/adam.hpp"

namespace xvann::bsde {

// Forward: start from V0, evolve with the Deltas, subtract cashflows, and
// penalize the terminal value V(T_N+). Backward: start from V(T_N+) = 0,
// apply cashflow and exercise jumps going back, and penalize the spread of the
// path values at 0 around V0.
enum class LossStyle { Forward, Backward };

struct RolloutResult {
    // Undiscounted values in currency units at each grid date before (pre)
    // and after (post) the jump of that date, [p * dates + n]; zero beyond
    // the horizon.
    std::vector<double> v_pre, v_post;
    // Forward: terminal value V(T_N+). Backward: V_p0 - V0. Per notional.
    std::vector<double> residual;
    // Backward: 1 where continuation was kept at exercise date m, [p * M + m].
    std::vector<std::uint8_t> eta;
    double loss = 0.0;
};

// Evaluation without gradient bookkeeping.
RolloutResult rollout(const Problem& pr, const TrainableState& st, LossStyle style, int threads = 1);
inline RolloutResult forward_rollout(const Problem& pr, const TrainableState& st, int threads = 1) {
    return rollout(pr, st, LossStyle::Forward, threads);
}
inline RolloutResult backward_rollout(const Problem& pr, const TrainableState& st, int threads = 1) {
    return rollout(pr, st, LossStyle::Backward, threads);
}

// (1/A) sum_p r_p^2 over the residuals of a rollout.
double loss_forward_style(const RolloutResult& r);
double loss_backward_style(const RolloutResult& r);

// Loss on paths [first, last) and its gradient with respect to theta,
// by reverse-mode differentiation through the rollout.
double loss_and_gradient(const Problem& pr, const TrainableState& st, LossStyle style,
                         std::span<double> grad, int threads = 1, std::size_t first = 0,
                         std::size_t last = static_cast<std::size_t>(-1));

// Raised when the loss becomes non-finite; carries the history so far.
class DivergenceError : public TrainingError {
   public:
    DivergenceError(const std::string& what, std::vector<double> history)
        : TrainingError(what), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

   private:
    std::vector<double> history_;
};

struct TrainConfig {
    std::size_t steps = 1000;
    neural::AdamConfig adam;
    double lr_decay_rate = 0.1;  // lr * rate^(step / decay_steps)
    std::size_t lr_decay_steps = 1000;
    std::size_t batch_paths = 0;  // 0: full batch
    LossStyle style = LossStyle::Forward;
    int threads = 1;
    std::function<void(std::size_t, double)> on_step;  // optional progress hook
};

struct TrainResult {
    TrainableState state;
    std::vector<double> loss_history;  // loss before each update, plus the final loss
};

TrainResult train(const Problem& pr, TrainableState state, const TrainConfig& cfg);

}  // namespace xvann::bsde
