#include "xvann/bsde/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xvann/parallel.hpp"

namespace xvann::bsde {

namespace {

// Fixed path blocking: gradient sums are formed per block and combined by a
// pairwise tree, so results do not depend on the number of threads.
constexpr std::size_t kChunk = 512;

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double a : v) s += a;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

// In-place pairwise reduction of equally sized buffers into bufs[0].
void pairwise_reduce(std::vector<std::vector<double>*>& bufs) {
    for (std::size_t stride = 1; stride < bufs.size(); stride *= 2)
        for (std::size_t i = 0; i + stride < bufs.size(); i += 2 * stride) {
            auto& a = *bufs[i];
            const auto& b = *bufs[i + stride];
            for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
        }
}

struct Range {
    std::size_t first, last;
    std::size_t size() const { return last - first; }
    std::size_t chunks() const { return (size() + kChunk - 1) / kChunk; }
    std::size_t chunk_begin(std::size_t c) const { return first + c * kChunk; }
    std::size_t chunk_end(std::size_t c) const { return std::min(last, first + (c + 1) * kChunk); }
};

// Buffers reused across training steps.
struct Scratch {
    std::vector<neural::MlpWorkspace> ws;
    std::vector<Eigen::MatrixXd> upstream;
    std::vector<std::vector<double>> grad;
    std::vector<double> inc;
};

class Rollout {
   public:
    Rollout(const Problem& pr, const TrainableState& st, LossStyle style, Range r, Scratch& s, bool keep_ws,
            int threads)
        : pr_(pr), st_(st), style_(style), r_(r), keep_ws_(keep_ws), threads_(threads), s_(s), inc_(s.inc) {
        if (st.factors() != pr.factors() || st.steps() != pr.horizon)
            throw DimensionError("trainable state does not match the problem");
        if (style == LossStyle::Backward && pr.has_exercise() == false && pr.cashflow.empty())
            throw RolloutError("backward rollout needs cashflows or exercise values");
        if (style == LossStyle::Forward && pr.has_exercise())
            throw RolloutError("forward rollout cannot handle early exercise");
        h_ = pr.horizon;
        inc_.assign(h_ * r_.size(), 0.0);
        if (keep_ws_) {
            s_.ws.resize(h_ * r_.chunks());
            s_.upstream.resize(h_ * r_.chunks());
        }
    }

    // Discounted value increments sum_i Z_i hedge_i / B_n for every step and path.
    void compute_increments() {
        const auto& cube = *pr_.cube;
        const std::size_t d = st_.factors();
        const std::size_t nc = r_.chunks();
        for (std::size_t p = r_.first; p < r_.last; ++p) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += st_.z0()[i] * cube.hedge(i, p, 0);
            inc_[p - r_.first] = s / cube.numeraire(p, 0);
        }
        if (h_ < 2) return;
        parallel_for((h_ - 1) * nc, threads_, [&](std::size_t item) {
            const std::size_t n = 1 + item / nc, c = item % nc;
            const std::size_t p0 = r_.chunk_begin(c), p1 = r_.chunk_end(c);
            neural::MlpWorkspace local;
            neural::MlpWorkspace& ws = keep_ws_ ? s_.ws[n * nc + c] : local;
            ws.act.resize(st_.net().spec().layers() + 1);
            inputs(n, p0, p1, ws.act[0]);
            const Eigen::MatrixXd& z = st_.net().forward_batch(st_.net_params(n), ws.act[0], ws);
            for (std::size_t p = p0; p < p1; ++p) {
                const Eigen::Index j = static_cast<Eigen::Index>(p - p0);
                double s = 0.0;
                for (std::size_t i = 0; i < d; ++i) s += z(static_cast<Eigen::Index>(i), j) * cube.hedge(i, p, n);
                inc_[n * r_.size() + (p - r_.first)] = s / cube.numeraire(p, n);
            }
        });
    }

    // Pathwise rollout. Fills residuals, exercise flags and, if asked, values.
    void run(RolloutResult* out) {
        const auto& cube = *pr_.cube;
        const std::size_t np = r_.size(), dates = pr_.dates(), nm = pr_.exercise_index.size();
        residual_.assign(np, 0.0);
        first_exercise_.assign(np, h_ + 1);
        if (out) {
            out->v_pre.assign(np * dates, 0.0);
            out->v_post.assign(np * dates, 0.0);
            out->eta.assign(np * nm, 1);
        }
        std::vector<std::int64_t> ex_slot(h_ + 1, -1);
        for (std::size_t m = 0; m < nm; ++m) ex_slot[pr_.exercise_index[m]] = static_cast<std::int64_t>(m);
        const double scale = pr_.notional;

        parallel_for(r_.chunks(), threads_, [&](std::size_t c) {
            for (std::size_t p = r_.chunk_begin(c); p < r_.chunk_end(c); ++p) {
                const std::size_t q = p - r_.first;
                if (style_ == LossStyle::Forward) {
                    double v = st_.v0();
                    for (std::size_t n = 0; n <= h_; ++n) {
                        const double b = cube.numeraire(p, n);
                        if (out) out->v_pre[q * dates + n] = v * b * scale;
                        v -= pr_.cf(p, n) / b;
                        if (out) out->v_post[q * dates + n] = v * b * scale;
                        if (n < h_) v += inc_[n * np + q];
                        if (!std::isfinite(v)) fail(p, n);
                    }
                    residual_[q] = v * cube.numeraire(p, h_);
                } else {
                    double v = 0.0;
                    for (std::size_t n = h_ + 1; n-- > 0;) {
                        const double b = cube.numeraire(p, n);
                        if (out) out->v_post[q * dates + n] = v * b * scale;
                        if (ex_slot[n] >= 0) {
                            const auto m = static_cast<std::size_t>(ex_slot[n]);
                            const double u = pr_.exercise[p * nm + m] / b;
                            if (u > v) {  // ties keep the continuation branch
                                v = u;
                                first_exercise_[q] = n;
                                if (out) out->eta[q * nm + m] = 0;
                            }
                        }
                        v += pr_.cf(p, n) / b;
                        if (out) out->v_pre[q * dates + n] = v * b * scale;
                        if (n > 0) v -= inc_[(n - 1) * np + q];
                        if (!std::isfinite(v)) fail(p, n);
                    }
                    residual_[q] = v - st_.v0();
                }
            }
        });
    }

    double loss() const {
        std::vector<double> sq(residual_.size());
        for (std::size_t q = 0; q < sq.size(); ++q) sq[q] = residual_[q] * residual_[q];
        return pairwise_sum(sq) / static_cast<double>(r_.size());
    }

    void gradient(std::span<double> grad) {
        const auto& cube = *pr_.cube;
        const std::size_t d = st_.factors(), np = r_.size(), nc = r_.chunks();
        const double a = static_cast<double>(np);
        std::fill(grad.begin(), grad.end(), 0.0);

        // dL/d(inc_n) on path p: coef_p * alive_p(n)
        std::vector<double> coef(np);
        for (std::size_t q = 0; q < np; ++q) {
            const std::size_t p = r_.first + q;
            coef[q] = style_ == LossStyle::Forward ? 2.0 * residual_[q] * cube.numeraire(p, h_) / a
                                                   : -2.0 * residual_[q] / a;
        }
        auto alive = [&](std::size_t q, std::size_t n) {
            return style_ == LossStyle::Forward || n < first_exercise_[q];
        };

        grad[0] = pairwise_sum(coef);  // V0 enters like an increment that is always alive
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<double> dz(np);
            for (std::size_t q = 0; q < np; ++q) {
                const std::size_t p = r_.first + q;
                dz[q] = alive(q, 0) ? coef[q] * cube.hedge(i, p, 0) / cube.numeraire(p, 0) : 0.0;
            }
            grad[1 + i] = pairwise_sum(dz);
        }
        if (h_ < 2) return;

        const std::size_t nsize = st_.net().size();
        const std::size_t items = (h_ - 1) * nc;
        auto& buf = s_.grad;
        buf.resize(items);
        parallel_for(items, threads_, [&](std::size_t item) {
            const std::size_t n = 1 + item / nc, c = item % nc;
            const std::size_t p0 = r_.chunk_begin(c), p1 = r_.chunk_end(c);
            buf[item].assign(nsize, 0.0);
            Eigen::MatrixXd& g = s_.upstream[n * nc + c];
            g.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(p1 - p0));
            for (std::size_t p = p0; p < p1; ++p) {
                const std::size_t q = p - r_.first;
                const double w = alive(q, n) ? coef[q] / cube.numeraire(p, n) : 0.0;
                for (std::size_t i = 0; i < d; ++i)
                    g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p - p0)) = w * cube.hedge(i, p, n);
            }
            st_.net().backward_batch(st_.net_params(n), g, s_.ws[n * nc + c], buf[item]);
        });

        auto accumulate = [&](std::vector<std::vector<double>*>& group, std::size_t offset) {
            pairwise_reduce(group);
            for (std::size_t k = 0; k < nsize; ++k) grad[offset + k] += (*group[0])[k];
        };
        if (st_.config().share_weights) {
            std::vector<std::vector<double>*> all;
            for (auto& b : buf) all.push_back(&b);
            accumulate(all, st_.net_offset(1));
        } else {
            for (std::size_t n = 1; n < h_; ++n) {
                std::vector<std::vector<double>*> group;
                for (std::size_t c = 0; c < nc; ++c) group.push_back(&buf[(n - 1) * nc + c]);
                accumulate(group, st_.net_offset(n));
            }
        }
    }

    const std::vector<double>& residuals() const { return residual_; }

   private:
    void inputs(std::size_t n, std::size_t p0, std::size_t p1, Eigen::MatrixXd& x) const {
        const auto& cube = *pr_.cube;
        const std::size_t d = st_.factors();
        const bool shared = st_.config().share_weights;
        x.resize(static_cast<Eigen::Index>(shared ? d + 1 : d), static_cast<Eigen::Index>(p1 - p0));
        for (std::size_t i = 0; i < d; ++i) {
            const double mu = st_.input_mean()[n * d + i], sc = st_.input_scale()[n * d + i];
            for (std::size_t p = p0; p < p1; ++p)
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p - p0)) = (cube.x(i, p, n) - mu) / sc;
        }
        if (shared) x.row(static_cast<Eigen::Index>(d)).setConstant(static_cast<double>(n) / st_.time_scale());
    }

    [[noreturn]] void fail(std::size_t p, std::size_t n) const {
        std::ostringstream os;
        os << "non-finite value in rollout at path " << p << ", date index " << n;
        throw RolloutError(os.str());
    }

    const Problem& pr_;
    const TrainableState& st_;
    LossStyle style_;
    Range r_;
    bool keep_ws_;
    int threads_;
    std::size_t h_ = 0;
    Scratch& s_;
    std::vector<double>& inc_;
    std::vector<double> residual_;
    std::vector<std::size_t> first_exercise_;
};

Range make_range(const Problem& pr, std::size_t first, std::size_t last) {
    last = std::min(last, pr.paths());
    if (first >= last) throw DimensionError("empty path range");
    return {first, last};
}

}  // namespace

RolloutResult rollout(const Problem& pr, const TrainableState& st, LossStyle style, int threads) {
    Scratch s;
    Rollout ro(pr, st, style, make_range(pr, 0, pr.paths()), s, false, threads);
    ro.compute_increments();
    RolloutResult out;
    ro.run(&out);
    out.residual = ro.residuals();
    out.loss = ro.loss();
    return out;
}

static double mean_square(const std::vector<double>& r) {
    if (r.empty()) return 0.0;
    std::vector<double> sq(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) sq[i] = r[i] * r[i];
    return pairwise_sum(sq) / static_cast<double>(r.size());
}

double loss_forward_style(const RolloutResult& r) { return mean_square(r.residual); }
double loss_backward_style(const RolloutResult& r) { return mean_square(r.residual); }

static double loss_and_gradient(const Problem& pr, const TrainableState& st, LossStyle style,
                                std::span<double> grad, int threads, std::size_t first, std::size_t last,
                                Scratch& s) {
    if (grad.size() != st.theta().size()) throw DimensionError("gradient buffer has the wrong length");
    Rollout ro(pr, st, style, make_range(pr, first, last), s, true, threads);
    ro.compute_increments();
    ro.run(nullptr);
    ro.gradient(grad);
    return ro.loss();
}

double loss_and_gradient(const Problem& pr, const TrainableState& st, LossStyle style,
                         std::span<double> grad, int threads, std::size_t first, std::size_t last) {
    Scratch s;
    return loss_and_gradient(pr, st, style, grad, threads, first, last, s);
}

TrainResult train(const Problem& pr, TrainableState state, const TrainConfig& cfg) {
    TrainResult res;
    neural::Adam opt(state.theta().size(), cfg.adam);
    std::vector<double> grad(state.theta().size());
    Scratch scratch;
    const std::size_t batch = cfg.batch_paths == 0 ? pr.paths() : std::min(cfg.batch_paths, pr.paths());
    const std::size_t n_batches = pr.paths() / batch;
    auto check = [&](double loss, std::size_t step) {
        if (!std::isfinite(loss)) {
            std::ostringstream os;
            os << "loss diverged at training step " << step;
            throw DivergenceError(os.str(), res.loss_history);
        }
    };
    for (std::size_t k = 0; k < cfg.steps; ++k) {
        const std::size_t b = k % n_batches;
        double loss;
        try {
            loss = loss_and_gradient(pr, state, cfg.style, grad, cfg.threads, b * batch, (b + 1) * batch, scratch);
        } catch (const RolloutError& e) {
            throw DivergenceError(e.what(), res.loss_history);
        }
        check(loss, k);
        res.loss_history.push_back(loss);
        if (cfg.on_step) cfg.on_step(k, loss);
        const double lr = cfg.adam.lr * std::pow(cfg.lr_decay_rate, static_cast<double>(k) /
                                                                        static_cast<double>(cfg.lr_decay_steps));
        try {
            opt.step(state.theta(), grad, lr);
        } catch (const TrainingError& e) {
            throw DivergenceError(e.what(), res.loss_history);
        }
    }
    double final_loss;
    try {
        final_loss = rollout(pr, state, cfg.style, cfg.threads).loss;
    } catch (const RolloutError& e) {
        throw DivergenceError(e.what(), res.loss_history);
    }
    check(final_loss, cfg.steps);
    res.loss_history.push_back(final_loss);
    if (cfg.on_step) cfg.on_step(cfg.steps, final_loss);
    res.state = std::move(state);
    return res;
}

}  // namespace xvann::bsde
