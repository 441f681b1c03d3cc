#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "xvann/bsde/engine.hpp"
#include "xvann/market/simulation.hpp"
#include "xvann/rng.hpp"

using namespace xvann;
using namespace xvann::bsde;
using namespace xvann::market;

namespace {

MarketModel hw_model(double f, double sigma) {
    MarketModel m;
    m.domestic = {"USD", YieldCurve::flat(f), {0.01, PiecewiseConstant(sigma)}};
    return m;
}

MarketModel three_factor() {
    MarketModel m;
    m.domestic = {"USD", YieldCurve::flat(0.01), {0.01, PiecewiseConstant(0.01)}};
    m.foreign.push_back({"CAD", YieldCurve::flat(0.02), {0.01, PiecewiseConstant(0.01)}});
    m.fx.push_back({0.76, PiecewiseConstant(0.2)});
    m.corr = CorrelationMatrix::from_upper(3, {0.149, 0.139, 0.676});
    return m;
}

// unit cashflow at the last grid date
std::vector<double> unit_at_end(const PathCube& cube) {
    std::vector<double> cf(cube.paths() * cube.dates(), 0.0);
    for (std::size_t p = 0; p < cube.paths(); ++p) cf[p * cube.dates() + cube.dates() - 1] = 1.0;
    return cf;
}

void randomize(TrainableState& st, std::uint64_t seed, double scale = 0.5) {
    for (std::size_t i = 0; i < st.theta().size(); ++i) st.theta()[i] = scale * counter_normal(seed, 0, i, 0);
}

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(d) / std::max(std::sqrt(na), std::sqrt(nb));
}

std::vector<double> fd_gradient(const Problem& pr, TrainableState st, LossStyle style, double h = 1e-6) {
    std::vector<double> g(st.theta().size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = st.theta()[i];
        st.theta()[i] = x + h;
        const double lp = rollout(pr, st, style).loss;
        st.theta()[i] = x - h;
        const double lm = rollout(pr, st, style).loss;
        st.theta()[i] = x;
        g[i] = (lp - lm) / (2 * h);
    }
    return g;
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0;
    for (double a : v) ss += (a - m) * (a - m);
    return {m, std::sqrt(ss / (n - 1) / n)};
}

}  // namespace

TEST(Loss, HandEvaluations) {
    RolloutResult r;
    r.residual = {1.0, -1.0};
    EXPECT_DOUBLE_EQ(loss_backward_style(r), 1.0);
    r.residual = {2.0, -2.0};
    EXPECT_DOUBLE_EQ(loss_forward_style(r), 4.0);
    r.residual = {0.0, 0.0};
    EXPECT_DOUBLE_EQ(loss_forward_style(r), 0.0);
    r.residual = {0.3, -1.2, 0.5};
    const double base = loss_forward_style(r);
    for (double& v : r.residual) v *= 3.0;
    EXPECT_NEAR(loss_forward_style(r), 9.0 * base, 1e-14);
    r.residual = {0.3, -1.2, 0.5, 0.0};
    EXPECT_NEAR(loss_forward_style(r), 9.0 * base * 3.0 / 4.0 / 9.0, 1e-14);
}

TEST(Rollout, DeterministicCashflowsReplicateExactly) {
    auto m = hw_model(0.02, 0.0);
    auto g = TimeGrid::build(2.0, 4, {});
    auto cube = simulate_multiccy(m, g, 8, 1);
    std::vector<double> cf(cube.paths() * g.size(), 0.0);
    double pv = 0.0;
    for (std::size_t n : {2u, 5u, 8u}) {
        for (std::size_t p = 0; p < cube.paths(); ++p) cf[p * g.size() + n] = 3.0 * n;
        pv += 3.0 * n * cube.discount(0, n);
    }
    auto pr = make_problem(cube, g.size() - 1, 10.0, cf);
    auto st = init_state(pr, {}, 3);
    st.v0() = pv / 10.0;
    auto r = forward_rollout(pr, st);
    for (double res : r.residual) EXPECT_NEAR(res, 0.0, 1e-14);
    // jump condition on every flagged date
    for (std::size_t p = 0; p < cube.paths(); ++p)
        for (std::size_t n = 0; n < g.size(); ++n)
            EXPECT_NEAR(r.v_pre[p * g.size() + n] - r.v_post[p * g.size() + n], cf[p * g.size() + n], 1e-12);
}

TEST(Rollout, ZeroDeltaBookkeeping) {
    auto m = hw_model(0.01, 0.01);
    auto g = TimeGrid::build(1.0, 4, {});
    auto cube = simulate_multiccy(m, g, 16, 2);
    auto pr = make_problem(cube, g.size() - 1, 1.0, unit_at_end(cube));
    auto st = init_state(pr, {}, 1);
    std::fill(st.theta().begin(), st.theta().end(), 0.0);
    st.v0() = 0.97;
    auto r = forward_rollout(pr, st);
    double ms = 0.0;
    for (std::size_t p = 0; p < 16; ++p) {
        const double b = cube.numeraire(p, g.size() - 1);
        EXPECT_NEAR(r.residual[p], 0.97 * b - 1.0, 1e-14);
        ms += r.residual[p] * r.residual[p] / 16;
    }
    EXPECT_NEAR(r.loss, ms, 1e-15);
}

TEST(Gradient, ForwardRolloutMatchesFiniteDifferences) {
    auto m = three_factor();
    TimeGrid g({0.0, 0.25, 0.5, 0.75});
    auto cube = simulate_multiccy(m, g, 2, 4);
    std::vector<double> cf(2 * 4, 0.0);
    cf[0 * 4 + 2] = 0.3;
    cf[1 * 4 + 2] = -0.2;
    cf[0 * 4 + 3] = 1.0;
    cf[1 * 4 + 3] = 0.8;
    auto pr = make_problem(cube, 3, 1.0, cf);
    NetConfig nc;
    nc.extra_width = 0;  // width 3
    for (auto act : {neural::Activation::Tanh, neural::Activation::Sigmoid}) {
        nc.activation = act;
        auto st = init_state(pr, nc, 5);
        randomize(st, 17);
        std::vector<double> ga(st.theta().size());
        loss_and_gradient(pr, st, LossStyle::Forward, ga);
        EXPECT_LE(rel_err(ga, fd_gradient(pr, st, LossStyle::Forward)), 1e-5);
    }
}

TEST(Gradient, BackwardRolloutMatchesFiniteDifferences) {
    auto m = hw_model(0.02, 0.02);
    TimeGrid g({0.0, 0.5, 1.0, 1.5});
    auto cube = simulate_multiccy(m, g, 2, 6);
    NetConfig nc;
    nc.extra_width = 2;  // width 3 for d = 1
    // exercise at dates 1 and 2; path 0 exercises at date 1, path 1 continues there
    std::vector<std::size_t> ex{1, 2};
    for (int variant = 0; variant < 2; ++variant) {
        auto st0 = init_state(make_problem(cube, 3, 1.0, {}, ex, {0, 0, 0, 0}), nc, 8);
        randomize(st0, 23 + variant, 0.3);
        std::vector<double> u{variant ? -5.0 : 5.0, 0.01, -5.0, 0.02};
        std::vector<double> cf(2 * 4, 0.0);
        cf[3] = 0.05;
        cf[4 + 3] = -0.04;
        auto pr = make_problem(cube, 3, 1.0, cf, ex, u);
        std::vector<double> ga(st0.theta().size());
        loss_and_gradient(pr, st0, LossStyle::Backward, ga);
        EXPECT_LE(rel_err(ga, fd_gradient(pr, st0, LossStyle::Backward)), 1e-5) << variant;
    }
}

TEST(Gradient, ThreadCountDoesNotChangeBits) {
    auto m = three_factor();
    auto g = TimeGrid::build(0.83, 12, {0.25, 0.5, 0.75});
    auto cube = simulate_multiccy(m, g, 3000, 9);
    auto pr = make_problem(cube, g.size() - 1, 1.0, unit_at_end(cube));
    auto st = init_state(pr, {}, 2);
    std::vector<double> g1(st.theta().size()), g4(st.theta().size());
    const double l1 = loss_and_gradient(pr, st, LossStyle::Forward, g1, 1);
    const double l4 = loss_and_gradient(pr, st, LossStyle::Forward, g4, 4);
    EXPECT_EQ(l1, l4);
    EXPECT_EQ(g1, g4);
}

TEST(Train, ZeroStepsLeavesState) {
    auto m = hw_model(0.01, 0.01);
    auto g = TimeGrid::build(1.0, 4, {});
    auto cube = simulate_multiccy(m, g, 64, 2);
    auto pr = make_problem(cube, g.size() - 1, 1.0, unit_at_end(cube));
    auto st = init_state(pr, {}, 1);
    TrainConfig tc;
    tc.steps = 0;
    auto res = train(pr, st, tc);
    EXPECT_EQ(res.state.theta(), st.theta());
    ASSERT_EQ(res.loss_history.size(), 1u);
}

TEST(Train, ZeroCouponBondLearnsAndGeneralizes) {
    auto m = hw_model(0.01, 0.01);
    auto g = TimeGrid::build(2.0, 4, {});
    auto cube = simulate_multiccy(m, g, 4096, 12);
    auto pr = make_problem(cube, g.size() - 1, 1.0, unit_at_end(cube));
    TrainConfig tc;
    tc.steps = 200;
    auto res = train(pr, init_state(pr, {}, 1), tc);
    ASSERT_EQ(res.loss_history.size(), 201u);
    EXPECT_LE(res.loss_history.back(), res.loss_history.front() / 100.0);

    auto fresh = simulate_multiccy(m, g, 4096, 77);
    auto hold = make_problem(fresh, g.size() - 1, 1.0, unit_at_end(fresh));
    auto r = forward_rollout(hold, res.state);
    EXPECT_LE(r.loss, 2.0 * res.loss_history.back());

    // out of sample the discounted value is a martingale started at V0
    for (std::size_t n = 0; n < g.size(); ++n) {
        std::vector<double> v(fresh.paths());
        for (std::size_t p = 0; p < fresh.paths(); ++p) v[p] = r.v_pre[p * g.size() + n] * fresh.discount(p, n);
        auto [mean, se] = mean_se(v);
        EXPECT_NEAR(mean, res.state.v0(), 3 * se + 1e-12) << n;
    }
}

TEST(Train, ForwardAndBackwardAgreeOnCashflowInstrument) {
    auto m = hw_model(0.01, 0.01);
    auto g = TimeGrid::build(2.0, 4, {});
    auto cube = simulate_multiccy(m, g, 4096, 31);
    std::vector<double> cf(cube.paths() * g.size(), 0.0);
    for (std::size_t p = 0; p < cube.paths(); ++p) {
        cf[p * g.size() + 4] = 0.02;
        cf[p * g.size() + 8] = 1.02;
    }
    auto pr = make_problem(cube, g.size() - 1, 1.0, cf);
    TrainConfig tc;
    tc.steps = 1000;
    auto fwd = train(pr, init_state(pr, {}, 1), tc);
    tc.style = LossStyle::Backward;
    auto bwd = train(pr, init_state(pr, {}, 1), tc);
    std::vector<double> pv(cube.paths());
    for (std::size_t p = 0; p < cube.paths(); ++p)
        pv[p] = 0.02 * cube.discount(p, 4) + 1.02 * cube.discount(p, 8);
    auto [mean, se] = mean_se(pv);
    EXPECT_NEAR(fwd.state.v0(), bwd.state.v0(), 3 * se);
    const double exact = 0.02 * std::exp(-0.01) + 1.02 * std::exp(-0.02);
    EXPECT_NEAR(fwd.state.v0(), exact, 3 * se);
}

TEST(Rollout, ExerciseLimitsAndIndicatorConsistency) {
    auto m = hw_model(0.02, 0.01);
    auto g = TimeGrid::build(2.0, 4, {});
    auto cube = simulate_multiccy(m, g, 200, 3);
    std::vector<std::size_t> ex{2, 4, 6};
    NetConfig nc;
    auto st = init_state(make_problem(cube, 8, 1.0, {}, ex, std::vector<double>(600, 0.0)), nc, 4);
    randomize(st, 5, 0.2);

    auto never = make_problem(cube, 8, 1.0, {}, ex, std::vector<double>(600, -1e9));
    auto r = backward_rollout(never, st);
    for (auto e : r.eta) EXPECT_EQ(e, 1);

    std::vector<double> u(600, 0.0);
    for (std::size_t p = 0; p < 200; ++p) u[p * 3] = 1e6;
    auto always = make_problem(cube, 8, 1.0, {}, ex, u);
    r = backward_rollout(always, st);
    for (std::size_t p = 0; p < 200; ++p) EXPECT_EQ(r.eta[p * 3], 0);

    std::vector<double> mixed(600);
    for (std::size_t i = 0; i < 600; ++i) mixed[i] = 0.05 * counter_normal(9, 0, i, 0);
    auto pr = make_problem(cube, 8, 1.0, {}, ex, mixed);
    r = backward_rollout(pr, st);
    for (std::size_t p = 0; p < 200; ++p)
        for (std::size_t m2 = 0; m2 < 3; ++m2) {
            const std::size_t n = ex[m2];
            const double post = r.v_post[p * g.size() + n], pre = r.v_pre[p * g.size() + n];
            EXPECT_EQ(r.eta[p * 3 + m2] == 0, mixed[p * 3 + m2] > post);
            EXPECT_NEAR(pre, std::max(post, mixed[p * 3 + m2]), 1e-15);
        }
}

TEST(Train, MiniBatchAndSharedWeightsRun) {
    auto m = hw_model(0.01, 0.01);
    auto g = TimeGrid::build(1.0, 12, {});
    auto cube = simulate_multiccy(m, g, 2048, 12);
    auto pr = make_problem(cube, g.size() - 1, 1.0, unit_at_end(cube));
    TrainConfig tc;
    tc.steps = 150;
    tc.batch_paths = 512;
    NetConfig nc;
    nc.share_weights = true;
    auto res = train(pr, init_state(pr, nc, 2), tc);
    EXPECT_EQ(res.state.network_count(), 1u);
    EXPECT_LT(res.loss_history.back(), 0.05 * res.loss_history.front());
}

TEST(Train, DivergenceCarriesHistory) {
    auto m = hw_model(0.01, 0.01);
    auto g = TimeGrid::build(1.0, 4, {});
    auto cube = simulate_multiccy(m, g, 64, 2);
    auto pr = make_problem(cube, g.size() - 1, 1.0, unit_at_end(cube));
    auto st = init_state(pr, {}, 1);
    TrainConfig tc;
    tc.steps = 50;
    tc.adam.lr = 1e300;
    try {
        train(pr, st, tc);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_FALSE(e.history().empty());
    }
}
