#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "xvann/analysis/analysis.hpp"
#include "xvann/rng.hpp"

using namespace xvann;
using namespace xvann::analysis;

namespace {
ScatterSet bach_data(double a, double c, double s, std::size_t n, double lo, double hi) {
    ScatterSet d;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        d.x.push_back(x);
        d.v.push_back(bachelier(x, a, c, s));
    }
    return d;
}
}  // namespace

TEST(Bachelier, FormulaLimits) {
    EXPECT_NEAR(bachelier(0.0, 2.0, 0.0, 0.01), 2.0 * 0.01 / std::sqrt(2.0 * M_PI), 1e-15);
    // large-x asymptote A (x - c)
    EXPECT_NEAR(bachelier(1.0, 50.0, 0.02, 0.01) - 50.0 * 0.98, 0.0, 1e-12);
    EXPECT_NEAR(bachelier(-1.0, 50.0, 0.02, 0.01), 0.0, 1e-12);
}

TEST(Bachelier, RecoversNoiseFreeParameters) {
    auto d = bach_data(50.0, 0.0, 0.01, 200, -0.05, 0.05);
    BachelierBounds b{0.0, 500.0, -0.1, 0.1, 1e-5, 0.1};
    auto r = bachelier_fit(d, b);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.params[0], 50.0, 50.0 * 1e-6);
    EXPECT_NEAR(r.params[1], 0.0, 0.01 * 1e-6);  // c = 0: relative to the scale s
    EXPECT_NEAR(r.params[2], 0.01, 0.01 * 1e-6);
    EXPECT_GT(r.r2, 1.0 - 1e-12);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
    // the fitted curve approaches A (x - c) far to the right
    EXPECT_NEAR(bachelier(1.0, r.params[0], r.params[1], r.params[2]) - r.params[0] * (1.0 - r.params[1]), 0.0, 1e-9);
}

TEST(Bachelier, HockeyStickLimit) {
    ScatterSet d;
    for (int i = 0; i < 101; ++i) {
        const double x = -0.05 + 0.001 * i;
        d.x.push_back(x);
        d.v.push_back(30.0 * std::max(x - 0.0123, 0.0));
    }
    auto r = bachelier_fit(d, BachelierBounds::defaults(d, 10.0));
    EXPECT_NEAR(r.params[0], 30.0, 0.3);
    EXPECT_NEAR(r.params[1], 0.0123, 0.0123 * 0.01);
    EXPECT_LE(r.params[2], 1e-3);
}

TEST(Bachelier, BoundsAndErrors) {
    auto d = bach_data(50.0, 0.0, 0.01, 200, -0.05, 0.05);
    BachelierBounds tight{0.0, 20.0, -0.1, 0.1, 1e-5, 0.1};  // true A outside
    auto r = bachelier_fit(d, tight);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_GE(r.params[i], r.lower[i]);
        EXPECT_LE(r.params[i], r.upper[i]);
    }
    EXPECT_LT(r.r2, 1.0);
    EXPECT_THROW(bachelier_fit(bach_data(1, 0, 0.01, 5, -1, 1), tight), FitError);
    BachelierBounds bad = tight;
    bad.s_lo = 0.0;
    EXPECT_THROW(bachelier_fit(d, bad), FitError);
}

TEST(Quadratic, HandAndDegenerateCases) {
    ScatterSet d;
    for (double s : {0.5, 1.0, 1.5}) {
        d.x.push_back(s);
        d.v.push_back(1e7 * (2 * s * s + 3 * s + 1));
    }
    auto r = quadratic_fit(d, 1e7);
    EXPECT_NEAR(r.params[0], 2.0, 1e-10);
    EXPECT_NEAR(r.params[1], 3.0, 1e-10);
    EXPECT_NEAR(r.params[2], 1.0, 1e-10);
    EXPECT_NEAR(r.ratio, 2.0 / 3.0, 1e-10);
    EXPECT_NEAR(r.rss, 0.0, 1e-20);

    ScatterSet lin;
    for (int i = 0; i < 30; ++i) {
        lin.x.push_back(0.7 + 0.01 * i);
        lin.v.push_back(4.0 - 2.0 * lin.x.back());
    }
    EXPECT_NEAR(quadratic_fit(lin).params[0], 0.0, 1e-12);

    ScatterSet two;
    two.x = {1.0, 1.0, 2.0, 2.0};
    two.v = {1.0, 2.0, 3.0, 4.0};
    EXPECT_THROW(quadratic_fit(two), FitError);
}

TEST(Quadratic, MatchesNormalEquations) {
    ScatterSet d;
    for (std::size_t i = 0; i < 500; ++i) {
        d.x.push_back(0.7 + 0.1 * counter_normal(2, 0, i, 0));
        d.v.push_back(1e7 * (0.3 * d.x.back() * d.x.back() - d.x.back() + 0.1) + 1e5 * counter_normal(2, 1, i, 0));
    }
    auto r = quadratic_fit(d, 1e7);
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d aty = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < d.size(); ++i) {
        Eigen::Vector3d row(d.x[i] * d.x[i], d.x[i], 1.0);
        ata += row * row.transpose();
        aty += row * d.v[i] / 1e7;
    }
    Eigen::Vector3d ref = ata.ldlt().solve(aty);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.params[static_cast<std::size_t>(k)], ref[k], 1e-10 * std::abs(ref[k]));
}

TEST(Quadratic, BootstrapInterval) {
    ScatterSet curved, flat;
    for (std::size_t i = 0; i < 400; ++i) {
        const double s = 0.6 + 0.3 * counter_uniform(5, 0, i, 0, 0);
        const double e = 0.01 * counter_normal(5, 1, i, 0);
        curved.x.push_back(s);
        curved.v.push_back(s * s + e);
        flat.x.push_back(s);
        flat.v.push_back(s + e);
    }
    auto ci = bootstrap_quadratic(curved, 1.0, 0.95, 400, 1);
    EXPECT_FALSE(ci.contains(0.0));
    EXPECT_TRUE(ci.contains(1.0));
    EXPECT_TRUE(bootstrap_quadratic(flat, 1.0, 0.95, 400, 1).contains(0.0));
}

TEST(Knn, TrivialCases) {
    ScatterSet d;
    for (std::size_t i = 0; i < 100; ++i) {
        d.x.push_back(counter_normal(7, 0, i, 0));
        d.v.push_back(std::sin(d.x.back()));
    }
    KnnConfig all{100, 11};
    auto p = knn_project(d, {}, all);
    double mean = 0.0;
    for (double v : d.v) mean += v;
    mean /= 100.0;
    for (double v : p.v) EXPECT_NEAR(v, mean, 1e-14);

    // no conditioning, k = 1, queries at the samples
    d.cond.clear();
    KnnConfig one{1, 11};
    auto q = knn_project(d, {}, one, d.x);
    for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(q.v[i], d.v[i]);

    KnnConfig bad{101, 11};
    EXPECT_THROW(knn_project(d, {}, bad), ProjectionError);
}

TEST(Knn, SyntheticSurfaceProjection) {
    ScatterSet d;
    d.cond.resize(2);
    for (std::size_t i = 0; i < 5000; ++i) {
        const double ls = -0.3 + 0.2 * counter_normal(8, 0, i, 0);
        const double x0 = 0.01 * counter_normal(8, 1, i, 0), x1 = 0.01 * counter_normal(8, 2, i, 0);
        d.x.push_back(ls);
        d.cond[0].push_back(x0);
        d.cond[1].push_back(x1);
        d.v.push_back(ls + 10.0 * x0);
    }
    std::vector<double> target{0.0, 0.0};
    KnnConfig cfg{20, 21};
    auto p = knn_project(d, target, cfg);
    for (std::size_t g = 0; g < p.size(); ++g) EXPECT_NEAR(p.v[g], p.x[g], 0.5);

    // relabeling invariance
    ScatterSet r = d;
    std::reverse(r.x.begin(), r.x.end());
    std::reverse(r.v.begin(), r.v.end());
    for (auto& c : r.cond) std::reverse(c.begin(), c.end());
    EXPECT_EQ(knn_project(r, target, cfg).v, p.v);

    KnnConfig pinned = cfg;
    pinned.pin_radius = 1e-9;
    std::vector<double> far{1.0, 1.0};
    EXPECT_THROW(knn_project(d, far, pinned), ProjectionError);
}
