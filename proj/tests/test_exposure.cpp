#include <gtest/gtest.h>

#include <cmath>

#include "xvann/errors.hpp"
#include "xvann/exposure/exposure.hpp"
#include "xvann/rng.hpp"

using namespace xvann;
using namespace xvann::exposure;
using instruments::Settlement;

TEST(Alive, CumulativeIndicator) {
    std::vector<std::size_t> ex{1, 2, 3};
    std::vector<std::uint8_t> ones(3, 1);
    for (auto a : cumulative_alive_indicator(ones, 1, ex, 5)) EXPECT_EQ(a, 1);

    std::vector<std::uint8_t> eta{1, 0, 1};
    auto a = cumulative_alive_indicator(eta, 1, ex, 5);
    EXPECT_EQ(std::vector<std::uint8_t>(a.begin() + 1, a.end()), (std::vector<std::uint8_t>{1, 1, 0, 0}));

    std::vector<std::uint8_t> first{0, 1, 1, 1, 1, 1};  // path 0 exercises at the first date
    a = cumulative_alive_indicator(first, 2, ex, 5);
    EXPECT_EQ(a[1], 1);
    for (std::size_t n = 2; n < 5; ++n) {
        EXPECT_EQ(a[n], 0);
        EXPECT_EQ(a[5 + n], 1);
    }
    EXPECT_THROW(cumulative_alive_indicator(eta, 2, ex, 5), DimensionError);
    std::vector<std::size_t> bad{2, 1, 3};
    EXPECT_THROW(cumulative_alive_indicator(eta, 1, bad, 5), ScheduleError);
}

TEST(EpeEne, HandEvaluation) {
    std::vector<double> v{1, -2, 3}, d(3, 1.0);
    std::vector<std::uint8_t> a{1, 1, 0};
    auto r = epe_ene(v, a, d);
    EXPECT_DOUBLE_EQ(r.epe, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.ene, -2.0 / 3.0);
    EXPECT_NEAR(r.epe_se, std::sqrt((2.0 * 1.0 / 9 + 4.0 / 9) / 2 / 3), 1e-15);

    std::vector<double> longopt{0.5, 0.0, 2.0};
    r = epe_ene(longopt, {}, d);
    EXPECT_EQ(r.ene, 0.0);
    EXPECT_NEAR(r.epe, 2.5 / 3, 1e-15);

    std::vector<std::uint8_t> dead(3, 0);
    r = epe_ene(v, dead, d);
    EXPECT_EQ(r.epe, 0.0);
    EXPECT_EQ(r.ene, 0.0);
}

TEST(EpeEne, PhysicalSettlementUsesUnderlying) {
    std::vector<double> v{1, -2, 3}, d{1.0, 0.5, 0.25}, u{0, 0, -4};
    std::vector<std::uint8_t> a{1, 1, 0};
    EXPECT_THROW(epe_ene(v, a, d, Settlement::Physical), ConfigError);
    auto r = epe_ene(v, a, d, Settlement::Physical, u);
    EXPECT_DOUBLE_EQ(r.epe, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.ene, (-1.0 - 1.0) / 3.0);
}

TEST(EpeEne, SplitAndMonotonicityProperties) {
    const std::size_t n = 1000;
    std::vector<double> v(n), d(n);
    std::vector<std::uint8_t> a(n), fewer(n);
    for (std::size_t p = 0; p < n; ++p) {
        v[p] = counter_normal(3, 0, p, 0);
        d[p] = 0.9 + 0.1 * counter_uniform(3, 1, p, 0, 0);
        a[p] = counter_uniform(3, 2, p, 0, 0) < 0.7;
        fewer[p] = a[p] && counter_uniform(3, 3, p, 0, 0) < 0.5;
    }
    auto r = epe_ene(v, a, d);
    double mean = 0.0;
    for (std::size_t p = 0; p < n; ++p) mean += a[p] * d[p] * v[p];
    EXPECT_NEAR(r.epe + r.ene, mean / n, 1e-14);
    EXPECT_GE(r.epe, 0.0);
    EXPECT_LE(r.ene, 0.0);
    auto s = epe_ene(v, fewer, d);
    EXPECT_LE(s.epe, r.epe);
    EXPECT_GE(s.ene, r.ene);
}

TEST(Profile, PreRowsOnlyOnJumpDates) {
    const std::size_t paths = 4, dates = 3;
    std::vector<double> t{0.0, 0.5, 1.0}, pre(12), post(12), disc(12, 1.0);
    for (std::size_t i = 0; i < 12; ++i) {
        pre[i] = static_cast<double>(i) - 5.0;
        post[i] = pre[i] - 1.0;
    }
    SurfaceInputs in;
    in.paths = paths;
    in.dates = dates;
    in.times = t;
    in.v_pre = pre;
    in.v_post = post;
    in.discount = disc;
    std::vector<std::size_t> credit{0, 1, 2}, jumps{1};
    auto prof = exposure_profile(in, credit, jumps);
    ASSERT_EQ(prof.rows.size(), 4u);
    EXPECT_EQ(prof.rows[1].side, Side::Pre);
    EXPECT_EQ(prof.rows[2].side, Side::Post);
    EXPECT_NEAR(prof.at(1, Side::Pre).epe - prof.at(1, Side::Post).epe +
                    prof.at(1, Side::Pre).ene - prof.at(1, Side::Post).ene,
                1.0, 1e-14);
    std::vector<std::size_t> off{5};
    EXPECT_THROW(exposure_profile(in, off, jumps), ScheduleError);
}

namespace {
ExposureProfile flat_profile(double epe, double ene, std::size_t buckets, double horizon) {
    ExposureProfile p;
    for (std::size_t i = 0; i <= buckets; ++i) {
        ExposureRow r;
        r.t = horizon * static_cast<double>(i) / static_cast<double>(buckets);
        r.index = i;
        r.epe = epe;
        r.ene = ene;
        p.rows.push_back(r);
    }
    return p;
}
}  // namespace

TEST(Cva, HandIntegral) {
    auto prof = flat_profile(1.0, -1.0, 12, 1.0);
    const double lam = -std::log(0.9);
    auto c = CreditCurve::flat(lam, 0.4, 5.0);
    auto r = cva_dva(prof, c, c);
    EXPECT_NEAR(r.cva, 0.06, 1e-14);
    EXPECT_NEAR(r.dva, -0.06, 1e-14);
    EXPECT_FALSE(r.extrapolated);

    EXPECT_EQ(cva_dva(prof, CreditCurve::flat(0.0, 0.4), CreditCurve::flat(0.0, 0.4)).cva, 0.0);
    EXPECT_EQ(cva_dva(prof, CreditCurve::flat(0.2, 1.0), CreditCurve::flat(0.2, 1.0)).cva, 0.0);
}

TEST(Cva, LinearityAndExtrapolationFlag) {
    CreditCurve c{0.3, {1.0, 2.0}, {0.02, 0.05}};
    auto a = cva_dva(flat_profile(2.0, 0.0, 8, 2.0), c, c);
    auto b = cva_dva(flat_profile(6.0, 0.0, 8, 2.0), c, c);
    EXPECT_NEAR(b.cva, 3.0 * a.cva, 1e-14);
    CreditCurve c2 = c;
    c2.recovery = 0.65;
    EXPECT_NEAR(cva_dva(flat_profile(2.0, 0.0, 8, 2.0), c2, c2).cva, a.cva * 0.35 / 0.7, 1e-14);
    EXPECT_NEAR(a.cva, 0.7 * 2.0 * (1.0 - std::exp(-0.02 - 0.05)), 1e-14);
    EXPECT_TRUE(cva_dva(flat_profile(1.0, 0.0, 8, 3.0), c, c).extrapolated);
    EXPECT_NEAR(c.survival(3.0), std::exp(-0.02 - 0.05 * 2.0), 1e-15);
}

TEST(Cva, MidpointUsesJumpSides) {
    ExposureProfile p;
    p.rows.push_back({0.0, 0, Side::Post, 1.0, 0, 0, 0});
    p.rows.push_back({1.0, 1, Side::Pre, 3.0, 0, 0, 0});
    p.rows.push_back({1.0, 1, Side::Post, 0.0, 0, 0, 0});
    p.rows.push_back({2.0, 2, Side::Post, 0.0, 0, 0, 0});
    auto c = CreditCurve::flat(0.1, 0.0);
    auto r = cva_dva(p, c, c);
    EXPECT_NEAR(r.cva, 2.0 * (1.0 - std::exp(-0.1)), 1e-14);
}

TEST(Cva, CurveValidation) {
    EXPECT_THROW((CreditCurve{1.5, {1.0}, {0.1}}.validate()), DomainError);
    EXPECT_THROW((CreditCurve{0.4, {1.0}, {-0.1}}.validate()), DomainError);
    EXPECT_THROW((CreditCurve{0.4, {1.0, 0.5}, {0.1, 0.1}}.validate()), DomainError);
}
