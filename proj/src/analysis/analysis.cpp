#include "xvann/analysis/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "xvann/parallel.hpp"
#include "xvann/rng.hpp"

namespace xvann::analysis {

void ScatterSet::validate() const {
    if (x.size() != v.size()) throw DimensionError("scatter abscissae and values differ in length");
    for (const auto& c : cond)
        if (c.size() != x.size()) throw DimensionError("conditioning coordinates differ in length");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(v[i])) throw DomainError("scatter contains non-finite entries");
}

std::string FitReport::describe() const {
    std::ostringstream os;
    os.precision(10);
    for (std::size_t i = 0; i < params.size(); ++i) {
        os << names[i] << " = " << params[i];
        if (i < lower.size()) os << "  bounds [" << lower[i] << ", " << upper[i] << "]";
        os << "\n";
    }
    os << "rss = " << rss << "\nr2 = " << r2 << "\nconverged = " << (converged ? "true" : "false")
       << "\niterations = " << iterations << "\n";
    return os.str();
}

namespace {

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double total_ss(const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m += a;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double a : v) s += (a - m) * (a - m);
    return s;
}

struct Bach {
    const ScatterSet& d;

    double rss(const Eigen::Vector3d& p) const {
        double s = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double r = bachelier(d.x[i], p[0], p[1], p[2]) - d.v[i];
            s += r * r;
        }
        return s;
    }

    // residuals and Jacobian in (A, c, s)
    void linearize(const Eigen::Vector3d& p, Eigen::VectorXd& r, Eigen::MatrixXd& j) const {
        const auto n = static_cast<Eigen::Index>(d.size());
        r.resize(n);
        j.resize(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = d.x[static_cast<std::size_t>(i)] - p[1];
            const double z = u / p[2];
            const double cdf = norm_cdf(z), pdf = norm_pdf(z);
            const double f = u * cdf + p[2] * pdf;
            r[i] = p[0] * f - d.v[static_cast<std::size_t>(i)];
            j(i, 0) = f;
            j(i, 1) = -p[0] * cdf;
            j(i, 2) = p[0] * pdf;
        }
    }
};

struct LmResult {
    Eigen::Vector3d p;
    double rss;
    bool converged;
    std::size_t iterations;
    std::vector<double> trace;
};

LmResult levenberg_marquardt(const Bach& f, Eigen::Vector3d p, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    LmResult out{p, f.rss(p), false, 0, {}};
    out.trace.push_back(out.rss);
    double lambda = 1e-3;
    Eigen::VectorXd r;
    Eigen::MatrixXd j;
    for (std::size_t it = 0; it < 500; ++it) {
        f.linearize(out.p, r, j);
        const Eigen::Matrix3d jtj = j.transpose() * j;
        const Eigen::Vector3d g = j.transpose() * r;
        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::Matrix3d a = jtj;
            for (int k = 0; k < 3; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-300);
            Eigen::Vector3d step = a.ldlt().solve(-g);
            Eigen::Vector3d cand = (out.p + step).cwiseMax(lo).cwiseMin(hi);
            const double c = f.rss(cand);
            if (std::isfinite(c) && c <= out.rss) {
                const double gain = out.rss - c;
                const double moved = (cand - out.p).cwiseAbs().cwiseQuotient(out.p.cwiseAbs().cwiseMax(1e-12)).maxCoeff();
                out.p = cand;
                out.rss = c;
                out.trace.push_back(c);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (gain <= 1e-15 * (c + 1e-300) || moved < 1e-12) out.converged = true;
                break;
            }
            lambda *= 4.0;
        }
        out.iterations = it + 1;
        if (!accepted) {
            // no descent direction left: stationary within the box
            out.converged = true;
            break;
        }
        if (out.converged) break;
    }
    return out;
}

}  // namespace

double bachelier(double x, double a, double c, double s) {
    const double z = (x - c) / s;
    return a * ((x - c) * norm_cdf(z) + s * norm_pdf(z));
}

BachelierBounds BachelierBounds::defaults(const ScatterSet& data, double notional) {
    if (data.size() == 0) throw FitError("no data for the fit bounds");
    const auto [mn, mx] = std::minmax_element(data.x.begin(), data.x.end());
    const double w = std::max(*mx - *mn, 1e-12);
    return {0.0, 10.0 * notional, *mn - w, *mx + w, 1e-5, 0.1};
}

void BachelierBounds::validate() const {
    if (!(a_lo <= a_hi && c_lo <= c_hi && s_lo <= s_hi)) throw FitError("fit bounds are inverted");
    if (!(s_lo > 0.0)) throw FitError("lower bound of s must be positive");
}

FitReport bachelier_fit(const ScatterSet& data, const BachelierBounds& b) {
    data.validate();
    b.validate();
    if (data.size() < 10) throw FitError("Bachelier fit needs at least 10 points");
    const Eigen::Vector3d lo(b.a_lo, b.c_lo, b.s_lo), hi(b.a_hi, b.c_hi, b.s_hi);
    Bach f{data};

    // start grid: linear in A and c, logarithmic in s, interior points only
    std::vector<Eigen::Vector3d> starts;
    constexpr int kGrid = 5;
    for (int i = 0; i < kGrid; ++i)
        for (int k = 0; k < kGrid; ++k)
            for (int l = 0; l < kGrid; ++l) {
                const double u = (i + 0.5) / kGrid, w = (k + 0.5) / kGrid, z = (l + 0.5) / kGrid;
                starts.emplace_back(b.a_lo + u * (b.a_hi - b.a_lo), b.c_lo + w * (b.c_hi - b.c_lo),
                                    b.s_lo * std::pow(b.s_hi / b.s_lo, z));
            }
    std::vector<LmResult> runs(starts.size());
    parallel_for(starts.size(), 1, [&](std::size_t i) { runs[i] = levenberg_marquardt(f, starts[i], lo, hi); });

    const LmResult* best = nullptr;
    for (const auto& r : runs)
        if (r.converged && std::isfinite(r.rss) && (!best || r.rss < best->rss)) best = &r;
    const bool any = best != nullptr;
    if (!any)
        for (const auto& r : runs)
            if (!best || r.rss < best->rss) best = &r;

    FitReport rep;
    rep.names = {"A", "c", "s"};
    rep.params = {best->p[0], best->p[1], best->p[2]};
    rep.lower = {lo[0], lo[1], lo[2]};
    rep.upper = {hi[0], hi[1], hi[2]};
    rep.rss = best->rss;
    const double tss = total_ss(data.v);
    rep.r2 = tss > 0.0 ? 1.0 - rep.rss / tss : (rep.rss == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity());
    rep.converged = any;
    rep.iterations = best->iterations;
    rep.trace = best->trace;
    if (!any) throw FitFailure("no start of the Bachelier fit converged", rep);
    return rep;
}

FitReport quadratic_fit(const ScatterSet& data, double scale) {
    data.validate();
    if (!(scale > 0.0)) throw FitError("fit scale must be positive");
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd a(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double s = data.x[static_cast<std::size_t>(i)];
        a(i, 0) = s * s;
        a(i, 1) = s;
        a(i, 2) = 1.0;
        y[i] = data.v[static_cast<std::size_t>(i)] / scale;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (n < 3 || qr.rank() < 3) throw FitError("quadratic fit design matrix is rank deficient");
    const Eigen::Vector3d coef = qr.solve(y);
    FitReport rep;
    rep.names = {"a", "b", "c"};
    rep.params = {coef[0], coef[1], coef[2]};
    rep.rss = (a * coef - y).squaredNorm();
    std::vector<double> scaled(data.v.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = data.v[i] / scale;
    const double tss = total_ss(scaled);
    rep.r2 = tss > 0.0 ? 1.0 - rep.rss / tss : 1.0;
    rep.converged = true;
    rep.ratio = coef[1] != 0.0 ? coef[0] / coef[1] : std::numeric_limits<double>::infinity();
    return rep;
}

namespace {

Interval percentile_interval(std::vector<double>& a, std::size_t resamples, double level) {
    if (a.size() < resamples / 2) throw FitError("too many degenerate bootstrap resamples");
    std::sort(a.begin(), a.end());
    auto pick = [&](double q) {
        const double pos = q * static_cast<double>(a.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double w = pos - static_cast<double>(i);
        return i + 1 < a.size() ? a[i] * (1.0 - w) + a[i + 1] * w : a[i];
    };
    return {pick(0.5 * (1.0 - level)), pick(0.5 * (1.0 + level))};
}

}  // namespace

Interval bootstrap_quadratic(const ScatterSet& data, double scale, double level, std::size_t resamples,
                             std::uint64_t seed) {
    if (resamples < 10 || !(level > 0.0 && level < 1.0)) throw FitError("invalid bootstrap settings");
    const std::size_t n = data.size();
    std::vector<double> a;
    a.reserve(resamples);
    ScatterSet s;
    s.x.resize(n);
    s.v.resize(n);
    for (std::size_t b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto j = std::min(n - 1, static_cast<std::size_t>(counter_uniform(seed, 0xb005, b, i, 0) *
                                                                     static_cast<double>(n)));
            s.x[i] = data.x[j];
            s.v[i] = data.v[j];
        }
        try {
            a.push_back(quadratic_fit(s, scale).params[0]);
        } catch (const FitError&) {
            // degenerate resample: skipped
        }
    }
    return percentile_interval(a, resamples, level);
}

ScatterSet knn_project(const ScatterSet& data, std::span<const double> target, const KnnConfig& cfg,
                       std::span<const double> queries, int threads) {
    data.validate();
    const std::size_t n = data.size(), nc = data.cond.size();
    if (target.size() != nc) throw DimensionError("target needs one value per conditioning coordinate");
    if (cfg.k < 1 || cfg.k > n) throw ProjectionError("k must lie between 1 and the sample size");

    auto zscore = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double a : v) m += a;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double a : v) s += (a - m) * (a - m);
        s = std::sqrt(s / static_cast<double>(v.size()));
        return std::pair{m, s > 1e-300 ? s : 1.0};
    };
    const double sx = zscore(data.x).second;
    std::vector<std::pair<double, double>> zc(nc);
    for (std::size_t j = 0; j < nc; ++j) zc[j] = zscore(data.cond[j]);

    // conditioning part of the distance and the pinned candidate set
    std::vector<std::size_t> cand;
    std::vector<double> cdist(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < nc; ++j) {
            const double z = (data.cond[j][i] - target[j]) / zc[j].second;
            cdist[i] += z * z;
        }
        if (cdist[i] <= cfg.pin_radius * cfg.pin_radius) cand.push_back(i);
    }
    if (cand.empty()) throw ProjectionError("no samples near the projection target");
    const std::size_t k = std::min(cfg.k, cand.size());

    std::vector<double> q(queries.begin(), queries.end());
    if (q.empty()) {
        if (cfg.grid_points < 2) throw ProjectionError("projection grid needs at least two points");
        double lo = data.x[cand[0]], hi = lo;
        for (std::size_t i : cand) lo = std::min(lo, data.x[i]), hi = std::max(hi, data.x[i]);
        for (std::size_t g = 0; g < cfg.grid_points; ++g)
            q.push_back(lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(cfg.grid_points - 1));
    }
    ScatterSet out;
    out.x = q;
    out.v.assign(q.size(), 0.0);
    parallel_for(q.size(), threads, [&](std::size_t g) {
        // ties are broken by value so the result does not depend on sample order
        std::vector<std::pair<double, double>> d(cand.size());
        for (std::size_t c = 0; c < cand.size(); ++c) {
            const std::size_t i = cand[c];
            const double z = (data.x[i] - q[g]) / sx;
            d[c] = {cdist[i] + z * z, data.v[i]};
        }
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
        std::vector<double> vals(k);
        for (std::size_t c = 0; c < k; ++c) vals[c] = d[c].second;
        std::sort(vals.begin(), vals.end());  // order-independent sum
        double s = 0.0;
        for (double a : vals) s += a;
        out.v[g] = s / static_cast<double>(k);
    });
    return out;
}

Interval bootstrap_projected_quadratic(const ScatterSet& data, std::span<const double> target, const KnnConfig& cfg,
                                       std::span<const double> queries, double scale, double level,
                                       std::size_t resamples, std::uint64_t seed, int threads) {
    if (resamples < 10 || !(level > 0.0 && level < 1.0)) throw FitError("invalid bootstrap settings");
    if (queries.size() < 3) throw FitError("bootstrap needs at least three query points");
    const std::size_t n = data.size();
    ScatterSet s;
    s.x.resize(n);
    s.v.resize(n);
    s.cond.assign(data.cond.size(), std::vector<double>(n));
    std::vector<double> a;
    a.reserve(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto j = std::min(n - 1, static_cast<std::size_t>(counter_uniform(seed, 0xb006, b, i, 0) *
                                                                     static_cast<double>(n)));
            s.x[i] = data.x[j];
            s.v[i] = data.v[j];
            for (std::size_t c = 0; c < data.cond.size(); ++c) s.cond[c][i] = data.cond[c][j];
        }
        try {
            a.push_back(quadratic_fit(knn_project(s, target, cfg, queries, threads), scale).params[0]);
        } catch (const FitError&) {
            // degenerate resample: skipped
        }
    }
    return percentile_interval(a, resamples, level);
}

}  // namespace xvann::analysis
