#include "xvann/exposure/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xvann/errors.hpp"
#include "xvann/parallel.hpp"

namespace xvann::exposure {

namespace {

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double a : v) s += a;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

std::pair<double, double> mean_and_se(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double m = pairwise_sum(x) / n;
    if (x.size() < 2) return {m, 0.0};
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = (x[i] - m) * (x[i] - m);
    return {m, std::sqrt(pairwise_sum(d) / (n - 1.0) / n)};
}

}  // namespace

CreditCurve CreditCurve::flat(double hazard, double recovery, double until) {
    return {recovery, {until}, {hazard}};
}

void CreditCurve::validate() const {
    if (!(recovery >= 0.0 && recovery <= 1.0)) throw DomainError("recovery rate must lie in [0, 1]");
    if (pillars.empty() || pillars.size() != hazards.size())
        throw DomainError("credit curve needs one hazard rate per pillar");
    double prev = 0.0;
    for (std::size_t i = 0; i < pillars.size(); ++i) {
        if (!(pillars[i] > prev)) throw DomainError("credit pillars must be positive and increasing");
        if (!(hazards[i] >= 0.0)) throw DomainError("hazard rates must be non-negative");
        prev = pillars[i];
    }
}

double CreditCurve::survival(double t) const {
    double integral = 0.0, start = 0.0;
    for (std::size_t i = 0; i < pillars.size() && start < t; ++i) {
        const double end = i + 1 == pillars.size() ? t : std::min(t, pillars[i]);  // last rate runs on
        integral += hazards[i] * (end - start);
        start = end;
    }
    return std::exp(-integral);
}

std::string to_string(Side s) { return s == Side::Pre ? "pre" : "post"; }

const ExposureRow& ExposureProfile::at(std::size_t index, Side side) const {
    const ExposureRow* fallback = nullptr;
    for (const auto& r : rows) {
        if (r.index != index) continue;
        if (r.side == side) return r;
        fallback = &r;
    }
    if (!fallback) throw DomainError("no exposure row at the requested date");
    return *fallback;
}

std::vector<std::uint8_t> cumulative_alive_indicator(std::span<const std::uint8_t> eta, std::size_t paths,
                                                      std::span<const std::size_t> exercise_index,
                                                      std::size_t dates) {
    const std::size_t nm = exercise_index.size();
    if (eta.size() != paths * nm) throw DimensionError("exercise indicator has the wrong shape");
    for (std::size_t m = 0; m < nm; ++m)
        if (exercise_index[m] >= dates || (m > 0 && exercise_index[m] <= exercise_index[m - 1]))
            throw ScheduleError("exercise indices must be increasing grid indices");
    std::vector<std::uint8_t> alive(paths * dates, 1);
    for (std::size_t p = 0; p < paths; ++p) {
        std::uint8_t a = 1;
        std::size_t m = 0;
        for (std::size_t n = 0; n < dates; ++n) {
            alive[p * dates + n] = a;
            if (m < nm && exercise_index[m] == n) a = static_cast<std::uint8_t>(a & (eta[p * nm + m] ? 1 : 0)), ++m;
        }
    }
    return alive;
}

ExposureRow epe_ene(std::span<const double> v, std::span<const std::uint8_t> alive, std::span<const double> discount,
                    instruments::Settlement settlement, std::span<const double> underlying) {
    const std::size_t n = v.size();
    if (n == 0) throw DimensionError("no paths");
    if (!alive.empty() && alive.size() != n) throw DimensionError("alive indicator has the wrong length");
    if (discount.size() != n) throw DimensionError("discount factors have the wrong length");
    const bool physical = settlement == instruments::Settlement::Physical;
    if (physical && underlying.size() != n)
        throw ConfigError("physical settlement needs underlying values on every path");
    std::vector<double> pos(n), neg(n);
    for (std::size_t p = 0; p < n; ++p) {
        const bool live = alive.empty() || alive[p];
        const double x = live ? v[p] : (physical ? underlying[p] : 0.0);
        pos[p] = discount[p] * std::max(x, 0.0);
        neg[p] = discount[p] * std::min(x, 0.0);
    }
    ExposureRow r;
    std::tie(r.epe, r.epe_se) = mean_and_se(pos);
    std::tie(r.ene, r.ene_se) = mean_and_se(neg);
    return r;
}

ExposureProfile exposure_profile(const SurfaceInputs& in, std::span<const std::size_t> credit_dates,
                                 std::span<const std::size_t> pre_dates, int threads) {
    const std::size_t sz = in.paths * in.dates;
    if (in.times.size() != in.dates || in.v_pre.size() != sz || in.v_post.size() != sz || in.discount.size() != sz)
        throw DimensionError("exposure surfaces have inconsistent shapes");
    if ((!in.alive_pre.empty() && in.alive_pre.size() != sz) || (!in.alive_post.empty() && in.alive_post.size() != sz))
        throw DimensionError("alive indicators have the wrong shape");
    if (in.settlement == instruments::Settlement::Physical && in.underlying.size() != sz)
        throw ConfigError("physical settlement needs an underlying value surface");

    struct Job {
        std::size_t index;
        Side side;
    };
    std::vector<Job> jobs;
    for (std::size_t n : credit_dates) {
        if (n >= in.dates) throw ScheduleError("credit date outside the grid");
        if (std::find(pre_dates.begin(), pre_dates.end(), n) != pre_dates.end()) jobs.push_back({n, Side::Pre});
        jobs.push_back({n, Side::Post});
    }
    ExposureProfile out;
    out.rows.resize(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        const std::size_t n = jobs[j].index;
        const bool pre = jobs[j].side == Side::Pre;
        std::vector<double> v(in.paths), d(in.paths), u;
        std::vector<std::uint8_t> a;
        const auto& alive = pre ? in.alive_pre : in.alive_post;
        const auto& surf = pre ? in.v_pre : in.v_post;
        if (!alive.empty()) a.resize(in.paths);
        if (!in.underlying.empty()) u.resize(in.paths);
        for (std::size_t p = 0; p < in.paths; ++p) {
            v[p] = surf[p * in.dates + n];
            d[p] = in.discounted ? in.discount[p * in.dates + n] : 1.0;
            if (!a.empty()) a[p] = alive[p * in.dates + n];
            if (!u.empty()) u[p] = in.underlying[p * in.dates + n];
        }
        ExposureRow r = epe_ene(v, a, d, in.settlement, u);
        r.t = in.times[n];
        r.index = n;
        r.side = jobs[j].side;
        out.rows[j] = r;
    });
    return out;
}

CvaResult cva_dva(const ExposureProfile& profile, const CreditCurve& cpty, const CreditCurve& own) {
    cpty.validate();
    own.validate();
    // Collapse to (date, value at the left end of the bucket, value at the right end).
    struct Point {
        double t;
        double epe_pre, ene_pre, epe_post, ene_post;
    };
    std::vector<Point> pts;
    for (const auto& r : profile.rows) {
        if (pts.empty() || std::abs(pts.back().t - r.t) > 1e-12) {
            if (!pts.empty() && r.t < pts.back().t) throw ScheduleError("exposure rows must be in date order");
            pts.push_back({r.t, r.epe, r.ene, r.epe, r.ene});
        } else if (r.side == Side::Post) {
            pts.back().epe_post = r.epe;
            pts.back().ene_post = r.ene;
        } else {
            pts.back().epe_pre = r.epe;
            pts.back().ene_pre = r.ene;
        }
    }
    CvaResult res;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double t0 = pts[i - 1].t, t1 = pts[i].t;
        if (!cpty.covers(t1) || !own.covers(t1)) res.extrapolated = true;
        const double epe = 0.5 * (pts[i - 1].epe_post + pts[i].epe_pre);
        const double ene = 0.5 * (pts[i - 1].ene_post + pts[i].ene_pre);
        res.cva += (1.0 - cpty.recovery) * epe * (cpty.survival(t0) - cpty.survival(t1));
        res.dva += (1.0 - own.recovery) * ene * (own.survival(t0) - own.survival(t1));
    }
    return res;
}

}  // namespace xvann::exposure
