#include "xvann/market/hull_white.hpp"

#include <algorithm>
#include <cmath>

#include "xvann/errors.hpp"

namespace xvann::market {

PiecewiseConstant::PiecewiseConstant(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (breaks_.empty() || breaks_.size() != values_.size())
        throw ConfigError("piecewise function: breaks and values must be non-empty and equal length");
    if (breaks_.front() != 0.0) throw ConfigError("piecewise function: first break must be 0");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
        if (!(breaks_[i] > breaks_[i - 1]))
            throw ConfigError("piecewise function: breaks must be strictly increasing");
}

double PiecewiseConstant::operator()(double t) const {
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    if (it == breaks_.begin()) return values_.front();
    return values_[static_cast<std::size_t>(std::distance(breaks_.begin(), it)) - 1];
}

double decay_factor(double k, double h) {
    if (k == 0.0) return h;
    return -std::expm1(-k * h) / k;
}

namespace {

// Segment end points of [s,t] refined at the breaks of the given functions.
std::vector<double> segment_points(double s, double t, const PiecewiseConstant& a,
                                   const PiecewiseConstant* b) {
    std::vector<double> pts{s};
    auto add = [&](const PiecewiseConstant& f) {
        for (double x : f.breaks())
            if (x > s && x < t) pts.push_back(x);
    };
    add(a);
    if (b) add(*b);
    pts.push_back(t);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace

double hw_variance_integral(const HullWhiteParams& p, double t) {
    if (t < 0.0) throw DomainError("hw_variance_integral: negative time");
    if (t == 0.0) return 0.0;
    const auto pts = segment_points(0.0, t, p.sigma, nullptr);
    double y = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double h = pts[i + 1] - pts[i];
        const double sig = p.sigma(pts[i]);
        y = y * std::exp(-2.0 * p.kappa * h) + sig * sig * decay_factor(2.0 * p.kappa, h);
    }
    return y;
}

double zero_bond(const YieldCurve& curve, double kappa, double t, double T, double x_t,
                 double y_t) {
    if (t < 0.0) throw DomainError("zero_bond: negative time");
    if (T < t) throw DomainError("zero_bond: maturity before valuation time");
    if (T == t) return 1.0;
    const double g = bond_g(kappa, T - t);
    const double fwd = curve.integrated_forward(T) - curve.integrated_forward(t);
    return std::exp(-fwd - x_t * g - 0.5 * y_t * g * g);
}

double zero_bond(const YieldCurve& curve, const HullWhiteParams& p, double t, double T,
                 double x_t) {
    return zero_bond(curve, p.kappa, t, T, x_t, hw_variance_integral(p, t));
}

OuTransition hw_transition(const HullWhiteParams& p, double s, double t,
                           const PiecewiseConstant* eta, double rho) {
    if (s < 0.0 || t < s) throw DomainError("hw_transition: invalid interval");
    const bool quanto = eta != nullptr && rho != 0.0;
    const auto pts = segment_points(s, t, p.sigma, quanto ? eta : nullptr);
    const double k = p.kappa;
    double y = hw_variance_integral(p, s);
    OuTransition tr;
    tr.decay = std::exp(-k * (t - s));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i];
        const double h = pts[i + 1] - a;
        const double sig = p.sigma(a);
        const double e1 = std::exp(-k * h);
        const double d1 = decay_factor(k, h);
        // int_a^b exp(-k(b-u)) y(u) du with y(u) evolving from y(a)
        double seg = y * e1 * d1 + 0.5 * sig * sig * d1 * d1;
        if (quanto) seg -= rho * sig * (*eta)(a) * d1;
        tr.mean_shift = tr.mean_shift * e1 + seg;
        const double dv = sig * sig * decay_factor(2.0 * k, h);
        tr.variance = tr.variance * e1 * e1 + dv;
        y = y * e1 * e1 + dv;
    }
    return tr;
}

}  // namespace xvann::market
