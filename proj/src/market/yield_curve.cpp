#include "xvann/market/yield_curve.hpp"

#include <algorithm>
#include <cmath>

#include "xvann/errors.hpp"

namespace xvann::market {

YieldCurve::YieldCurve(std::vector<double> pillars, std::vector<double> forwards)
    : pillars_(std::move(pillars)), forwards_(std::move(forwards)) {
    if (pillars_.empty() || pillars_.size() != forwards_.size())
        throw ConfigError("yield curve: pillars and forwards must be non-empty and equal length");
    if (pillars_.front() != 0.0) throw ConfigError("yield curve: first pillar must be 0");
    for (std::size_t i = 1; i < pillars_.size(); ++i)
        if (!(pillars_[i] > pillars_[i - 1]))
            throw ConfigError("yield curve: pillars must be strictly increasing");
    for (double f : forwards_)
        if (!std::isfinite(f)) throw ConfigError("yield curve: non-finite forward");
    cumulative_.resize(pillars_.size());
    cumulative_[0] = 0.0;
    for (std::size_t i = 1; i < pillars_.size(); ++i)
        cumulative_[i] = cumulative_[i - 1] + forwards_[i - 1] * (pillars_[i] - pillars_[i - 1]);
}

static std::size_t segment_of(const std::vector<double>& pillars, double t) {
    auto it = std::upper_bound(pillars.begin(), pillars.end(), t);
    return static_cast<std::size_t>(std::distance(pillars.begin(), it)) - 1;
}

double YieldCurve::forward(double t) const {
    if (t < 0.0) throw DomainError("yield curve: negative time");
    return forwards_[segment_of(pillars_, t)];
}

double YieldCurve::integrated_forward(double t) const {
    if (t < 0.0) throw DomainError("yield curve: negative time");
    const std::size_t i = segment_of(pillars_, t);
    return cumulative_[i] + forwards_[i] * (t - pillars_[i]);
}

double YieldCurve::discount(double t) const { return std::exp(-integrated_forward(t)); }

}  // namespace xvann::market
