#include "xvann/market/model.hpp"

#include <algorithm>
#include <string>

#include "xvann/errors.hpp"

namespace xvann::market {

namespace {

void check_vol(const PiecewiseConstant& f, const std::string& what) {
    for (double v : f.values())
        if (!(v >= 0.0)) throw ConfigError(what + " must be non-negative");
}

void check_currency(const CurrencyModel& c) {
    if (!(c.hw.kappa > 0.0)) throw ConfigError(c.name + ": mean reversion must be positive");
    check_vol(c.hw.sigma, c.name + " rate volatility");
}

}  // namespace

void MarketModel::validate() const {
    check_currency(domestic);
    if (fx.size() != foreign.size())
        throw ConfigError("each foreign currency needs exactly one FX model");
    for (const auto& c : foreign) check_currency(c);
    for (const auto& f : fx) {
        if (!(f.spot > 0.0)) throw ConfigError("FX spot must be positive");
        check_vol(f.eta, "FX volatility");
    }
    if (static_cast<std::size_t>(corr.dim()) != n_factors())
        throw CorrelationError("correlation matrix dimension " + std::to_string(corr.dim()) +
                               " does not match " + std::to_string(n_factors()) + " factors");
}

std::vector<double> MarketModel::breakpoints() const {
    std::vector<double> out;
    auto add = [&](const PiecewiseConstant& f) {
        for (double b : f.breaks())
            if (b > 0.0) out.push_back(b);
    };
    add(domestic.hw.sigma);
    for (const auto& c : foreign) add(c.hw.sigma);
    for (const auto& f : fx) add(f.eta);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace xvann::market
