#pragma once

#include <string>
#include <vector>

#include "xvann/market/correlation.hpp"
#include "xvann/market/hull_white.hpp"
#include "xvann/market/yield_curve.hpp"

namespace xvann::market {

struct CurrencyModel {
    std::string name;
    YieldCurve curve = YieldCurve::flat(0.0);
    HullWhiteParams hw;
};

// Spot quoted as domestic units per foreign unit.
struct FxModel {
    double spot = 1.0;
    PiecewiseConstant eta;
};

// Domestic currency plus N foreign currencies. Factors are ordered
// x_0, x_1..x_N, ln S_1..ln S_N and the correlation matrix follows that order.
struct MarketModel {
    CurrencyModel domestic;
    std::vector<CurrencyModel> foreign;
    std::vector<FxModel> fx;
    CorrelationMatrix corr;

    std::size_t n_foreign() const { return foreign.size(); }
    std::size_t n_factors() const { return 1 + 2 * foreign.size(); }
    std::size_t fx_index(std::size_t i) const { return 1 + foreign.size() + i; }

    void validate() const;
    // All volatility breakpoints; the simulation grid should contain them.
    std::vector<double> breakpoints() const;
};

}  // namespace xvann::market
