#pragma once

#include <vector>

namespace xvann::market {

// Initial curve given by piecewise-constant instantaneous forwards.
// forwards[i] applies on [pillars[i], pillars[i+1]); the last value extends
// to infinity.
class YieldCurve {
   public:
    YieldCurve(std::vector<double> pillars, std::vector<double> forwards);

    static YieldCurve flat(double f) { return YieldCurve({0.0}, {f}); }

    double forward(double t) const;
    // int_0^t f(0,u) du, exact for the piecewise-constant forwards
    double integrated_forward(double t) const;
    double discount(double t) const;

    const std::vector<double>& pillars() const { return pillars_; }
    const std::vector<double>& forwards() const { return forwards_; }

   private:
    std::vector<double> pillars_;
    std::vector<double> forwards_;
    std::vector<double> cumulative_;  // integrated forward at each pillar
};

}  // namespace xvann::market
