#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xvann/errors.hpp"

namespace xvann::analysis {

// Points (x, v) with optional conditioning coordinates cond[j][i].
struct ScatterSet {
    std::vector<double> x, v;
    std::vector<std::vector<double>> cond;

    std::size_t size() const { return x.size(); }
    void validate() const;
};

struct FitReport {
    std::vector<std::string> names;
    std::vector<double> params, lower, upper;
    double rss = 0.0, r2 = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<double> trace;  // objective after each accepted iteration of the winning start
    double ratio = 0.0;         // quadratic fit: a / b

    std::string describe() const;
};

class FitFailure : public FitError {
   public:
    FitFailure(const std::string& what, FitReport best) : FitError(what), best_(std::move(best)) {}
    const FitReport& best() const { return best_; }

   private:
    FitReport best_;
};

// A [(x - c) Phi((x - c)/s) + s phi((x - c)/s)]
double bachelier(double x, double a, double c, double s);

struct BachelierBounds {
    double a_lo = 0.0, a_hi = 1.0;
    double c_lo = -1.0, c_hi = 1.0;
    double s_lo = 1e-5, s_hi = 0.1;

    // A in [0, 10 notional], c within the observed x range widened by its
    // width on each side, s in [1e-5, 0.1].
    static BachelierBounds defaults(const ScatterSet& data, double notional);
    void validate() const;
};

// Bounded least squares: a 5 x 5 x 5 grid of starts, each refined by
// Levenberg-Marquardt with projection onto the box. Throws FitFailure when no
// start converges.
FitReport bachelier_fit(const ScatterSet& data, const BachelierBounds& bounds);

// Least squares of v / scale on (x^2, x, 1).
FitReport quadratic_fit(const ScatterSet& data, double scale = 1.0);

struct Interval {
    double lo = 0.0, hi = 0.0;
    bool contains(double a) const { return lo <= a && a <= hi; }
};

// Percentile bootstrap interval for the quadratic coefficient.
Interval bootstrap_quadratic(const ScatterSet& data, double scale, double level, std::size_t resamples,
                             std::uint64_t seed);

struct KnnConfig {
    std::size_t k = 50;
    std::size_t grid_points = 41;
    // Samples whose standardized conditioning distance to the target exceeds
    // this are excluded; infinite by default.
    double pin_radius = 1e300;
};

// Average of v over the k nearest samples to (q, target) in z-scored
// coordinates, for each query abscissa q. Empty queries use a uniform grid
// over the sample range.
ScatterSet knn_project(const ScatterSet& data, std::span<const double> target, const KnnConfig& cfg,
                       std::span<const double> queries = {}, int threads = 1);

// Percentile interval for the quadratic coefficient of a projected curve:
// samples are redrawn with replacement, projected at the same queries and refit.
Interval bootstrap_projected_quadratic(const ScatterSet& data, std::span<const double> target, const KnnConfig& cfg,
                                       std::span<const double> queries, double scale, double level,
                                       std::size_t resamples, std::uint64_t seed, int threads = 1);

}  // namespace xvann::analysis
