#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "xvann/instruments/bermudan.hpp"

namespace xvann::exposure {

// Recovery plus piecewise-constant hazard rates; hazards[i] applies up to
// pillars[i] (the first piece starts at 0). Beyond the last pillar the last
// rate is extended flat.
struct CreditCurve {
    double recovery = 0.4;
    std::vector<double> pillars;
    std::vector<double> hazards;

    static CreditCurve flat(double hazard, double recovery, double until = 1e9);
    void validate() const;
    double survival(double t) const;
    bool covers(double t) const { return !pillars.empty() && t <= pillars.back() + 1e-12; }
};

enum class Side { Pre, Post };
std::string to_string(Side s);

struct ExposureRow {
    double t = 0.0;
    std::size_t index = 0;  // grid date index
    Side side = Side::Post;
    double epe = 0.0, epe_se = 0.0, ene = 0.0, ene_se = 0.0;
};

struct ExposureProfile {
    std::vector<ExposureRow> rows;
    // Post-jump row at grid index n, or the pre row when only that exists.
    const ExposureRow& at(std::size_t index, Side side = Side::Post) const;
};

// eta[p * M + m] over exercise dates -> alive[p * dates + n] = prod of eta over
// exercise dates strictly before date n.
std::vector<std::uint8_t> cumulative_alive_indicator(std::span<const std::uint8_t> eta, std::size_t paths,
                                                      std::span<const std::size_t> exercise_index,
                                                      std::size_t dates);

// One date: v, alive and discount are per path. With physical settlement the
// exposed value after exercise is the underlying value; otherwise zero.
ExposureRow epe_ene(std::span<const double> v, std::span<const std::uint8_t> alive,
                    std::span<const double> discount, instruments::Settlement settlement =
                                                          instruments::Settlement::Cash,
                    std::span<const double> underlying = {});

// Surfaces are [p * dates + n]. The pre row is emitted for dates in pre_dates
// (exercise or cashflow dates), the post row for every credit date.
// alive_pre holds the indicator before the exercise decision of the date and
// alive_post after it.
struct SurfaceInputs {
    std::size_t paths = 0, dates = 0;
    std::span<const double> times;
    std::span<const double> v_pre, v_post;
    std::span<const std::uint8_t> alive_pre, alive_post;  // empty: always alive
    std::span<const double> discount;
    instruments::Settlement settlement = instruments::Settlement::Cash;
    std::span<const double> underlying;  // physical settlement only
    bool discounted = true;
};
ExposureProfile exposure_profile(const SurfaceInputs& in, std::span<const std::size_t> credit_dates,
                                 std::span<const std::size_t> pre_dates, int threads = 1);

struct CvaResult {
    double cva = 0.0, dva = 0.0;
    bool extrapolated = false;  // a credit curve was extended beyond its pillars
};

// Sum over buckets (T_{n-1}, T_n] of (1 - R) * exposure at the bucket
// midpoint * [Q(T_{n-1}) - Q(T_n)]; the midpoint exposure averages the
// post row at T_{n-1} and the pre row at T_n.
CvaResult cva_dva(const ExposureProfile& profile, const CreditCurve& cpty, const CreditCurve& own);

}  // namespace xvann::exposure
