#pragma once

#include <cstdint>
#include <vector>

namespace xvann::market {

enum DateFlag : std::uint8_t {
    kCashflow = 1,
    kExercise = 2,
    kReset = 4,
    kCredit = 8,
};

class TimeGrid {
   public:
    static constexpr double date_tolerance = 1e-9;

    TimeGrid() = default;
    // Dates must start at 0 and be strictly increasing.
    explicit TimeGrid(std::vector<double> dates);

    // Uniform steps of 1/steps_per_year up to horizon, merged with extra dates.
    // Extra dates within date_tolerance of a regular date replace it.
    static TimeGrid build(double horizon, int steps_per_year, const std::vector<double>& extra);

    std::size_t size() const { return dates_.size(); }
    std::size_t steps() const { return dates_.size() - 1; }
    double operator[](std::size_t n) const { return dates_[n]; }
    double dt(std::size_t n) const { return dates_[n + 1] - dates_[n]; }
    const std::vector<double>& dates() const { return dates_; }

    // Index of the grid date equal to t; throws ScheduleError if t is off grid.
    std::size_t index_of(double t) const;
    bool contains(double t) const;

    void mark(double t, DateFlag flag);
    bool has(std::size_t n, DateFlag flag) const { return (flags_[n] & flag) != 0; }
    std::vector<std::size_t> indices_with(DateFlag flag) const;

   private:
    std::vector<double> dates_;
    std::vector<std::uint8_t> flags_;
};

}  // namespace xvann::market
