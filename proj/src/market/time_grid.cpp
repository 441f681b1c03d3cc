#include "xvann/market/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xvann/errors.hpp"

namespace xvann::market {

TimeGrid::TimeGrid(std::vector<double> dates) : dates_(std::move(dates)) {
    if (dates_.size() < 2) throw ScheduleError("time grid needs at least two dates");
    if (dates_.front() != 0.0) throw ScheduleError("time grid must start at 0");
    for (std::size_t i = 1; i < dates_.size(); ++i)
        if (!(dates_[i] > dates_[i - 1]))
            throw ScheduleError("time grid dates must be strictly increasing");
    flags_.assign(dates_.size(), 0);
}

TimeGrid TimeGrid::build(double horizon, int steps_per_year, const std::vector<double>& extra) {
    if (!(horizon > 0.0)) throw ScheduleError("time grid horizon must be positive");
    if (steps_per_year < 1) throw ScheduleError("time grid needs at least one step per year");
    std::vector<double> events;
    for (double e : extra) {
        if (e < -date_tolerance || e > horizon + date_tolerance) {
            std::ostringstream os;
            os << "event date " << e << " outside [0, " << horizon << "]";
            throw ScheduleError(os.str());
        }
        events.push_back(std::clamp(e, 0.0, horizon));
    }
    events.push_back(0.0);
    events.push_back(horizon);
    std::sort(events.begin(), events.end());
    std::vector<double> merged;
    for (double e : events)
        if (merged.empty() || e - merged.back() > date_tolerance) merged.push_back(e);

    const long n_regular = static_cast<long>(std::floor(horizon * steps_per_year + date_tolerance));
    std::vector<double> all = merged;
    for (long k = 1; k <= n_regular; ++k) {
        const double t = static_cast<double>(k) / steps_per_year;
        auto it = std::lower_bound(merged.begin(), merged.end(), t - date_tolerance);
        if (it != merged.end() && std::abs(*it - t) <= date_tolerance) continue;
        if (t < horizon) all.push_back(t);
    }
    std::sort(all.begin(), all.end());
    return TimeGrid(std::move(all));
}

std::size_t TimeGrid::index_of(double t) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), t - date_tolerance);
    if (it == dates_.end() || std::abs(*it - t) > date_tolerance) {
        std::ostringstream os;
        os << "date " << t << " is not on the simulation grid";
        throw ScheduleError(os.str());
    }
    return static_cast<std::size_t>(std::distance(dates_.begin(), it));
}

bool TimeGrid::contains(double t) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), t - date_tolerance);
    return it != dates_.end() && std::abs(*it - t) <= date_tolerance;
}

void TimeGrid::mark(double t, DateFlag flag) { flags_[index_of(t)] |= flag; }

std::vector<std::size_t> TimeGrid::indices_with(DateFlag flag) const {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < flags_.size(); ++n)
        if (flags_[n] & flag) out.push_back(n);
    return out;
}

}  // namespace xvann::market
