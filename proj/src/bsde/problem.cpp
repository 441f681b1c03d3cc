#include "xvann/bsde/problem.hpp"

#include <cmath>

#include "xvann/errors.hpp"

namespace xvann::bsde {

Problem make_problem(const market::PathCube& cube, std::size_t horizon, double notional,
                     std::vector<double> cashflow, std::vector<std::size_t> exercise_index,
                     std::vector<double> exercise) {
    if (horizon == 0 || horizon >= cube.dates()) throw DimensionError("rollout horizon outside the grid");
    if (!(notional > 0.0)) throw ConfigError("notional must be positive");
    if (!cashflow.empty() && cashflow.size() != cube.paths() * cube.dates())
        throw DimensionError("cashflow array does not match the path cube");
    if (exercise.size() != cube.paths() * exercise_index.size())
        throw ScheduleError("exercise values missing for some exercise dates");
    for (std::size_t m = 0; m < exercise_index.size(); ++m) {
        if (exercise_index[m] > horizon) throw ScheduleError("exercise date beyond the rollout horizon");
        if (m > 0 && exercise_index[m] <= exercise_index[m - 1])
            throw ScheduleError("exercise dates must be increasing");
    }
    Problem pr;
    pr.cube = &cube;
    pr.horizon = horizon;
    pr.notional = notional;
    pr.cashflow = std::move(cashflow);
    pr.exercise_index = std::move(exercise_index);
    pr.exercise = std::move(exercise);
    for (double& c : pr.cashflow) c /= notional;
    for (double& u : pr.exercise) u /= notional;
    return pr;
}

}  // namespace xvann::bsde
