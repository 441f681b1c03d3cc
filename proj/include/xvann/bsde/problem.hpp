#pragma once

#include <cstddef>
#include <vector>

#include "xvann/market/path_cube.hpp"

namespace xvann::bsde {

// Trade data on a scenario set, in units of the trade notional. Values are
// domestic and undiscounted; the engine discounts with the cube numeraire.
struct Problem {
    const market::PathCube* cube = nullptr;
    std::size_t horizon = 0;  // last grid index of the rollout
    double notional = 1.0;
    std::vector<double> cashflow;            // [p * dates + n], empty if none
    std::vector<std::size_t> exercise_index;  // grid indices of exercise dates
    std::vector<double> exercise;            // [p * M + m]

    std::size_t paths() const { return cube->paths(); }
    std::size_t dates() const { return cube->dates(); }
    std::size_t factors() const { return cube->factors(); }
    bool has_exercise() const { return !exercise_index.empty(); }
    double cf(std::size_t p, std::size_t n) const {
        return cashflow.empty() ? 0.0 : cashflow[p * dates() + n];
    }
};

// Builds a problem; cashflows and exercise values are given in currency units
// and divided by the notional here.
Problem make_problem(const market::PathCube& cube, std::size_t horizon, double notional,
                     std::vector<double> cashflow, std::vector<std::size_t> exercise_index = {},
                     std::vector<double> exercise = {});

}  // namespace xvann::bsde
