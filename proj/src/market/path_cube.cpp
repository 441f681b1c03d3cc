#include "xvann/market/path_cube.hpp"

#include "xvann/errors.hpp"

namespace xvann::market {

PathCube::PathCube(std::size_t factors, std::size_t paths, std::size_t dates)
    : factors_(factors), paths_(paths), dates_(dates) {
    if (factors == 0 || paths == 0 || dates < 2)
        throw DimensionError("path cube needs at least one factor, one path and two dates");
    x_.assign(factors * paths * dates, 0.0);
    dw_.assign(factors * paths * (dates - 1), 0.0);
    hedge_.assign(factors * paths * (dates - 1), 0.0);
    b_.assign(paths * dates, 1.0);
}

}  // namespace xvann::market
