#include "xvann/amc/lsm.hpp"

#include <cmath>

#include "xvann/amc/lattice.hpp"
#include "xvann/errors.hpp"

namespace xvann::amc {

FeatureFn bermudan_features(const instruments::BermudanSpec& b, const market::CurrencyModel& ccy,
                            const market::TimeGrid& grid, const market::PathCube& cube, const RegressionBasis& basis) {
    const double maturity = std::max(b.fixed_leg.maturity(), b.float_leg.maturity());
    std::vector<EuropeanSwaption> euro;
    for (std::size_t m = 0; m < b.exercise_dates.size(); ++m) euro.emplace_back(ccy.curve, ccy.hw, b, m);
    return [&b, &ccy, &grid, &cube, basis, maturity, euro](std::size_t n, std::size_t p, std::span<double> out) {
        const double t = grid[n];
        const double x = cube.x(0, p, n);
        std::size_t next = b.exercise_dates.size();
        for (std::size_t m = 0; m < b.exercise_dates.size(); ++m)
            if (b.exercise_dates[m] >= t - 1e-12) {
                next = m;
                break;
            }
        const auto st = instruments::make_state(ccy, t, x);
        double u = 0.0;
        if (next < b.exercise_dates.size()) u = instruments::underlying_value(b, b.exercise_dates[next], st);
        for (std::size_t k = 0; k < basis.fns.size(); ++k) {
            switch (basis.fns[k]) {
                case Basis::One: out[k] = 1.0; break;
                case Basis::X: out[k] = x; break;
                case Basis::X2: out[k] = x * x; break;
                case Basis::X3: out[k] = x * x * x; break;
                case Basis::Exercise: out[k] = u; break;
                case Basis::Exercise2: out[k] = u * u; break;
                case Basis::Zcb: out[k] = t < maturity ? st.bond(maturity) : 1.0; break;
                case Basis::European:
                    out[k] = next < b.exercise_dates.size() ? euro[next](t, x) : 0.0;
                    break;
            }
        }
    };
}

namespace {

// Least squares with column scaling; rank deficiency is an error.
Eigen::VectorXd regress(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    Eigen::VectorXd scale = a.colwise().norm().transpose();
    for (Eigen::Index k = 0; k < scale.size(); ++k)
        if (scale[k] == 0.0) throw RegressionError("regression basis column vanishes on the sample");
    const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
    qr.setThreshold(1e-12);
    if (qr.rank() < as.cols()) throw RegressionError("regression basis is rank deficient on the sample");
    return qr.solve(y).cwiseQuotient(scale);
}

}  // namespace

AmcResult amc_exposure(const bsde::Problem& pr, const FeatureFn& features, std::size_t n_basis,
                       const std::vector<Eigen::VectorXd>* policy) {
    const auto& cube = *pr.cube;
    const std::size_t np = pr.paths(), dates = pr.dates(), h = pr.horizon, nm = pr.exercise_index.size();
    if (n_basis == 0) throw RegressionError("empty regression basis");
    if (policy && policy->size() != nm) throw DimensionError("policy does not match the exercise schedule");
    const auto P = static_cast<Eigen::Index>(np), K = static_cast<Eigen::Index>(n_basis);

    AmcResult res;
    res.v_pre.assign(np * dates, 0.0);
    res.v_post.assign(np * dates, 0.0);
    res.eta.assign(np * nm, 1);
    res.exercise_coef.resize(nm);

    std::vector<std::int64_t> ex_slot(h + 1, -1);
    for (std::size_t m = 0; m < nm; ++m) ex_slot[pr.exercise_index[m]] = static_cast<std::int64_t>(m);

    // y[p]: discounted (to time 0) value of the policy cashflows strictly after the current date
    Eigen::VectorXd y = Eigen::VectorXd::Zero(P);
    Eigen::MatrixXd a(P, K);
    std::vector<double> f(n_basis);
    auto fill = [&](std::size_t n) {
        for (std::size_t p = 0; p < np; ++p) {
            features(n, p, f);
            for (std::size_t k = 0; k < n_basis; ++k) a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k)) = f[k];
        }
    };
    Eigen::VectorXd z(P);
    for (std::size_t n = h + 1; n-- > 0;) {
        // the regression target is the continuation in time-t_n money, a function of the state
        for (std::size_t p = 0; p < np; ++p) z[static_cast<Eigen::Index>(p)] = y[static_cast<Eigen::Index>(p)] * cube.numeraire(p, n);
        Eigen::VectorXd cont;
        Eigen::VectorXd coef;
        if (n == h) {
            cont = Eigen::VectorXd::Zero(P);
        } else if (n == 0) {
            cont = Eigen::VectorXd::Constant(P, z.mean());
        } else {
            fill(n);
            coef = regress(a, z);
            cont = a * coef;
        }
        for (std::size_t p = 0; p < np; ++p) res.v_post[p * dates + n] = cont[static_cast<Eigen::Index>(p)];
        const bool ex = ex_slot[n] >= 0;
        const std::size_t m = ex ? static_cast<std::size_t>(ex_slot[n]) : 0;
        if (ex) {
            Eigen::VectorXd c = cont;
            if (policy && n > 0 && n < h) c = a * (*policy)[m];
            res.exercise_coef[m] = coef;
            for (std::size_t p = 0; p < np; ++p) {
                const double u = pr.exercise[p * nm + m];
                if (u > c[static_cast<Eigen::Index>(p)]) {  // ties keep the continuation branch
                    res.eta[p * nm + m] = 0;
                    y[static_cast<Eigen::Index>(p)] = u / cube.numeraire(p, n);
                }
            }
        }
        for (std::size_t p = 0; p < np; ++p) {
            const bool exercised = ex && res.eta[p * nm + m] == 0;
            y[static_cast<Eigen::Index>(p)] += pr.cf(p, n) / cube.numeraire(p, n);
            res.v_pre[p * dates + n] = (exercised ? pr.exercise[p * nm + m] : res.v_post[p * dates + n]) + pr.cf(p, n);
        }
    }
    res.v0 = y.mean();
    res.v0_se = std::sqrt((y.array() - res.v0).square().sum() / static_cast<double>(np - 1) / static_cast<double>(np));
    const double scale = pr.notional;
    res.v0 *= scale;
    res.v0_se *= scale;
    for (auto& v : res.v_pre) v *= scale;
    for (auto& v : res.v_post) v *= scale;
    return res;
}

}  // namespace xvann::amc
