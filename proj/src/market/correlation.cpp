#include "xvann/market/correlation.hpp"

#include <cmath>
#include <string>

#include "xvann/errors.hpp"

namespace xvann::market {

Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& a, double pivot_floor) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d < -1e-8) throw CorrelationError("correlation matrix is not positive semi-definite");
        if (d <= pivot_floor) continue;  // dependent direction: zero column
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

CorrelationMatrix::CorrelationMatrix(const Eigen::MatrixXd& rho) : rho_(rho) {
    const Eigen::Index n = rho_.rows();
    if (n == 0 || rho_.cols() != n) throw CorrelationError("correlation matrix must be square");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(rho_(i, i) - 1.0) > 1e-12)
            throw CorrelationError("correlation matrix diagonal must be 1");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!std::isfinite(rho_(i, j)))
                throw CorrelationError("correlation matrix has non-finite entries");
            if (std::abs(rho_(i, j) - rho_(j, i)) > 1e-12)
                throw CorrelationError("correlation matrix must be symmetric");
            if (std::abs(rho_(i, j)) > 1.0 + 1e-12)
                throw CorrelationError("correlation entries must lie in [-1, 1]");
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho_);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < reject_tolerance)
        throw CorrelationError("correlation matrix is not positive semi-definite (min eigenvalue " +
                               std::to_string(min_eig) + ")");
    if (min_eig < clip_tolerance) {
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
        Eigen::MatrixXd r = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        Eigen::VectorXd s = r.diagonal().cwiseSqrt().cwiseInverse();
        rho_ = s.asDiagonal() * r * s.asDiagonal();
        rho_ = 0.5 * (rho_ + rho_.transpose());
        rho_.diagonal().setOnes();
        repaired_ = true;
    }
    chol_ = psd_cholesky(rho_);
}

CorrelationMatrix CorrelationMatrix::from_upper(int dim, const std::vector<double>& upper) {
    const std::size_t expected = static_cast<std::size_t>(dim) * (dim - 1) / 2;
    if (upper.size() != expected)
        throw CorrelationError("expected " + std::to_string(expected) +
                               " correlation entries, got " + std::to_string(upper.size()));
    Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(dim, dim);
    std::size_t k = 0;
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) rho(i, j) = rho(j, i) = upper[k++];
    return CorrelationMatrix(rho);
}

}  // namespace xvann::market
