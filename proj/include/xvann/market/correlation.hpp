#pragma once

#include <Eigen/Dense>

namespace xvann::market {

// Validated correlation matrix with a lower-triangular factor L, L L^T = rho.
// Slightly indefinite input is repaired by clipping eigenvalues and
// renormalizing to unit diagonal.
class CorrelationMatrix {
   public:
    static constexpr double clip_tolerance = -1e-10;
    static constexpr double reject_tolerance = -1e-6;

    CorrelationMatrix() : CorrelationMatrix(Eigen::MatrixXd::Identity(1, 1)) {}
    explicit CorrelationMatrix(const Eigen::MatrixXd& rho);

    // Builds the matrix from the strict upper triangle listed row by row.
    static CorrelationMatrix from_upper(int dim, const std::vector<double>& upper);

    int dim() const { return static_cast<int>(rho_.rows()); }
    const Eigen::MatrixXd& matrix() const { return rho_; }
    const Eigen::MatrixXd& factor() const { return chol_; }
    double operator()(int i, int j) const { return rho_(i, j); }
    bool repaired() const { return repaired_; }

   private:
    Eigen::MatrixXd rho_;
    Eigen::MatrixXd chol_;
    bool repaired_ = false;
};

// Cholesky that tolerates zero pivots (PSD input): a zero pivot produces a zero
// column, so perfectly correlated factors get identical rows in L.
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& a, double pivot_floor = 1e-14);

}  // namespace xvann::market
