#pragma once

#include <vector>

#include "landscape/loss.hpp"
#include "landscape/network.hpp"

namespace landscape {

/// Minimiser W~ of f(W) = (1/n) sum_i l(Y_i, W [x_i; 1]) together with the
/// quantities every construction is seeded from.
struct LinearFit {
    LossKind loss = LossKind::Squared;
    Matrix W_tilde;   // d_Y x (d_X + 1), last column is the intercept
    double risk = 0;  // f(W~)
    double grad_norm = 0;
    Matrix V;        // per-sample loss gradients at W~ X~ (no 1/n factor)
    Matrix Y_tilde;  // W~ X~
    int iterations = 0;
    bool unbounded_suspected = false;

    Eigen::Index d_x() const { return W_tilde.cols() - 1; }
    Eigen::Index d_y() const { return W_tilde.rows(); }
    Matrix weights() const { return W_tilde.leftCols(W_tilde.cols() - 1); }
    Vector intercept() const { return W_tilde.col(W_tilde.cols() - 1); }
};

struct FitOptions {
    double tol = 1e-8;
    int max_iterations = 100000;
    double norm_cap = 1e6;  // CE only: stop and flag when ||W||_F exceeds this
};

/// Moore-Penrose pseudo-inverse via SVD; singular values below
/// rcond * sigma_max are treated as zero.
Matrix pseudo_inverse(const Matrix& A, double rcond = 1e-12);

/// Squared loss: W~ = Y X~^+ (minimum-norm least squares).
/// CrossEntropy: gradient descent with backtracking from step 1.0.
LinearFit fit_linear(const Dataset& data, LossKind loss, const FitOptions& options = {});

double linear_risk(const Dataset& data, LossKind loss, const Matrix& W);
Matrix linear_risk_gradient(const Dataset& data, LossKind loss, const Matrix& W);

/// ||V [X^T 1]||_F.
double stationarity_certificate(const LinearFit& fit, const Dataset& data);
bool stationarity_holds(const LinearFit& fit, const Dataset& data);

struct RowSelection {
    Eigen::Index k;                       // original index of the selected row
    std::vector<Eigen::Index> permutation;  // permutation[new] = old, selected row first
};

/// First output row whose residual row of V is nonzero, plus the row swap
/// bringing it to the top. Throws AllRowsZero when the linear model fits.
RowSelection select_nonzero_residual_row(const LinearFit& fit);

Matrix permute_rows(const Matrix& M, const std::vector<Eigen::Index>& permutation);
/// Inverse of permute_rows.
Matrix unpermute_rows(const Matrix& M, const std::vector<Eigen::Index>& permutation);

/// A fit with rows reordered by `permutation`; still a minimiser for the
/// correspondingly reordered labels.
LinearFit permuted(const LinearFit& fit, const std::vector<Eigen::Index>& permutation);

/// Frobenius norm above which a residual counts as nonzero.
inline constexpr double kResidualThreshold = 1e-8;

}  // namespace landscape
