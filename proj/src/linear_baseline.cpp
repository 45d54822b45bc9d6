#include "landscape/linear_baseline.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numeric>
#include <string>

#include "landscape/errors.hpp"

namespace landscape {

Matrix pseudo_inverse(const Matrix& A, double rcond) {
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    double cutoff = s.size() > 0 ? rcond * s[0] : 0.0;
    Vector inv = Vector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > cutoff) inv[i] = 1.0 / s[i];
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double linear_risk(const Dataset& data, LossKind loss, const Matrix& W) {
    return risk_of_predictions(loss, data.Y(), W * data.X_tilde());
}

Matrix linear_risk_gradient(const Dataset& data, LossKind loss, const Matrix& W) {
    Matrix Xt = data.X_tilde();
    Matrix G = per_sample_gradients(loss, data.Y(), W * Xt);
    return G * Xt.transpose() / static_cast<double>(data.n());
}

namespace {

LinearFit finish(const Dataset& data, LossKind loss, Matrix W, int iterations) {
    LinearFit fit;
    fit.loss = loss;
    Matrix Xt = data.X_tilde();
    fit.Y_tilde = W * Xt;
    fit.V = per_sample_gradients(loss, data.Y(), fit.Y_tilde);
    fit.risk = risk_of_predictions(loss, data.Y(), fit.Y_tilde);
    fit.grad_norm = (fit.V * Xt.transpose()).norm() / static_cast<double>(data.n());
    fit.W_tilde = std::move(W);
    fit.iterations = iterations;
    return fit;
}

LinearFit fit_squared(const Dataset& data, const FitOptions& options) {
    Matrix Xt = data.X_tilde();
    Matrix pinv = pseudo_inverse(Xt);
    Matrix W = data.Y() * pinv;
    // one step of iterative refinement
    W += (data.Y() - W * Xt) * pinv;
    LinearFit fit = finish(data, LossKind::Squared, std::move(W), 1);
    if (fit.grad_norm > options.tol * (1.0 + data.Y().norm())) {
        throw LandscapeError(ErrorCode::NonConvergence,
                             "least-squares gradient norm " + std::to_string(fit.grad_norm) +
                                 " exceeds tolerance");
    }
    return fit;
}

LinearFit fit_cross_entropy(const Dataset& data, const FitOptions& options) {
    validate_labels(LossKind::CrossEntropy, data.Y());
    Matrix W = Matrix::Zero(data.d_y(), data.d_x() + 1);
    double value = linear_risk(data, LossKind::CrossEntropy, W);
    for (int it = 0; it < options.max_iterations; ++it) {
        Matrix G = linear_risk_gradient(data, LossKind::CrossEntropy, W);
        double g2 = G.squaredNorm();
        if (std::sqrt(g2) <= options.tol) return finish(data, LossKind::CrossEntropy, W, it);
        if (W.norm() > options.norm_cap) {
            LinearFit fit = finish(data, LossKind::CrossEntropy, W, it);
            fit.unbounded_suspected = true;
            return fit;
        }
        double step = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            Matrix candidate = W - step * G;
            double cv = linear_risk(data, LossKind::CrossEntropy, candidate);
            if (cv <= value - 0.5 * step * g2) {
                W = std::move(candidate);
                value = cv;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // line search stalled at machine precision
    }
    LinearFit fit = finish(data, LossKind::CrossEntropy, W, options.max_iterations);
    if (fit.grad_norm <= options.tol) return fit;
    throw LandscapeError(ErrorCode::NonConvergence,
                         "cross-entropy fit stopped with gradient norm " + std::to_string(fit.grad_norm));
}

}  // namespace

LinearFit fit_linear(const Dataset& data, LossKind loss, const FitOptions& options) {
    return loss == LossKind::Squared ? fit_squared(data, options) : fit_cross_entropy(data, options);
}

double stationarity_certificate(const LinearFit& fit, const Dataset& data) {
    return (fit.V * data.X_tilde().transpose()).norm();
}

bool stationarity_holds(const LinearFit& fit, const Dataset& data) {
    return stationarity_certificate(fit, data) <= 1e-8 * (1.0 + fit.V.norm());
}

RowSelection select_nonzero_residual_row(const LinearFit& fit) {
    for (Eigen::Index k = 0; k < fit.V.rows(); ++k) {
        if (fit.V.row(k).norm() > kResidualThreshold) {
            std::vector<Eigen::Index> perm(static_cast<std::size_t>(fit.V.rows()));
            std::iota(perm.begin(), perm.end(), Eigen::Index{0});
            std::swap(perm[0], perm[static_cast<std::size_t>(k)]);
            return {k, perm};
        }
    }
    throw LandscapeError(ErrorCode::AllRowsZero, "linear model fits the data; nothing is spurious");
}

Matrix permute_rows(const Matrix& M, const std::vector<Eigen::Index>& permutation) {
    Matrix out(M.rows(), M.cols());
    for (std::size_t r = 0; r < permutation.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = M.row(permutation[r]);
    }
    return out;
}

Matrix unpermute_rows(const Matrix& M, const std::vector<Eigen::Index>& permutation) {
    Matrix out(M.rows(), M.cols());
    for (std::size_t r = 0; r < permutation.size(); ++r) {
        out.row(permutation[r]) = M.row(static_cast<Eigen::Index>(r));
    }
    return out;
}

LinearFit permuted(const LinearFit& fit, const std::vector<Eigen::Index>& permutation) {
    LinearFit out = fit;
    out.W_tilde = permute_rows(fit.W_tilde, permutation);
    out.V = permute_rows(fit.V, permutation);
    out.Y_tilde = permute_rows(fit.Y_tilde, permutation);
    return out;
}

}  // namespace landscape
