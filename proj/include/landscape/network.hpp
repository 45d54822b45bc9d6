#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "landscape/activation.hpp"

namespace landscape {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Features X (d_X x n) and labels Y (d_Y x n), one column per sample.
class Dataset {
public:
    Dataset(Matrix X, Matrix Y);

    const Matrix& X() const noexcept { return X_; }
    const Matrix& Y() const noexcept { return Y_; }
    Eigen::Index n() const noexcept { return X_.cols(); }
    Eigen::Index d_x() const noexcept { return X_.rows(); }
    Eigen::Index d_y() const noexcept { return Y_.rows(); }

    /// X augmented with a row of ones: [X; 1^T].
    Matrix X_tilde() const;
    bool has_distinct_columns() const;

private:
    Matrix X_;
    Matrix Y_;
};

/// Fully connected network: hidden layers share one piecewise linear
/// activation, the output layer is affine.
class Mlp {
public:
    Mlp(std::vector<Matrix> weights, std::vector<Vector> biases, PiecewiseLinearActivation activation);

    /// Zero-initialised network with the given layer widths (d_0, ..., d_L).
    static Mlp zeros(const std::vector<Eigen::Index>& dims, PiecewiseLinearActivation activation);

    std::size_t num_layers() const noexcept { return weights_.size(); }
    std::vector<Eigen::Index> dims() const;
    const std::vector<Matrix>& weights() const noexcept { return weights_; }
    const std::vector<Vector>& biases() const noexcept { return biases_; }
    const Matrix& weight(std::size_t layer) const { return weights_.at(layer); }
    const Vector& bias(std::size_t layer) const { return biases_.at(layer); }
    const PiecewiseLinearActivation& activation() const noexcept { return activation_; }

    /// All weights then the bias of each layer, layer by layer; weights in
    /// column-major order.
    Vector parameters() const;
    Mlp with_parameters(const Vector& params) const;
    Eigen::Index parameter_count() const;

private:
    std::vector<Matrix> weights_;
    std::vector<Vector> biases_;
    PiecewiseLinearActivation activation_;
};

struct ForwardTrace {
    std::vector<Matrix> pre;   // W_j Y^{(j-1)} + b_j 1^T, j = 1..L
    std::vector<Matrix> post;  // activation(pre[j]) for hidden layers only
    const Matrix& output() const { return pre.back(); }
};

ForwardTrace forward(const Mlp& net, const Matrix& X);
Matrix predict(const Mlp& net, const Matrix& X);

Matrix apply_elementwise(const PiecewiseLinearActivation& act, const Matrix& Z);

/// Max-norm distance between the parameter vectors of two equally shaped nets.
double parameter_distance(const Mlp& a, const Mlp& b);

}  // namespace landscape
