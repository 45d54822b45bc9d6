#include "landscape/network.hpp"

#include <string>

#include "landscape/errors.hpp"

namespace landscape {

Dataset::Dataset(Matrix X, Matrix Y) : X_(std::move(X)), Y_(std::move(Y)) {
    if (X_.cols() < 1) throw LandscapeError(ErrorCode::ShapeMismatch, "dataset needs at least one sample");
    if (X_.cols() != Y_.cols()) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "X and Y disagree on the number of samples");
    }
    if (X_.rows() < 1 || Y_.rows() < 1) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "features and labels need at least one row");
    }
}

Matrix Dataset::X_tilde() const {
    Matrix out(X_.rows() + 1, X_.cols());
    out.topRows(X_.rows()) = X_;
    out.row(X_.rows()).setOnes();
    return out;
}

bool Dataset::has_distinct_columns() const {
    for (Eigen::Index i = 0; i < n(); ++i) {
        for (Eigen::Index j = i + 1; j < n(); ++j) {
            if (X_.col(i) == X_.col(j)) return false;
        }
    }
    return true;
}

Mlp::Mlp(std::vector<Matrix> weights, std::vector<Vector> biases, PiecewiseLinearActivation activation)
    : weights_(std::move(weights)), biases_(std::move(biases)), activation_(std::move(activation)) {
    if (weights_.empty()) throw LandscapeError(ErrorCode::ShapeMismatch, "network needs at least one layer");
    if (weights_.size() != biases_.size()) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "one bias vector per layer required");
    }
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        if (biases_[j].size() != weights_[j].rows()) {
            throw LandscapeError(ErrorCode::ShapeMismatch,
                                 "bias " + std::to_string(j + 1) + " does not match its weight rows");
        }
        if (j > 0 && weights_[j].cols() != weights_[j - 1].rows()) {
            throw LandscapeError(ErrorCode::ShapeMismatch,
                                 "layer " + std::to_string(j + 1) + " input width mismatch");
        }
    }
}

Mlp Mlp::zeros(const std::vector<Eigen::Index>& dims, PiecewiseLinearActivation activation) {
    if (dims.size() < 2) throw LandscapeError(ErrorCode::ShapeMismatch, "need at least input and output dims");
    std::vector<Matrix> w;
    std::vector<Vector> b;
    for (std::size_t j = 1; j < dims.size(); ++j) {
        if (dims[j] < 1 || dims[j - 1] < 1) throw LandscapeError(ErrorCode::ShapeMismatch, "dims must be positive");
        w.push_back(Matrix::Zero(dims[j], dims[j - 1]));
        b.push_back(Vector::Zero(dims[j]));
    }
    return Mlp(std::move(w), std::move(b), std::move(activation));
}

std::vector<Eigen::Index> Mlp::dims() const {
    std::vector<Eigen::Index> d{weights_.front().cols()};
    for (const auto& w : weights_) d.push_back(w.rows());
    return d;
}

Eigen::Index Mlp::parameter_count() const {
    Eigen::Index count = 0;
    for (std::size_t j = 0; j < weights_.size(); ++j) count += weights_[j].size() + biases_[j].size();
    return count;
}

Vector Mlp::parameters() const {
    Vector p(parameter_count());
    Eigen::Index at = 0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        p.segment(at, weights_[j].size()) = weights_[j].reshaped();
        at += weights_[j].size();
        p.segment(at, biases_[j].size()) = biases_[j];
        at += biases_[j].size();
    }
    return p;
}

Mlp Mlp::with_parameters(const Vector& params) const {
    if (params.size() != parameter_count()) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "parameter vector has the wrong length");
    }
    std::vector<Matrix> w;
    std::vector<Vector> b;
    Eigen::Index at = 0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        w.push_back(params.segment(at, weights_[j].size()).reshaped(weights_[j].rows(), weights_[j].cols()));
        at += weights_[j].size();
        b.push_back(params.segment(at, biases_[j].size()));
        at += biases_[j].size();
    }
    return Mlp(std::move(w), std::move(b), activation_);
}

Matrix apply_elementwise(const PiecewiseLinearActivation& act, const Matrix& Z) {
    return Z.unaryExpr([&act](double z) { return act.eval(z); });
}

ForwardTrace forward(const Mlp& net, const Matrix& X) {
    if (X.rows() != net.weight(0).cols()) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "input has " + std::to_string(X.rows()) +
                                                           " rows, network expects " +
                                                           std::to_string(net.weight(0).cols()));
    }
    ForwardTrace trace;
    const std::size_t L = net.num_layers();
    Matrix current = X;
    for (std::size_t j = 0; j < L; ++j) {
        Matrix z = net.weight(j) * current;
        z.colwise() += net.bias(j);
        trace.pre.push_back(z);
        if (j + 1 < L) {
            current = apply_elementwise(net.activation(), z);
            trace.post.push_back(current);
        }
    }
    return trace;
}

Matrix predict(const Mlp& net, const Matrix& X) { return forward(net, X).output(); }

double parameter_distance(const Mlp& a, const Mlp& b) {
    Vector pa = a.parameters();
    Vector pb = b.parameters();
    if (pa.size() != pb.size()) throw LandscapeError(ErrorCode::ShapeMismatch, "networks differ in shape");
    return (pa - pb).lpNorm<Eigen::Infinity>();
}

}  // namespace landscape
