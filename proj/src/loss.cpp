#include "landscape/loss.hpp"

#include <cmath>
#include <vector>

#include "landscape/errors.hpp"

namespace landscape {

std::string to_string(LossKind kind) { return kind == LossKind::Squared ? "squared" : "ce"; }

LossKind loss_from_string(const std::string& name) {
    if (name == "squared") return LossKind::Squared;
    if (name == "ce" || name == "cross-entropy" || name == "crossentropy") return LossKind::CrossEntropy;
    throw LandscapeError(ErrorCode::Parse, "unknown loss '" + name + "'");
}

Vector softmax(const Vector& logits) {
    double m = logits.maxCoeff();
    Vector e = (logits.array() - m).exp();
    return e / e.sum();
}

namespace {

double log_sum_exp(const Vector& logits) {
    double m = logits.maxCoeff();
    return m + std::log((logits.array() - m).exp().sum());
}

void check_sizes(const Vector& y, const Vector& p) {
    if (y.size() != p.size()) throw LandscapeError(ErrorCode::ShapeMismatch, "label and prediction sizes differ");
}

}  // namespace

double loss_value(LossKind kind, const Vector& y, const Vector& prediction) {
    check_sizes(y, prediction);
    if (kind == LossKind::Squared) return 0.5 * (y - prediction).squaredNorm();
    double lse = log_sum_exp(prediction);
    double total = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        if (y[k] != 0.0) total += y[k] * (lse - prediction[k]);
    }
    return total;
}

Vector loss_gradient_wrt_prediction(LossKind kind, const Vector& y, const Vector& prediction) {
    check_sizes(y, prediction);
    if (kind == LossKind::Squared) return prediction - y;
    return y.sum() * softmax(prediction) - y;
}

void validate_labels(LossKind kind, const Matrix& Y) {
    if (kind != LossKind::CrossEntropy) return;
    for (Eigen::Index i = 0; i < Y.cols(); ++i) {
        int ones = 0;
        for (Eigen::Index k = 0; k < Y.rows(); ++k) {
            double v = Y(k, i);
            if (v == 1.0) {
                ++ones;
            } else if (v != 0.0) {
                throw LandscapeError(ErrorCode::InvalidLabels, "cross-entropy labels must be one-hot");
            }
        }
        if (ones != 1) throw LandscapeError(ErrorCode::InvalidLabels, "cross-entropy labels must be one-hot");
    }
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double risk_of_predictions(LossKind kind, const Matrix& Y, const Matrix& predictions) {
    if (Y.rows() != predictions.rows() || Y.cols() != predictions.cols()) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "predictions do not match label shape");
    }
    validate_labels(kind, Y);
    std::vector<double> terms(static_cast<std::size_t>(Y.cols()));
    for (Eigen::Index i = 0; i < Y.cols(); ++i) {
        terms[static_cast<std::size_t>(i)] = loss_value(kind, Y.col(i), predictions.col(i));
    }
    return pairwise_sum(terms) / static_cast<double>(Y.cols());
}

double empirical_risk(const Mlp& net, const Dataset& data, LossKind kind) {
    return risk_of_predictions(kind, data.Y(), predict(net, data.X()));
}

Matrix per_sample_gradients(LossKind kind, const Matrix& Y, const Matrix& predictions) {
    Matrix G(Y.rows(), Y.cols());
    for (Eigen::Index i = 0; i < Y.cols(); ++i) {
        G.col(i) = loss_gradient_wrt_prediction(kind, Y.col(i), predictions.col(i));
    }
    return G;
}

}  // namespace landscape
