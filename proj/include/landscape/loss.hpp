#pragma once

#include <span>
#include <string>

#include "landscape/network.hpp"

namespace landscape {

/// Squared: l(y, p) = 1/2 ||y - p||^2.
/// CrossEntropy: l(y, p) = -sum_k y_k log softmax(p)_k, labels one-hot.
enum class LossKind { Squared, CrossEntropy };

std::string to_string(LossKind kind);
LossKind loss_from_string(const std::string& name);

double loss_value(LossKind kind, const Vector& y, const Vector& prediction);
Vector loss_gradient_wrt_prediction(LossKind kind, const Vector& y, const Vector& prediction);

/// Throws InvalidLabels unless every column of Y is one-hot (CrossEntropy only).
void validate_labels(LossKind kind, const Matrix& Y);

/// Pairwise summation with a fixed tree, so the result does not depend on
/// how callers batch the terms.
double pairwise_sum(std::span<const double> values);

/// (1/n) sum_i l(Y_i, P_i).
double risk_of_predictions(LossKind kind, const Matrix& Y, const Matrix& predictions);
double empirical_risk(const Mlp& net, const Dataset& data, LossKind kind);

/// Per-sample gradients stacked as columns (d_Y x n); the 1/n risk factor is
/// not applied.
Matrix per_sample_gradients(LossKind kind, const Matrix& Y, const Matrix& predictions);

Vector softmax(const Vector& logits);

}  // namespace landscape
