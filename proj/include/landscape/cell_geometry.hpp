#pragma once

#include <cstdint>
#include <vector>

#include "landscape/loss.hpp"
#include "landscape/network.hpp"

namespace landscape {

/// Distance to a breakpoint below which a pre-activation counts as on it.
inline constexpr double kBoundaryTolerance = 1e-12;

struct BoundaryHit {
    std::size_t layer;
    Eigen::Index unit;
    Eigen::Index sample;
    bool operator==(const BoundaryHit&) const = default;
};

/// Slopes realised by every hidden unit on every sample, one matrix per
/// hidden layer (d_k x n).
struct CellSignature {
    std::vector<Matrix> patterns;
    std::vector<BoundaryHit> boundary;

    bool interior() const { return boundary.empty(); }
    bool operator==(const CellSignature& other) const;
};

CellSignature activation_pattern(const Mlp& net, const Matrix& X);

/// Flattened diag(W2) W1, row by row. With `affine` set each row carries the
/// scaled hidden bias as an extra column and the output bias is appended.
struct QuotientPoint {
    RowVector w_hat;
    bool affine = false;
};

/// Requires W2 to be a single row.
QuotientPoint quotient_map(const Matrix& W1, const RowVector& W2);
/// Affine quotient of a one-hidden-layer, single-output net.
QuotientPoint quotient_map(const Mlp& net);

struct LiftedData {
    Matrix x_hat;  // column i = A_{.,i} kron x_i, or [A_{.,i} kron [x_i; 1]; 1] when affine
    bool affine = false;
};

/// Throws BoundaryCell when the signature has boundary hits and ShapeMismatch
/// unless it comes from a one-hidden-layer net.
LiftedData lift_data(const CellSignature& sig, const Matrix& X, bool affine = true);

double reformulated_risk(const QuotientPoint& q, const LiftedData& lifted, const Matrix& Y, LossKind loss);

/// ||X^ g|| with g the per-sample loss gradients at w_hat X^.
double quotient_gradient_residual(const QuotientPoint& q, const LiftedData& lifted, const Matrix& Y,
                                  LossKind loss);

struct CellOptimum {
    QuotientPoint q_star;
    double risk_star;  // lower bound for every net realising the pattern
};

/// Minimum-norm least-squares minimiser of the squared reformulated risk.
CellOptimum solve_cell_optimum(const LiftedData& lifted, const Matrix& Y);

/// Supported setting: one hidden layer, d_Y = 1, every piece of the
/// activation passing through the origin.
void require_quotient_setting(const Mlp& net);

/// Same affine quotient (within 1e-12, relative to its size) and matching
/// output-weight signs.
bool equivalence_check(const Mlp& a, const Mlp& b);

/// Row k of W1 and b1 times c_k, W2 entry k divided by c_k.
Mlp rescale_units(const Mlp& net, const Vector& c);

/// Moves from `a` to `b` one hidden unit at a time; each move scales the
/// unit geometrically so no output weight changes sign. Returns the start
/// point followed by `steps_per_move` points per move, ending exactly at `b`.
/// Throws NotEquivalent when the endpoints are not equivalent.
std::vector<Mlp> build_valley_path(const Mlp& a, const Mlp& b, int steps_per_move);

/// True when `trials` random nets with hidden width `hidden` share one cell
/// signature on X.
bool linear_collapse_check(const PiecewiseLinearActivation& act, const Matrix& X, Eigen::Index hidden, int trials,
                           std::uint64_t seed);

}  // namespace landscape
