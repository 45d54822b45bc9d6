#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "landscape/activation.hpp"
#include "landscape/linear_baseline.hpp"
#include "landscape/separation.hpp"

namespace landscape {

enum class PointKind { Minimum, DescentWitness };
/// S1: one hidden layer, two-piece activation. S2: deeper, two-piece.
/// S3: any activation with an admissible turning point. EqualSlope: the
/// s- + s+ = 0 route, which needs one extra hidden unit.
enum class Stage { S1, S2, S3, EqualSlope };

std::string to_string(PointKind kind);
std::string to_string(Stage stage);

struct ConstructionParams {
    double eta = 0;               // offset keeping the first hidden layer positive
    std::vector<double> eta_rows; // per-row offsets of a descent witness, row 1 unused
    double lambda = 0;            // lift offset for depth >= 3
    double M = 1;
    double M_tilde = 1;
    std::vector<double> alpha_scales;  // alpha_2 .. alpha_{L-1}
    std::vector<double> scales;        // cumulative c_1 .. c_{L-1} of the embedding
    std::optional<TurningPoint> turning;
    bool reflected = false;  // built for h(-x) and mapped back
    Eigen::Index selected_row = 0;
    std::optional<SeparationResult> separation;
    std::optional<DescentConstants> constants;
    double predicted_decrease = 0;  // first-order decrease of a descent witness
};

struct CertifiedPoint {
    Mlp net;
    PointKind kind;
    Stage stage;
    double risk;           // empirical risk of `net`
    double baseline_risk;  // f(W~)
    bool spurious;         // false when the linear model already fits the data
    ConstructionParams params;
};

struct MinimumOptions {
    std::optional<double> eta;        // must be negative enough; defaults to min(0, min Y~) - 1
    double M_multiplier = 1.0;        // >= 1, applied to the smallest admissible M
    std::vector<double> alpha_scales; // in (0, 1]; defaults to 1/2 each
    bool any_kink = false;            // accept a kink with s- + s+ = 0 (equal-slope route)
};

struct DescentOptions {
    double alpha_start = 1.0;
    std::optional<double> gamma;  // skip sizing and the decrease search; used for controls
    double M_multiplier = 1.0;
    double M_tilde_multiplier = 1.0;
};

/// Local minimum realising f(W~) for a two-piece activation (any depth).
CertifiedPoint build_minimum_two_piece(const Dataset& data, const LinearFit& fit,
                                       const std::vector<Eigen::Index>& dims,
                                       const PiecewiseLinearActivation& act,
                                       const MinimumOptions& options = {});

/// Local minimum for any activation with an admissible turning point.
CertifiedPoint build_minimum(const Dataset& data, const LinearFit& fit, const std::vector<Eigen::Index>& dims,
                             const PiecewiseLinearActivation& act, const MinimumOptions& options = {});

/// Point with risk strictly below f(W~). Requires a two-piece activation with
/// s- + s+ != 0 and d_1 >= d_Y + 1.
CertifiedPoint build_descent_two_piece(const Dataset& data, const LinearFit& fit,
                                       const std::vector<Eigen::Index>& dims,
                                       const PiecewiseLinearActivation& act,
                                       const DescentOptions& options = {});

/// Descent witness for any activation with an admissible turning point.
CertifiedPoint build_descent(const Dataset& data, const LinearFit& fit, const std::vector<Eigen::Index>& dims,
                             const PiecewiseLinearActivation& act, const DescentOptions& options = {});

/// Descent witness for activations whose kink has s- = -s+ (absolute value
/// and its multiples). Requires d_1 >= d_Y + 2 and d_i >= d_Y + 1.
CertifiedPoint build_equal_slope_descent(const Dataset& data, const LinearFit& fit,
                                         const std::vector<Eigen::Index>& dims,
                                         const PiecewiseLinearActivation& act,
                                         const DescentOptions& options = {});

/// `count` distinct minima of the construction; member 0 uses the defaults,
/// the others draw eta, M and the alpha scales from `seed ^ member`.
std::vector<CertifiedPoint> enumerate_family(const Dataset& data, const LinearFit& fit,
                                             const std::vector<Eigen::Index>& dims,
                                             const PiecewiseLinearActivation& act, int count,
                                             std::uint64_t seed, bool any_kink = false);

/// Negates every hidden layer's weights and bias: a net with activation
/// h(-x) becomes the same function with activation h.
Mlp reflect_hidden(const Mlp& net, const PiecewiseLinearActivation& act);

/// Places a two-piece network at a turning point of `act`: hidden layer k is
/// scaled by c_k and shifted by t, the output layer undoes both.
Mlp embed_at_turning_point(const Mlp& two_piece_net, const PiecewiseLinearActivation& act,
                           const TurningPoint& tp, const std::vector<double>& scales);

}  // namespace landscape
