#pragma once

#include <optional>
#include <string>
#include <vector>

namespace landscape {

/// Continuous piecewise linear scalar function, stored as ascending
/// breakpoints, one slope per piece and the function value at the first
/// breakpoint (at 0 when there are no breakpoints). Continuity follows from
/// the representation: piece values are accumulated from the anchor.
class PiecewiseLinearActivation {
public:
    PiecewiseLinearActivation(std::vector<double> breakpoints, std::vector<double> slopes,
                              double anchor);

    double operator()(double x) const { return eval(x); }
    double eval(double x) const;

    struct Slope {
        double slope;
        bool on_breakpoint;
    };
    /// Slope of the open piece containing x. Exactly on a breakpoint the
    /// right-hand slope is returned and on_breakpoint is set.
    Slope slope_at(double x) const;

    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    const std::vector<double>& slopes() const noexcept { return slopes_; }
    double anchor() const noexcept { return anchor_; }

    bool is_linear() const;
    /// h_{s-,s+}: a single breakpoint at 0 with h(0) = 0.
    bool is_two_piece() const;

    /// x -> h(-x). Maps h_{s-,s+} onto h_{-s+,-s-}.
    PiecewiseLinearActivation reflected() const;

    bool operator==(const PiecewiseLinearActivation&) const = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> slopes_;
    double anchor_;
    std::vector<double> values_;  // h at each breakpoint
};

/// h_{s-,s+}(x) = s- x for x <= 0, s+ x for x > 0.
PiecewiseLinearActivation two_piece(double s_minus, double s_plus);
PiecewiseLinearActivation relu();
PiecewiseLinearActivation leaky_relu(double s_minus);
PiecewiseLinearActivation absolute_value();
PiecewiseLinearActivation linear_activation(double slope = 1.0);
/// Breakpoints (0, 1), slopes (0.2, 1, 0.5), h(0) = 0.
PiecewiseLinearActivation three_piece();

/// Parses "relu", "leaky:<s->", "abs", "threepiece", "identity",
/// "linear:<s>" and "twopiece:<s->,<s+>".
PiecewiseLinearActivation activation_from_preset(const std::string& name);

/// Used for unbounded pieces so that downstream sizing stays finite.
inline constexpr double kUnboundedSigma = 1e9;

struct TurningPoint {
    double t;
    double s_minus;
    double s_plus;
    double sigma;    // h is affine on (t - sigma, t) and on (t, t + sigma)
    double h_at_t;
};

/// First breakpoint (ascending) with s- != s+ and s- + s+ != 0.
/// Throws NoAdmissibleTurningPoint when every kink has s- + s+ = 0 and
/// InvalidActivation for linear activations.
TurningPoint find_turning_point(const PiecewiseLinearActivation& act);

/// First breakpoint with s- != s+, regardless of the slope sum.
std::optional<TurningPoint> find_any_kink(const PiecewiseLinearActivation& act);

/// First breakpoint with s- = -s+ != 0.
std::optional<TurningPoint> find_equal_slope_kink(const PiecewiseLinearActivation& act);

}  // namespace landscape
