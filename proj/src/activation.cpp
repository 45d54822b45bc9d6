#include "landscape/activation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "landscape/errors.hpp"

namespace landscape {

PiecewiseLinearActivation::PiecewiseLinearActivation(std::vector<double> breakpoints,
                                                     std::vector<double> slopes, double anchor)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)), anchor_(anchor) {
    if (slopes_.size() != breakpoints_.size() + 1) {
        throw LandscapeError(ErrorCode::InvalidActivation,
                             "need exactly one more slope than breakpoints");
    }
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
        if (!(breakpoints_[i - 1] < breakpoints_[i])) {
            throw LandscapeError(ErrorCode::InvalidActivation,
                                 "breakpoints must be strictly ascending");
        }
    }
    for (double v : breakpoints_) {
        if (!std::isfinite(v)) throw LandscapeError(ErrorCode::InvalidActivation, "non-finite breakpoint");
    }
    for (double v : slopes_) {
        if (!std::isfinite(v)) throw LandscapeError(ErrorCode::InvalidActivation, "non-finite slope");
    }
    values_.resize(breakpoints_.size());
    if (!breakpoints_.empty()) {
        values_[0] = anchor_;
        for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
            values_[i] = values_[i - 1] + slopes_[i] * (breakpoints_[i] - breakpoints_[i - 1]);
        }
    }
}

double PiecewiseLinearActivation::eval(double x) const {
    if (breakpoints_.empty()) return anchor_ + slopes_[0] * x;
    // index of the first breakpoint >= x
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    auto k = static_cast<std::size_t>(it - breakpoints_.begin());
    if (k == 0) return values_[0] + slopes_[0] * (x - breakpoints_[0]);
    // x lies in (b_{k-1}, b_k], piece k
    return values_[k - 1] + slopes_[k] * (x - breakpoints_[k - 1]);
}

PiecewiseLinearActivation::Slope PiecewiseLinearActivation::slope_at(double x) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    auto k = static_cast<std::size_t>(it - breakpoints_.begin());
    bool on_bp = k > 0 && breakpoints_[k - 1] == x;
    return {slopes_[k], on_bp};
}

bool PiecewiseLinearActivation::is_linear() const {
    return std::all_of(slopes_.begin(), slopes_.end(), [&](double s) { return s == slopes_[0]; });
}

bool PiecewiseLinearActivation::is_two_piece() const {
    return breakpoints_.size() == 1 && breakpoints_[0] == 0.0 && anchor_ == 0.0;
}

PiecewiseLinearActivation PiecewiseLinearActivation::reflected() const {
    std::vector<double> bps(breakpoints_.rbegin(), breakpoints_.rend());
    for (double& b : bps) b = -b;
    std::vector<double> sl(slopes_.rbegin(), slopes_.rend());
    for (double& s : sl) s = -s;
    double anchor = breakpoints_.empty() ? anchor_ : values_.back();
    return PiecewiseLinearActivation(std::move(bps), std::move(sl), anchor);
}

PiecewiseLinearActivation two_piece(double s_minus, double s_plus) {
    return PiecewiseLinearActivation({0.0}, {s_minus, s_plus}, 0.0);
}

PiecewiseLinearActivation relu() { return two_piece(0.0, 1.0); }

PiecewiseLinearActivation leaky_relu(double s_minus) { return two_piece(s_minus, 1.0); }

PiecewiseLinearActivation absolute_value() { return two_piece(-1.0, 1.0); }

PiecewiseLinearActivation linear_activation(double slope) {
    return PiecewiseLinearActivation({}, {slope}, 0.0);
}

PiecewiseLinearActivation three_piece() {
    return PiecewiseLinearActivation({0.0, 1.0}, {0.2, 1.0, 0.5}, 0.0);
}

namespace {

double parse_real(const std::string& text, const std::string& preset) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw LandscapeError(ErrorCode::Parse, "bad number in activation preset '" + preset + "'");
    }
}

}  // namespace

PiecewiseLinearActivation activation_from_preset(const std::string& name) {
    if (name == "relu") return relu();
    if (name == "abs") return absolute_value();
    if (name == "threepiece") return three_piece();
    if (name == "identity") return linear_activation(1.0);
    auto colon = name.find(':');
    if (colon != std::string::npos) {
        std::string kind = name.substr(0, colon);
        std::string rest = name.substr(colon + 1);
        if (kind == "leaky") return leaky_relu(parse_real(rest, name));
        if (kind == "linear") return linear_activation(parse_real(rest, name));
        if (kind == "twopiece") {
            auto comma = rest.find(',');
            if (comma == std::string::npos) {
                throw LandscapeError(ErrorCode::Parse, "twopiece preset needs '<s->,<s+>'");
            }
            return two_piece(parse_real(rest.substr(0, comma), name),
                             parse_real(rest.substr(comma + 1), name));
        }
    }
    throw LandscapeError(ErrorCode::Parse, "unknown activation preset '" + name + "'");
}

namespace {

TurningPoint kink_at(const PiecewiseLinearActivation& act, std::size_t k) {
    const auto& b = act.breakpoints();
    double left = k == 0 ? kUnboundedSigma : b[k] - b[k - 1];
    double right = k + 1 == b.size() ? kUnboundedSigma : b[k + 1] - b[k];
    return TurningPoint{b[k], act.slopes()[k], act.slopes()[k + 1], std::min(left, right),
                        act.eval(b[k])};
}

}  // namespace

TurningPoint find_turning_point(const PiecewiseLinearActivation& act) {
    if (act.is_linear()) {
        throw LandscapeError(ErrorCode::InvalidActivation, "activation is linear; no turning point");
    }
    const auto& s = act.slopes();
    for (std::size_t k = 0; k < act.breakpoints().size(); ++k) {
        if (s[k] != s[k + 1] && s[k] + s[k + 1] != 0.0) return kink_at(act, k);
    }
    throw LandscapeError(ErrorCode::NoAdmissibleTurningPoint,
                         "every kink has opposite slopes (s- + s+ = 0)");
}

std::optional<TurningPoint> find_any_kink(const PiecewiseLinearActivation& act) {
    const auto& s = act.slopes();
    for (std::size_t k = 0; k < act.breakpoints().size(); ++k) {
        if (s[k] != s[k + 1]) return kink_at(act, k);
    }
    return std::nullopt;
}

std::optional<TurningPoint> find_equal_slope_kink(const PiecewiseLinearActivation& act) {
    const auto& s = act.slopes();
    for (std::size_t k = 0; k < act.breakpoints().size(); ++k) {
        if (s[k] != s[k + 1] && s[k] + s[k + 1] == 0.0) return kink_at(act, k);
    }
    return std::nullopt;
}

}  // namespace landscape
