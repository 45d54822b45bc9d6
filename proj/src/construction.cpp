#include "landscape/construction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "landscape/errors.hpp"
#include "landscape/loss.hpp"

namespace landscape {

using Index = Eigen::Index;

std::string to_string(PointKind kind) { return kind == PointKind::Minimum ? "minimum" : "descent"; }

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::S1: return "S1";
        case Stage::S2: return "S2";
        case Stage::S3: return "S3";
        case Stage::EqualSlope: return "EqualSlope";
    }
    return "?";
}

namespace {

void check_dims(const Dataset& data, const LinearFit& fit, const std::vector<Index>& dims, Index first_extra,
                Index rest_extra) {
    if (dims.size() < 3) throw LandscapeError(ErrorCode::ShapeMismatch, "need at least one hidden layer");
    if (dims.front() != data.d_x() || dims.back() != data.d_y() || fit.d_x() != data.d_x() ||
        fit.d_y() != data.d_y() || fit.V.cols() != data.n()) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "dims, data and fit disagree");
    }
    const Index d_y = data.d_y();
    if (dims[1] < d_y + first_extra) {
        throw LandscapeError(ErrorCode::WidthViolation, "first hidden layer needs at least " +
                                                            std::to_string(d_y + first_extra) + " units");
    }
    for (std::size_t k = 2; k + 1 < dims.size(); ++k) {
        if (dims[k] < d_y + rest_extra) {
            throw LandscapeError(ErrorCode::WidthViolation, "hidden layer " + std::to_string(k) +
                                                                " needs at least " +
                                                                std::to_string(d_y + rest_extra) + " units");
        }
    }
}

double default_offset(const RowVector& values) { return std::min(0.0, values.minCoeff()) - 1.0; }

bool is_spurious(const LinearFit& fit) { return fit.V.norm() > kResidualThreshold; }

struct Normalized {
    PiecewiseLinearActivation act;  // activation the builders work with
    TurningPoint tp;
    bool reflected;
};

/// Moves a kink with s+ = 0 to the right-hand side by reflecting h.
Normalized normalize(const PiecewiseLinearActivation& act, const TurningPoint& tp) {
    if (tp.s_plus != 0.0) return {act, tp, false};
    TurningPoint r{0.0 - tp.t, 0.0 - tp.s_plus, 0.0 - tp.s_minus, tp.sigma, tp.h_at_t};
    return {act.reflected(), r, true};
}

TurningPoint two_piece_kink(const PiecewiseLinearActivation& act) {
    if (!act.is_two_piece()) throw LandscapeError(ErrorCode::InvalidActivation, "activation is not two-piece");
    if (act.is_linear()) throw LandscapeError(ErrorCode::InvalidActivation, "activation is linear");
    return TurningPoint{0.0, act.slopes()[0], act.slopes()[1], kUnboundedSigma, 0.0};
}

/// Minimum of the two-piece network h_{s-,s+} with s+ != 0: the first layer
/// shifts W~ x by -eta so every pre-activation is positive, later layers pass
/// the first d_Y + 1 units through.
Mlp minimum_net(const LinearFit& fit, const std::vector<Index>& dims, double s_minus, double s_plus, double eta) {
    const std::size_t L = dims.size() - 1;
    const Index d_y = fit.d_y();
    std::vector<Matrix> W;
    std::vector<Vector> b;

    Matrix W1 = Matrix::Zero(dims[1], dims[0]);
    W1.topRows(d_y) = fit.weights();
    Vector b1 = Vector::Constant(dims[1], -eta);
    b1.head(d_y) = fit.intercept().array() - eta;
    W.push_back(std::move(W1));
    b.push_back(std::move(b1));

    for (std::size_t k = 2; k < L; ++k) {
        Matrix Wk = Matrix::Zero(dims[k], dims[k - 1]);
        for (Index j = 0; j < dims[k]; ++j) Wk(j, std::min(j, d_y)) = 1.0 / s_plus;
        W.push_back(std::move(Wk));
        b.push_back(Vector::Zero(dims[k]));
    }

    Matrix WL = Matrix::Zero(d_y, dims[L - 1]);
    WL.leftCols(d_y) = Matrix::Identity(d_y, d_y) / s_plus;
    W.push_back(std::move(WL));
    b.push_back(Vector::Constant(d_y, eta));
    return Mlp(std::move(W), std::move(b), two_piece(s_minus, s_plus));
}

struct Core {
    Mlp net;  // one hidden layer, rows of the output in the original order
    SeparationResult separation;
    DescentConstants constants;
    double eta = 0;
    std::vector<double> eta_rows;
    Index selected_row = 0;
    double predicted_decrease = 0;
};

/// One-hidden-layer point below f(W~). The first output row is split into
/// two mirrored units (three with the equal-slope layout) whose kinks sit
/// between the I and J samples.
Core descent_core(const Dataset& data, const LinearFit& fit, Index d1, double s_minus, double s_plus,
                  bool equal_slope, double alpha_start, std::optional<double> gamma_override) {
    RowSelection sel = select_nonzero_residual_row(fit);
    LinearFit pf = permuted(fit, sel.permutation);
    const Index d_x = data.d_x();
    const Index d_y = data.d_y();
    const RowVector u = pf.V.row(0);
    const RowVector v = pf.Y_tilde.row(0);

    Core core{Mlp::zeros({d_x, d1, d_y}, two_piece(s_minus, s_plus)), separate(u, v, data.X()), {}, 0, {}, sel.k, 0};
    const double ratio = equal_slope ? 1.0 : (s_plus - s_minus) / (s_plus + s_minus);
    core.constants = size_constants(core.separation, u, v, data.X(), ratio, alpha_start);
    if (gamma_override) core.constants.gamma = *gamma_override;
    const DescentConstants& c = core.constants;
    const Vector& beta = core.separation.beta;

    core.eta_rows.assign(static_cast<std::size_t>(d_y), 0.0);
    for (Index i = 1; i < d_y; ++i) core.eta_rows[static_cast<std::size_t>(i)] = default_offset(pf.Y_tilde.row(i));
    core.eta = default_offset(v);

    Matrix Wt = pf.weights();
    Vector bt = pf.intercept();
    Matrix W1 = Matrix::Zero(d1, d_x);
    Vector b1 = Vector::Zero(d1);
    Matrix W2 = Matrix::Zero(d_y, d1);
    Vector b2 = Vector::Zero(d_y);

    W1.row(0) = Wt.row(0) - c.alpha * beta.transpose();
    b1[0] = bt[0] - c.eta1 + c.gamma;
    Index mirror = equal_slope ? 2 : 1;
    W1.row(mirror) = -Wt.row(0) + c.alpha * beta.transpose();
    b1[mirror] = -bt[0] + c.eta1 + c.gamma;
    if (equal_slope) {
        W1.row(1) = Wt.row(0);
        b1[1] = bt[0] - core.eta;
        W2(0, 0) = 1.0 / (2.0 * s_plus);
        W2(0, 1) = 1.0 / s_plus;
        W2(0, 2) = -1.0 / (2.0 * s_plus);
        b2[0] = core.eta;
    } else {
        W2(0, 0) = 1.0 / (s_plus + s_minus);
        W2(0, 1) = -1.0 / (s_plus + s_minus);
        b2[0] = c.eta1;
    }
    const Index offset = mirror + 1;
    for (Index i = 1; i < d_y; ++i) {
        double eta_i = core.eta_rows[static_cast<std::size_t>(i)];
        W1.row(offset + i - 1) = Wt.row(i);
        b1[offset + i - 1] = bt[i] - eta_i;
        W2(i, offset + i - 1) = 1.0 / s_plus;
        b2[i] = eta_i;
    }

    Matrix b2m = b2;
    W2 = unpermute_rows(W2, sel.permutation);
    b2 = unpermute_rows(b2m, sel.permutation).col(0);

    double sum_i = 0;
    for (Index i : core.separation.I()) sum_i += u[i];
    core.predicted_decrease = 2.0 * c.gamma * ratio * sum_i / static_cast<double>(data.n());
    core.net = Mlp({std::move(W1), std::move(W2)}, {std::move(b1), std::move(b2)}, two_piece(s_minus, s_plus));
    return core;
}

/// Deepens a one-hidden-layer net: layer 2 reproduces its output shifted by
/// lambda > -min output, later layers pass the first d_Y units through and
/// the output layer removes the shift.
Mlp lift(const Mlp& shallow, const Dataset& data, const std::vector<Index>& dims, double s_plus, double& lambda) {
    const std::size_t L = dims.size() - 1;
    if (L == 2) {
        lambda = 0;
        return shallow;
    }
    const Index d_y = data.d_y();
    Matrix out = predict(shallow, data.X());
    lambda = std::max(0.0, -out.minCoeff()) + 1.0;

    std::vector<Matrix> W{shallow.weight(0)};
    std::vector<Vector> b{shallow.bias(0)};

    Matrix W2 = Matrix::Zero(dims[2], dims[1]);
    W2.topRows(d_y) = shallow.weight(1);
    Vector b2 = Vector::Constant(dims[2], lambda);
    b2.head(d_y) += shallow.bias(1);
    W.push_back(std::move(W2));
    b.push_back(std::move(b2));

    for (std::size_t k = 3; k < L; ++k) {
        Matrix Wk = Matrix::Zero(dims[k], dims[k - 1]);
        Wk.topLeftCorner(d_y, d_y) = Matrix::Identity(d_y, d_y) / s_plus;
        W.push_back(std::move(Wk));
        b.push_back(Vector::Zero(dims[k]));
    }

    Matrix WL = Matrix::Zero(d_y, dims[L - 1]);
    WL.leftCols(d_y) = Matrix::Identity(d_y, d_y) / s_plus;
    W.push_back(std::move(WL));
    b.push_back(Vector::Constant(d_y, -lambda));
    return Mlp(std::move(W), std::move(b), shallow.activation());
}

double admissible_scale(const Matrix& pre, double sigma) { return std::max(1.0, 2.0 * pre.norm() / sigma); }

CertifiedPoint make_point(const Dataset& data, const LinearFit& fit, Mlp net, PointKind kind, Stage stage,
                          ConstructionParams params) {
    double risk = empirical_risk(net, data, fit.loss);
    return CertifiedPoint{std::move(net), kind, stage, risk, fit.risk, is_spurious(fit), std::move(params)};
}

template <class Build>
CertifiedPoint search_descent(const LinearFit& fit, const DescentOptions& options, Build&& build_at) {
    if (options.gamma) return build_at(options.alpha_start);
    double alpha = options.alpha_start;
    for (int attempt = 0; attempt <= 200; ++attempt) {
        CertifiedPoint p = build_at(alpha);
        double decrease = fit.risk - p.risk;
        if (decrease > 0 && decrease >= 0.5 * p.params.predicted_decrease) return p;
        alpha = p.params.constants->alpha * 0.5;
    }
    throw LandscapeError(ErrorCode::StrictDecreaseNotAchieved, "risk did not drop below f(W~) for any alpha");
}

ConstructionParams core_params(const Core& core, const Normalized& norm) {
    ConstructionParams params;
    params.eta = core.eta;
    params.eta_rows = core.eta_rows;
    params.turning = norm.tp;
    params.reflected = norm.reflected;
    params.selected_row = core.selected_row;
    params.separation = core.separation;
    params.constants = core.constants;
    params.predicted_decrease = core.predicted_decrease;
    return params;
}

}  // namespace

Mlp reflect_hidden(const Mlp& net, const PiecewiseLinearActivation& act) {
    std::vector<Matrix> W = net.weights();
    std::vector<Vector> b = net.biases();
    for (std::size_t k = 0; k + 1 < W.size(); ++k) {
        W[k] = -W[k];
        b[k] = -b[k];
    }
    return Mlp(std::move(W), std::move(b), act);
}

Mlp embed_at_turning_point(const Mlp& net, const PiecewiseLinearActivation& act, const TurningPoint& tp,
                           const std::vector<double>& scales) {
    const std::size_t L = net.num_layers();
    if (scales.size() != L - 1) throw LandscapeError(ErrorCode::ShapeMismatch, "one scale per hidden layer");
    std::vector<Matrix> W;
    std::vector<Vector> b;
    for (std::size_t k = 0; k < L; ++k) {
        const Matrix& Wk = net.weight(k);
        const Vector& bk = net.bias(k);
        double in_scale = k == 0 ? 1.0 : scales[k - 1];
        double out_scale = k + 1 < L ? scales[k] : 1.0;
        double shift = k + 1 < L ? tp.t : 0.0;
        Matrix Wn = (out_scale / in_scale) * Wk;
        Vector bn = out_scale * bk + Vector::Constant(bk.size(), shift);
        if (k > 0) bn -= Wn * Vector::Constant(Wk.cols(), tp.h_at_t);
        W.push_back(std::move(Wn));
        b.push_back(std::move(bn));
    }
    return Mlp(std::move(W), std::move(b), act);
}

CertifiedPoint build_minimum_two_piece(const Dataset& data, const LinearFit& fit, const std::vector<Index>& dims,
                                       const PiecewiseLinearActivation& act, const MinimumOptions& options) {
    check_dims(data, fit, dims, 1, 1);
    Normalized norm = normalize(act, two_piece_kink(act));
    ConstructionParams params;
    double floor = std::min(0.0, fit.Y_tilde.minCoeff());
    params.eta = options.eta.value_or(floor - 1.0);
    if (!(params.eta < floor)) {
        throw LandscapeError(ErrorCode::PreconditionViolated, "eta must lie below min(0, min Y~)");
    }
    params.turning = norm.tp;
    params.reflected = norm.reflected;
    Mlp net = minimum_net(fit, dims, norm.tp.s_minus, norm.tp.s_plus, params.eta);
    if (norm.reflected) net = reflect_hidden(net, act);
    return make_point(data, fit, std::move(net), PointKind::Minimum, dims.size() == 3 ? Stage::S1 : Stage::S2,
                      std::move(params));
}

CertifiedPoint build_minimum(const Dataset& data, const LinearFit& fit, const std::vector<Index>& dims,
                             const PiecewiseLinearActivation& act, const MinimumOptions& options) {
    check_dims(data, fit, dims, 1, 1);
    TurningPoint kink;
    if (options.any_kink) {
        std::optional<TurningPoint> any = find_any_kink(act);
        if (!any) throw LandscapeError(ErrorCode::InvalidActivation, "activation is linear; no turning point");
        kink = *any;
    } else {
        kink = find_turning_point(act);
    }
    Normalized norm = normalize(act, kink);
    const std::size_t L = dims.size() - 1;

    ConstructionParams params;
    double floor = std::min(0.0, fit.Y_tilde.minCoeff());
    params.eta = options.eta.value_or(floor - 1.0);
    if (!(params.eta < floor)) {
        throw LandscapeError(ErrorCode::PreconditionViolated, "eta must lie below min(0, min Y~)");
    }
    if (!(options.M_multiplier >= 1.0)) throw LandscapeError(ErrorCode::PreconditionViolated, "M multiplier below 1");
    params.alpha_scales = options.alpha_scales;
    if (params.alpha_scales.empty()) params.alpha_scales.assign(L - 2, 0.5);
    if (params.alpha_scales.size() != L - 2) {
        throw LandscapeError(ErrorCode::ShapeMismatch, "need one alpha scale per hidden layer after the first");
    }
    for (double a : params.alpha_scales) {
        if (!(a > 0 && a <= 1)) throw LandscapeError(ErrorCode::PreconditionViolated, "alpha scales lie in (0, 1]");
    }

    Mlp base = minimum_net(fit, dims, norm.tp.s_minus, norm.tp.s_plus, params.eta);
    Matrix pre1 = forward(base, data.X()).pre[0];
    params.M = admissible_scale(pre1, norm.tp.sigma) * options.M_multiplier;
    params.scales.push_back(1.0 / params.M);
    for (double a : params.alpha_scales) params.scales.push_back(params.scales.back() * a);
    params.turning = norm.tp;
    params.reflected = norm.reflected;

    Mlp net = embed_at_turning_point(base, norm.act, norm.tp, params.scales);
    if (norm.reflected) net = reflect_hidden(net, act);
    return make_point(data, fit, std::move(net), PointKind::Minimum, Stage::S3, std::move(params));
}

CertifiedPoint build_descent_two_piece(const Dataset& data, const LinearFit& fit, const std::vector<Index>& dims,
                                       const PiecewiseLinearActivation& act, const DescentOptions& options) {
    check_dims(data, fit, dims, 1, 0);
    TurningPoint kink = two_piece_kink(act);
    if (kink.s_minus + kink.s_plus == 0.0) {
        throw LandscapeError(ErrorCode::NoAdmissibleTurningPoint, "s- + s+ = 0; use the equal-slope route");
    }
    Normalized norm = normalize(act, kink);
    const Stage stage = dims.size() == 3 ? Stage::S1 : Stage::S2;

    return search_descent(fit, options, [&](double alpha) {
        Core core = descent_core(data, fit, dims[1], norm.tp.s_minus, norm.tp.s_plus, false, alpha, options.gamma);
        ConstructionParams params = core_params(core, norm);
        Mlp net = lift(core.net, data, dims, norm.tp.s_plus, params.lambda);
        if (norm.reflected) net = reflect_hidden(net, act);
        return make_point(data, fit, std::move(net), PointKind::DescentWitness, stage, std::move(params));
    });
}

namespace {

CertifiedPoint embedded_descent(const Dataset& data, const LinearFit& fit, const std::vector<Index>& dims,
                                const PiecewiseLinearActivation& act, const Normalized& norm, bool equal_slope,
                                Stage stage, const DescentOptions& options) {
    if (!(options.M_multiplier >= 1.0 && options.M_tilde_multiplier >= 1.0)) {
        throw LandscapeError(ErrorCode::PreconditionViolated, "M multipliers below 1");
    }
    return search_descent(fit, options, [&](double alpha) {
        Core core = descent_core(data, fit, dims[1], norm.tp.s_minus, norm.tp.s_plus, equal_slope, alpha,
                                 options.gamma);
        ConstructionParams params = core_params(core, norm);
        Mlp base = lift(core.net, data, dims, norm.tp.s_plus, params.lambda);

        ForwardTrace trace = forward(base, data.X());
        params.M = admissible_scale(trace.pre[0], norm.tp.sigma) * options.M_multiplier;
        params.scales.push_back(1.0 / params.M);
        if (dims.size() > 3) {
            params.M_tilde =
                admissible_scale(trace.pre[1] / params.M, norm.tp.sigma) * options.M_tilde_multiplier;
            params.scales.resize(dims.size() - 2, 1.0 / (params.M * params.M_tilde));
        }
        Mlp net = embed_at_turning_point(base, norm.act, norm.tp, params.scales);
        if (norm.reflected) net = reflect_hidden(net, act);
        return make_point(data, fit, std::move(net), PointKind::DescentWitness, stage, std::move(params));
    });
}

}  // namespace

CertifiedPoint build_descent(const Dataset& data, const LinearFit& fit, const std::vector<Index>& dims,
                             const PiecewiseLinearActivation& act, const DescentOptions& options) {
    check_dims(data, fit, dims, 1, 0);
    Normalized norm = normalize(act, find_turning_point(act));
    return embedded_descent(data, fit, dims, act, norm, false, Stage::S3, options);
}

CertifiedPoint build_equal_slope_descent(const Dataset& data, const LinearFit& fit, const std::vector<Index>& dims,
                                         const PiecewiseLinearActivation& act, const DescentOptions& options) {
    check_dims(data, fit, dims, 2, 1);
    std::optional<TurningPoint> kink = find_equal_slope_kink(act);
    if (!kink) throw LandscapeError(ErrorCode::PreconditionViolated, "activation has no kink with s- = -s+");
    Normalized norm{act, *kink, false};
    return embedded_descent(data, fit, dims, act, norm, true, Stage::EqualSlope, options);
}

std::vector<CertifiedPoint> enumerate_family(const Dataset& data, const LinearFit& fit,
                                             const std::vector<Index>& dims, const PiecewiseLinearActivation& act,
                                             int count, std::uint64_t seed, bool any_kink) {
    std::vector<CertifiedPoint> family;
    const double floor = std::min(0.0, fit.Y_tilde.minCoeff());
    for (int member = 0; member < count; ++member) {
        MinimumOptions options;
        options.any_kink = any_kink;
        if (member > 0) {
            std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(member));
            std::uniform_real_distribution<double> eta_shift(0.0, 10.0), m_factor(1.0, 5.0), scale(0.1, 0.9);
            options.eta = floor - 1.0 - eta_shift(rng);
            options.M_multiplier = m_factor(rng);
            for (std::size_t k = 0; k + 3 < dims.size(); ++k) options.alpha_scales.push_back(scale(rng));
        }
        family.push_back(build_minimum(data, fit, dims, act, options));
    }
    return family;
}

}  // namespace landscape
