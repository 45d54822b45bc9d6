#include "landscape/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace landscape {

using Index = Eigen::Index;

Json to_json(const RunConfig& c) {
    return Json{{"command", c.command}, {"dataset", c.dataset},   {"dims", c.dims},
                {"activation", c.activation}, {"loss", c.loss},   {"seed", c.seed},
                {"tol", c.tol},         {"radius", c.radius},     {"samples", c.samples},
                {"steps", c.steps},     {"family_size", c.family_size}, {"corollary", c.corollary},
                {"out", c.out}};
}

RunConfig run_config_from_json(const Json& j) {
    try {
        RunConfig c;
        c.command = j.at("command").get<std::string>();
        c.dataset = j.at("dataset").get<std::string>();
        c.dims = j.at("dims").get<std::vector<Index>>();
        c.activation = j.at("activation").get<std::string>();
        c.loss = j.at("loss").get<std::string>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.tol = j.at("tol").get<double>();
        c.radius = j.at("radius").get<double>();
        c.samples = j.at("samples").get<int>();
        c.steps = j.at("steps").get<int>();
        c.family_size = j.at("family_size").get<int>();
        c.corollary = j.at("corollary").get<bool>();
        c.out = j.at("out").get<std::string>();
        return c;
    } catch (const Json::exception& e) {
        throw LandscapeError(ErrorCode::Parse, std::string("run config: ") + e.what());
    }
}

bool DemoResult::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string DemoResult::first_failure() const {
    for (const Check& c : checks) {
        if (!c.passed) return c.name;
    }
    return {};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Io:
        case ErrorCode::Parse: return 2;
        case ErrorCode::NonConvergence:
        case ErrorCode::SizingFailed:
        case ErrorCode::StrictDecreaseNotAchieved: return 1;
        default: return 3;
    }
}

namespace {

Check within(const std::string& name, double measured, double target, double tol) {
    return Check{name, std::abs(measured - target) <= tol, measured, tol, 0, 0};
}

Check at_most(const std::string& name, double measured, double tol) {
    return Check{name, measured <= tol, measured, tol, 0, 0};
}

Check flag(const std::string& name, bool value) { return Check{name, value, value ? 1.0 : 0.0, 1.0, 0, 0}; }

Json named(const std::string& name, const CertifiedPoint& p) {
    Json j = to_json(p);
    j["name"] = name;
    return j;
}

}  // namespace

DemoResult run_demo(const RunConfig& config) {
    DemoResult result;
    auto& checks = result.checks;
    Json points = Json::array();
    Json certificates = Json::array();

    const LossKind loss = loss_from_string(config.loss);
    const Dataset data = gen_dataset(config.dataset, config.seed, true, loss);
    FitOptions fit_options;
    fit_options.tol = config.tol;
    const LinearFit fit = fit_linear(data, loss, fit_options);
    const double f = fit.risk;
    const Index d_x = data.d_x(), d_y = data.d_y();

    checks.push_back(flag("baseline_stationary", stationarity_holds(fit, data)));
    checks.push_back(flag("baseline_residual_nonzero", fit.V.norm() > kResidualThreshold));

    // Stage 1: one hidden layer, ReLU.
    const std::vector<Index> shallow{d_x, d_y + 2, d_y};
    CertifiedPoint s1_min = build_minimum_two_piece(data, fit, shallow, relu());
    CertifiedPoint s1_desc = build_descent_two_piece(data, fit, shallow, relu());
    points.push_back(named("s1_minimum", s1_min));
    points.push_back(named("s1_descent", s1_desc));
    checks.push_back(within("s1_minimum_risk", s1_min.risk, f, 1e-9));
    checks.push_back(at_most("s1_output_matches_baseline",
                             (predict(s1_min.net, data.X()) - fit.Y_tilde).cwiseAbs().maxCoeff(), 1e-12));
    Certificate perturb =
        perturbation_local_min_test(s1_min.net, data, loss, config.radius, config.samples, config.seed);
    perturb.subject = "s1_minimum";
    certificates.push_back(to_json(perturb));
    for (Check c : perturb.checks) {
        c.name = "s1_" + c.name;
        checks.push_back(c);
    }
    Check s1_gap = descent_gap(s1_min, s1_desc);
    s1_gap.name = "s1_descent_gap";
    checks.push_back(s1_gap);

    // Stage 2: two hidden layers, ReLU.
    const std::vector<Index> deep{d_x, d_y + 2, d_y + 2, d_y};
    CertifiedPoint s2_min = build_minimum_two_piece(data, fit, deep, relu());
    CertifiedPoint s2_desc = build_descent_two_piece(data, fit, deep, relu());
    points.push_back(named("s2_minimum", s2_min));
    points.push_back(named("s2_descent", s2_desc));
    checks.push_back(within("s2_minimum_risk", s2_min.risk, f, 1e-9));
    Certificate s2_trace = trace_interval_check(forward(s2_min.net, data.X()), expected_intervals(s2_min));
    s2_trace.subject = "s2_minimum";
    certificates.push_back(to_json(s2_trace));
    checks.push_back(flag("s2_trace_intervals", s2_trace.verdict()));
    checks.push_back(within("s2_descent_matches_s1", s2_desc.risk, s1_desc.risk, 1e-10));

    // Stage 3: the configured activation, or the equal-slope route.
    const PiecewiseLinearActivation act = activation_from_preset(config.activation);
    if (config.corollary) {
        const std::vector<Index> wide{d_x, d_y + 3, d_y};
        MinimumOptions any;
        any.any_kink = true;
        CertifiedPoint s3_min = build_minimum(data, fit, wide, act, any);
        CertifiedPoint s3_desc = build_equal_slope_descent(data, fit, wide, act);
        points.push_back(named("s3_minimum", s3_min));
        points.push_back(named("s3_descent", s3_desc));
        checks.push_back(within("s3_minimum_risk", s3_min.risk, f, 1e-9));
        Check gap = descent_gap(s3_min, s3_desc);
        gap.name = "s3_descent_gap";
        checks.push_back(gap);
    } else {
        CertifiedPoint s3_min = build_minimum(data, fit, shallow, act);
        CertifiedPoint s3_desc = build_descent(data, fit, shallow, act);
        const TurningPoint& tp = *s3_min.params.turning;
        CertifiedPoint reference = build_descent_two_piece(
            data, fit, shallow, s3_min.params.reflected ? two_piece(-tp.s_plus, -tp.s_minus)
                                                        : two_piece(tp.s_minus, tp.s_plus));
        points.push_back(named("s3_minimum", s3_min));
        points.push_back(named("s3_descent", s3_desc));
        checks.push_back(within("s3_minimum_risk", s3_min.risk, f, 1e-9));
        Certificate s3_trace = trace_interval_check(forward(s3_min.net, data.X()), expected_intervals(s3_min));
        s3_trace.subject = "s3_minimum";
        certificates.push_back(to_json(s3_trace));
        checks.push_back(flag("s3_trace_intervals", s3_trace.verdict()));
        checks.push_back(within("s3_descent_matches_two_piece", s3_desc.risk, reference.risk, 1e-10));
        Check gap = descent_gap(s3_min, s3_desc);
        gap.name = "s3_descent_gap";
        checks.push_back(gap);
    }

    // Equal-slope route with the absolute value.
    const std::vector<Index> wide{d_x, d_y + 3, d_y};
    CertifiedPoint eq_desc = build_equal_slope_descent(data, fit, wide, absolute_value());
    points.push_back(named("equal_slope_descent", eq_desc));
    checks.push_back(Check{"equal_slope_gap", f - eq_desc.risk > kDescentGapTolerance, f - eq_desc.risk,
                           kDescentGapTolerance, 0, 0});

    // A family of minima.
    std::vector<CertifiedPoint> family =
        enumerate_family(data, fit, deep, act, config.family_size, config.seed, config.corollary);
    double min_distance = std::numeric_limits<double>::infinity();
    double worst_risk = 0;
    Json family_json = Json::array();
    for (std::size_t a = 0; a < family.size(); ++a) {
        worst_risk = std::max(worst_risk, std::abs(family[a].risk - f));
        family_json.push_back(Json{{"risk", family[a].risk},
                                   {"eta", family[a].params.eta},
                                   {"M", family[a].params.M},
                                   {"alpha_scales", family[a].params.alpha_scales}});
        for (std::size_t b = a + 1; b < family.size(); ++b) {
            min_distance = std::min(min_distance, parameter_distance(family[a].net, family[b].net));
        }
    }
    checks.push_back(Check{"family_distinct", min_distance > 1e-6, min_distance, 1e-6, config.family_size, config.seed});
    checks.push_back(at_most("family_risk", worst_risk, 1e-9));

    // Cells around the Stage-1 minimum (single output only).
    Json cells = nullptr;
    Json path_json = nullptr;
    if (d_y == 1) {
        CellSignature sig = activation_pattern(s1_min.net, data.X());
        checks.push_back(flag("cell_interior", sig.interior()));
        LiftedData lifted = lift_data(sig, data.X());
        QuotientPoint q = quotient_map(s1_min.net);
        double reformulated = reformulated_risk(q, lifted, data.Y(), loss);
        double residual = quotient_gradient_residual(q, lifted, data.Y(), loss);
        checks.push_back(at_most("cell_reformulation", std::abs(reformulated - s1_min.risk), 1e-12));
        checks.push_back(at_most("cell_gradient_residual", residual, 1e-8));
        cells = Json{{"signature", to_json(sig)}, {"reformulated_risk", reformulated}, {"gradient_residual", residual}};
        if (loss == LossKind::Squared) {
            CellOptimum opt = solve_cell_optimum(lifted, data.Y());
            checks.push_back(at_most("cell_lower_bound", opt.risk_star - s1_min.risk, 1e-12));
            cells["risk_star"] = opt.risk_star;
        }

        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> factor(0.25, 4.0);
        Vector ca(s1_min.net.weight(0).rows()), cb(ca.size());
        for (Index k = 0; k < ca.size(); ++k) ca[k] = factor(rng);
        for (Index k = 0; k < cb.size(); ++k) cb[k] = factor(rng);
        Mlp a = rescale_units(s1_min.net, ca);
        Mlp b = rescale_units(s1_min.net, cb);
        std::vector<Mlp> path = build_valley_path(a, b, config.steps);
        double deviation = 0;
        bool pattern_constant = true;
        Json curve = Json::array();
        for (const Mlp& p : path) {
            double r = empirical_risk(p, data, loss);
            deviation = std::max(deviation, std::abs(r - s1_min.risk));
            pattern_constant = pattern_constant && activation_pattern(p, data.X()) == sig;
            curve.push_back(r);
        }
        checks.push_back(at_most("valley_path_risk", deviation, 1e-10));
        checks.push_back(flag("valley_path_pattern", pattern_constant));
        path_json = Json{{"points", path.size()}, {"risk", std::move(curve)}};
    }

    // Linear collapse against a ReLU control.
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal;
    Matrix probe(2, 8);
    for (Index i = 0; i < probe.size(); ++i) probe.data()[i] = normal(rng);
    checks.push_back(flag("linear_collapse", linear_collapse_check(linear_activation(1.0), probe, 4, 50, config.seed)));
    checks.push_back(flag("relu_has_many_cells", !linear_collapse_check(relu(), probe, 4, 50, config.seed)));

    Json check_json = Json::array();
    for (const Check& c : checks) check_json.push_back(to_json(c));
    result.report = Json{{"config", to_json(config)},
                         {"fit", to_json(fit)},
                         {"points", std::move(points)},
                         {"family", std::move(family_json)},
                         {"certificates", std::move(certificates)},
                         {"cells", std::move(cells)},
                         {"path", std::move(path_json)},
                         {"checks", std::move(check_json)},
                         {"verdict", result.ok()}};
    return result;
}

}  // namespace landscape
