#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "landscape/assumptions.hpp"
#include "landscape/pipeline.hpp"

using namespace landscape;

namespace {

void emit(const std::string& out, const Json& j) {
    if (out.empty()) std::cout << dump(j);
    else write_text_file(out, dump(j));
}

Mlp load_net(const std::string& path) {
    Json j = read_json_file(path);
    if (j.contains("layers")) return mlp_from_json(j);
    if (j.contains("net")) return mlp_from_json(j.at("net"));
    throw LandscapeError(ErrorCode::Parse, path + " holds no network");
}

Json with_config(Json payload, const RunConfig& config) {
    payload["config"] = to_json(config);
    return payload;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Construct and certify spurious local minima of piecewise linear networks"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig config;
    config.command.clear();
    std::string data_path, net_path, a_path, b_path, cert_out, csv_out, input_path;
    bool assumptions = false;
    std::optional<double> eta, gamma;

    app.add_option("--seed", config.seed, "random seed");
    app.add_option("--tol", config.tol, "gradient tolerance of the baseline fit");
    app.add_option("--out", config.out, "output file (stdout when omitted)");

    auto* gen = app.add_subcommand("gen-data", "generate a dataset as CSV");
    gen->add_option("--spec", config.dataset, "xor | blobs:<k> | linear | custom:<csv>");
    gen->add_option("--loss", config.loss, "squared | ce");
    gen->add_flag("--assumptions", assumptions, "require distinct samples and a nonzero linear residual");

    auto* fit_cmd = app.add_subcommand("fit", "fit the linear baseline");
    auto* construct = app.add_subcommand("construct", "build a local minimum");
    auto* descend = app.add_subcommand("descend", "build a point below the baseline risk");
    for (auto* sub : {fit_cmd, construct, descend}) {
        sub->add_option("--data", data_path, "dataset CSV")->required();
        sub->add_option("--loss", config.loss, "squared | ce");
    }
    for (auto* sub : {construct, descend}) {
        sub->add_option("--dims", config.dims, "layer widths, e.g. 2,3,1")->delimiter(',')->required();
        sub->add_option("--act", config.activation, "relu | leaky:<s> | abs | threepiece | twopiece:<a>,<b> | ...");
        sub->add_flag("--corollary", config.corollary, "use the equal-slope route");
    }
    construct->add_option("--eta", eta, "first-layer offset");
    descend->add_option("--gamma", gamma, "fix gamma instead of sizing it");

    auto* verify = app.add_subcommand("verify", "perturbation test of a network");
    verify->add_option("--net", net_path, "network or point JSON")->required();
    verify->add_option("--data", data_path, "dataset CSV")->required();
    verify->add_option("--loss", config.loss, "squared | ce");
    verify->add_option("--radius", config.radius, "relative perturbation radius");
    verify->add_option("--samples", config.samples, "number of perturbations");
    verify->add_option("--cert-out", cert_out, "certificate file");

    auto* cells = app.add_subcommand("cells", "activation-pattern cells");
    cells->require_subcommand(1);
    auto* analyze = cells->add_subcommand("analyze", "pattern, quotient and in-cell optimum of a net");
    analyze->add_option("--net", net_path, "network or point JSON")->required();
    analyze->add_option("--data", data_path, "dataset CSV")->required();
    analyze->add_option("--loss", config.loss, "squared | ce");

    auto* path_cmd = app.add_subcommand("path", "valley paths");
    path_cmd->require_subcommand(1);
    auto* build = path_cmd->add_subcommand("build", "risk-invariant path between equivalent nets");
    build->add_option("--a", a_path, "first net")->required();
    build->add_option("--b", b_path, "second net")->required();
    build->add_option("--steps", config.steps, "points per move");
    build->add_option("--data", data_path, "dataset CSV for the risk curve");
    build->add_option("--loss", config.loss, "squared | ce");
    build->add_option("--csv", csv_out, "write the path risk curve as CSV");

    auto* sep = app.add_subcommand("separate", "run the separation lemma on {u, v, xs}");
    sep->add_option("--json", input_path, "input JSON")->required();

    auto* demo = app.add_subcommand("demo", "full XOR pipeline with certificates");
    demo->add_option("--act", config.activation, "activation for the general stage");
    demo->add_flag("--corollary", config.corollary, "use the equal-slope route for the general stage");
    demo->add_option("--radius", config.radius, "relative perturbation radius");
    demo->add_option("--samples", config.samples, "number of perturbations");
    demo->add_option("--steps", config.steps, "valley path points per move");
    demo->add_option("--family", config.family_size, "number of family members");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            config.command = "gen-data";
            Dataset data = gen_dataset(config.dataset, config.seed, assumptions, loss_from_string(config.loss));
            if (config.out.empty()) throw LandscapeError(ErrorCode::Io, "gen-data needs --out");
            write_dataset_csv(config.out, data);
            return 0;
        }
        if (*fit_cmd || *construct || *descend) {
            config.dataset = "custom:" + data_path;
            Dataset data = read_dataset_csv(data_path);
            LossKind loss = loss_from_string(config.loss);
            FitOptions options;
            options.tol = config.tol;
            LinearFit fit = fit_linear(data, loss, options);
            if (*fit_cmd) {
                config.command = "fit";
                emit(config.out, with_config(to_json(fit), config));
                return 0;
            }
            PiecewiseLinearActivation act = activation_from_preset(config.activation);
            AssumptionReport report = check_assumptions(data, config.dims, act, loss);
            CertifiedPoint point = [&] {
                if (*construct) {
                    config.command = "construct";
                    MinimumOptions m;
                    m.eta = eta;
                    m.any_kink = config.corollary;
                    if (act.is_two_piece() && !config.corollary) return build_minimum_two_piece(data, fit, config.dims, act, m);
                    return build_minimum(data, fit, config.dims, act, m);
                }
                config.command = "descend";
                DescentOptions d;
                d.gamma = gamma;
                if (config.corollary) return build_equal_slope_descent(data, fit, config.dims, act, d);
                if (act.is_two_piece()) return build_descent_two_piece(data, fit, config.dims, act, d);
                return build_descent(data, fit, config.dims, act, d);
            }();
            Json j = to_json(point);
            j["assumptions"] = Json{{"not_linearly_fittable", report.not_linearly_fittable},
                                    {"distinct_samples", report.distinct_samples},
                                    {"hidden_wider_than_output", report.hidden_wider_than_output},
                                    {"admissible_turning_point", report.admissible_turning_point},
                                    {"corollary_widths", report.corollary_widths},
                                    {"linear_residual", report.linear_residual}};
            emit(config.out, with_config(std::move(j), config));
            return 0;
        }
        if (*verify) {
            config.command = "verify";
            config.dataset = "custom:" + data_path;
            Dataset data = read_dataset_csv(data_path);
            Mlp net = load_net(net_path);
            Certificate cert = perturbation_local_min_test(net, data, loss_from_string(config.loss), config.radius,
                                                           config.samples, config.seed);
            cert.subject = net_path;
            Json j = with_config(to_json(cert), config);
            if (!cert_out.empty()) write_text_file(cert_out, dump(j));
            else emit(config.out, j);
            return cert.verdict() ? 0 : 1;
        }
        if (*analyze) {
            config.command = "cells analyze";
            config.dataset = "custom:" + data_path;
            Dataset data = read_dataset_csv(data_path);
            LossKind loss = loss_from_string(config.loss);
            Mlp net = load_net(net_path);
            CellSignature sig = activation_pattern(net, data.X());
            Json j{{"signature", to_json(sig)}, {"risk", empirical_risk(net, data, loss)}};
            if (net.num_layers() == 2 && data.d_y() == 1 && sig.interior()) {
                LiftedData lifted = lift_data(sig, data.X());
                QuotientPoint q = quotient_map(net);
                j["w_hat"] = std::vector<double>(q.w_hat.data(), q.w_hat.data() + q.w_hat.size());
                j["reformulated_risk"] = reformulated_risk(q, lifted, data.Y(), loss);
                j["gradient_residual"] = quotient_gradient_residual(q, lifted, data.Y(), loss);
                if (loss == LossKind::Squared) j["risk_star"] = solve_cell_optimum(lifted, data.Y()).risk_star;
            }
            emit(config.out, with_config(std::move(j), config));
            return 0;
        }
        if (*build) {
            config.command = "path build";
            std::vector<Mlp> path = build_valley_path(load_net(a_path), load_net(b_path), config.steps);
            Json j{{"points", path.size()}};
            if (!data_path.empty()) {
                config.dataset = "custom:" + data_path;
                Dataset data = read_dataset_csv(data_path);
                LossKind loss = loss_from_string(config.loss);
                std::string csv = "index,risk\n";
                Json curve = Json::array();
                for (std::size_t k = 0; k < path.size(); ++k) {
                    double r = empirical_risk(path[k], data, loss);
                    curve.push_back(r);
                    csv += std::to_string(k) + "," + Json(r).dump() + "\n";
                }
                j["risk"] = std::move(curve);
                if (!csv_out.empty()) write_text_file(csv_out, csv);
            }
            Json nets = Json::array();
            for (const Mlp& p : path) nets.push_back(to_json(p));
            j["path"] = std::move(nets);
            emit(config.out, with_config(std::move(j), config));
            return 0;
        }
        if (*sep) {
            config.command = "separate";
            Json in = read_json_file(input_path);
            RowVector u, v;
            Matrix xs;
            try {
                auto uu = in.at("u").get<std::vector<double>>();
                auto vv = in.at("v").get<std::vector<double>>();
                u = Eigen::Map<RowVector>(uu.data(), static_cast<Eigen::Index>(uu.size()));
                v = Eigen::Map<RowVector>(vv.data(), static_cast<Eigen::Index>(vv.size()));
                xs = matrix_from_json(in.at("xs"));
            } catch (const Json::exception& e) {
                throw LandscapeError(ErrorCode::Parse, e.what());
            }
            SeparationResult res = separate(u, v, xs);
            emit(config.out, with_config(to_json(res), config));
            return 0;
        }
        if (*demo) {
            config.command = "demo";
            DemoResult result = run_demo(config);
            emit(config.out, result.report);
            if (!result.ok()) {
                std::cerr << "check failed: " << result.first_failure() << "\n";
                return 1;
            }
            return 0;
        }
    } catch (const LandscapeError& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e.code());
    }
    return 0;
}
