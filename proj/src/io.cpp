#include "landscape/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "landscape/errors.hpp"

namespace landscape {

using Index = Eigen::Index;

Json to_json(const Matrix& M) {
    Json rows = Json::array();
    for (Index r = 0; r < M.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array()) throw LandscapeError(ErrorCode::Parse, "matrix must be an array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
    Matrix M(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw LandscapeError(ErrorCode::Parse, "ragged matrix");
        }
        for (Index c = 0; c < cols; ++c) M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return M;
}

namespace {

Json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const Json& j) {
    auto values = j.get<std::vector<double>>();
    return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
}

template <class F>
auto parse_guard(F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw LandscapeError(ErrorCode::Parse, e.what());
    }
}

}  // namespace

Json to_json(const PiecewiseLinearActivation& act) {
    return Json{{"breakpoints", act.breakpoints()}, {"slopes", act.slopes()}, {"anchor", act.anchor()}};
}

PiecewiseLinearActivation activation_from_json(const Json& j) {
    return parse_guard([&] {
        return PiecewiseLinearActivation(j.at("breakpoints").get<std::vector<double>>(),
                                         j.at("slopes").get<std::vector<double>>(), j.at("anchor").get<double>());
    });
}

Json to_json(const Mlp& net) {
    Json layers = Json::array();
    for (std::size_t k = 0; k < net.num_layers(); ++k) {
        layers.push_back(Json{{"W", to_json(net.weight(k))}, {"b", vector_json(net.bias(k))}});
    }
    return Json{{"activation", to_json(net.activation())}, {"layers", std::move(layers)}};
}

Mlp mlp_from_json(const Json& j) {
    return parse_guard([&] {
        std::vector<Matrix> W;
        std::vector<Vector> b;
        for (const Json& layer : j.at("layers")) {
            W.push_back(matrix_from_json(layer.at("W")));
            b.push_back(vector_from_json(layer.at("b")));
        }
        return Mlp(std::move(W), std::move(b), activation_from_json(j.at("activation")));
    });
}

Json to_json(const LinearFit& fit) {
    return Json{{"loss", to_string(fit.loss)},
                {"W_tilde", to_json(fit.W_tilde)},
                {"risk", fit.risk},
                {"grad_norm", fit.grad_norm},
                {"V", to_json(fit.V)},
                {"iterations", fit.iterations},
                {"unbounded_suspected", fit.unbounded_suspected}};
}

Json to_json(const SeparationResult& sep) {
    return Json{{"I", sep.I()},
                {"J", sep.J()},
                {"beta", vector_json(sep.beta)},
                {"l_prime", sep.l_prime},
                {"group_bounds", sep.group_bounds},
                {"t_group", sep.t_group},
                {"trivial_branch", sep.trivial_branch}};
}

Json to_json(const CertifiedPoint& point) {
    const ConstructionParams& p = point.params;
    Json params{{"eta", p.eta},
                {"eta_rows", p.eta_rows},
                {"lambda", p.lambda},
                {"M", p.M},
                {"M_tilde", p.M_tilde},
                {"alpha_scales", p.alpha_scales},
                {"scales", p.scales},
                {"reflected", p.reflected},
                {"selected_row", p.selected_row},
                {"predicted_decrease", p.predicted_decrease}};
    params["turning"] = p.turning ? Json{{"t", p.turning->t},
                                          {"s_minus", p.turning->s_minus},
                                          {"s_plus", p.turning->s_plus},
                                          {"sigma", p.turning->sigma},
                                          {"h_at_t", p.turning->h_at_t}}
                                   : Json(nullptr);
    params["separation"] = p.separation ? to_json(*p.separation) : Json(nullptr);
    params["constants"] = p.constants ? Json{{"alpha", p.constants->alpha},
                                              {"gamma", p.constants->gamma},
                                              {"eta1", p.constants->eta1},
                                              {"gap", p.constants->gap},
                                              {"margin", p.constants->margin}}
                                       : Json(nullptr);
    return Json{{"kind", to_string(point.kind)},   {"stage", to_string(point.stage)},
                {"risk", point.risk},              {"baseline_risk", point.baseline_risk},
                {"spurious", point.spurious},      {"params", std::move(params)},
                {"net", to_json(point.net)}};
}

Json to_json(const Check& check) {
    return Json{{"name", check.name},           {"passed", check.passed},   {"measured", check.measured},
                {"tolerance", check.tolerance}, {"samples", check.samples}, {"seed", check.seed}};
}

Json to_json(const Certificate& cert) {
    Json checks = Json::array();
    for (const Check& c : cert.checks) checks.push_back(to_json(c));
    return Json{{"subject", cert.subject}, {"checks", std::move(checks)}, {"warnings", cert.warnings},
                {"verdict", cert.verdict()}};
}

Json run_length_encode(const Matrix& M) {
    Json runs = Json::array();
    for (Index r = 0; r < M.rows(); ++r) {
        for (Index c = 0; c < M.cols(); ++c) {
            if (!runs.empty() && runs.back()[0].get<double>() == M(r, c)) {
                runs.back()[1] = runs.back()[1].get<long long>() + 1;
            } else {
                runs.push_back(Json::array({M(r, c), 1}));
            }
        }
    }
    return Json{{"rows", M.rows()}, {"cols", M.cols()}, {"runs", std::move(runs)}};
}

Matrix run_length_decode(const Json& j) {
    return parse_guard([&] {
        Matrix M(j.at("rows").get<Index>(), j.at("cols").get<Index>());
        Index pos = 0;
        for (const Json& run : j.at("runs")) {
            double value = run.at(0).get<double>();
            for (long long c = run.at(1).get<long long>(); c > 0; --c, ++pos) {
                if (pos >= M.size()) throw LandscapeError(ErrorCode::Parse, "run-length data overflows the matrix");
                M(pos / M.cols(), pos % M.cols()) = value;
            }
        }
        if (pos != M.size()) throw LandscapeError(ErrorCode::Parse, "run-length data is short");
        return M;
    });
}

Json to_json(const CellSignature& sig) {
    Json patterns = Json::array();
    for (const Matrix& A : sig.patterns) patterns.push_back(run_length_encode(A));
    Json boundary = Json::array();
    for (const BoundaryHit& hit : sig.boundary) boundary.push_back({hit.layer + 1, hit.unit, hit.sample});
    return Json{{"patterns", std::move(patterns)}, {"boundary", std::move(boundary)}, {"interior", sig.interior()}};
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LandscapeError(ErrorCode::Io, "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw LandscapeError(ErrorCode::Parse, path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LandscapeError(ErrorCode::Io, "cannot write " + path);
    out << text;
    if (!out) throw LandscapeError(ErrorCode::Io, "write to " + path + " failed");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        auto first = field.find_first_not_of(" \t\r");
        auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& text, std::size_t line_no) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw LandscapeError(ErrorCode::Parse, "line " + std::to_string(line_no) + ": '" + text + "' is not a number");
    }
    return value;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LandscapeError(ErrorCode::Io, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw LandscapeError(ErrorCode::Parse, path + " is empty");
    std::vector<std::string> header = split_csv_line(line);
    std::size_t d_x = 0, d_y = 0;
    for (const std::string& name : header) {
        if (name.size() < 2 || (name[0] != 'x' && name[0] != 'y')) {
            throw LandscapeError(ErrorCode::Parse, "header column '" + name + "' is neither x* nor y*");
        }
        if (name[0] == 'x') {
            if (d_y > 0) throw LandscapeError(ErrorCode::Parse, "feature columns must precede label columns");
            ++d_x;
        } else {
            ++d_y;
        }
    }
    if (d_x == 0 || d_y == 0) throw LandscapeError(ErrorCode::Parse, "need at least one x and one y column");

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw LandscapeError(ErrorCode::Parse, "line " + std::to_string(line_no) + " has " +
                                                       std::to_string(fields.size()) + " fields");
        }
        std::vector<double> row;
        for (const std::string& f : fields) row.push_back(parse_number(f, line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw LandscapeError(ErrorCode::Parse, path + " has no samples");

    const Index n = static_cast<Index>(rows.size());
    Matrix X(static_cast<Index>(d_x), n), Y(static_cast<Index>(d_y), n);
    for (Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        for (std::size_t r = 0; r < d_x; ++r) X(static_cast<Index>(r), i) = row[r];
        for (std::size_t r = 0; r < d_y; ++r) Y(static_cast<Index>(r), i) = row[d_x + r];
    }
    return Dataset(std::move(X), std::move(Y));
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::ostringstream out;
    for (Index r = 0; r < data.d_x(); ++r) out << (r ? "," : "") << 'x' << r;
    for (Index r = 0; r < data.d_y(); ++r) out << ",y" << r;
    out << '\n';
    for (Index i = 0; i < data.n(); ++i) {
        for (Index r = 0; r < data.d_x(); ++r) out << (r ? "," : "") << Json(data.X()(r, i)).dump();
        for (Index r = 0; r < data.d_y(); ++r) out << ',' << Json(data.Y()(r, i)).dump();
        out << '\n';
    }
    write_text_file(path, out.str());
}

Dataset xor_dataset() {
    Matrix X(2, 4);
    X << 0, 0, 1, 1,
         0, 1, 0, 1;
    Matrix Y(1, 4);
    Y << 0, 1, 1, 0;
    return Dataset(std::move(X), std::move(Y));
}

namespace {

bool satisfies_assumptions(const Dataset& data, LossKind loss) {
    if (!data.has_distinct_columns()) return false;
    try {
        return fit_linear(data, loss).V.norm() > kResidualThreshold;
    } catch (const LandscapeError& e) {
        if (e.code() != ErrorCode::NonConvergence) throw;
        return false;
    }
}

Dataset blobs(int k, std::uint64_t seed, bool one_hot) {
    constexpr int per_cluster = 5;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.5);
    Matrix X(2, k * per_cluster);
    Matrix Y = Matrix::Zero(one_hot ? 2 : 1, k * per_cluster);
    for (int c = 0; c < k; ++c) {
        double angle = 2.0 * 3.14159265358979323846 * c / k;
        for (int s = 0; s < per_cluster; ++s) {
            Index i = c * per_cluster + s;
            X(0, i) = 3.0 * std::cos(angle) + noise(rng);
            X(1, i) = 3.0 * std::sin(angle) + noise(rng);
            if (one_hot) Y(c % 2, i) = 1.0;
            else Y(0, i) = c % 2;
        }
    }
    return Dataset(std::move(X), std::move(Y));
}

Dataset linear_data(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix X(2, 8);
    for (Index i = 0; i < X.size(); ++i) X.data()[i] = normal(rng);
    Matrix Y = (Eigen::RowVector2d(1.5, -2.0) * X).array() + 0.25;
    return Dataset(std::move(X), std::move(Y));
}

}  // namespace

Dataset gen_dataset(const std::string& spec, std::uint64_t seed, bool require_assumptions, LossKind loss) {
    auto check = [&](Dataset data) {
        if (require_assumptions && !satisfies_assumptions(data, loss)) {
            throw LandscapeError(ErrorCode::GeneratorFailure, "'" + spec + "' violates the data assumptions");
        }
        return data;
    };
    if (spec == "xor") return check(xor_dataset());
    if (spec == "linear") return check(linear_data(seed));
    if (spec.rfind("custom:", 0) == 0) return check(read_dataset_csv(spec.substr(7)));
    if (spec.rfind("blobs:", 0) == 0) {
        int k = 0;
        const std::string count = spec.substr(6);
        auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), k);
        if (ec != std::errc() || ptr != count.data() + count.size() || k < 2) {
            throw LandscapeError(ErrorCode::Parse, "blobs needs an integer cluster count >= 2");
        }
        const bool one_hot = loss == LossKind::CrossEntropy;
        for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
            Dataset data = blobs(k, seed + attempt, one_hot);
            if (!require_assumptions || satisfies_assumptions(data, loss)) return data;
        }
        throw LandscapeError(ErrorCode::GeneratorFailure, "no valid blobs draw in 10 attempts");
    }
    throw LandscapeError(ErrorCode::Parse, "unknown dataset spec '" + spec + "'");
}

}  // namespace landscape
