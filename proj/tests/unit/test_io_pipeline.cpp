#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "landscape/errors.hpp"
#include "landscape/io.hpp"
#include "landscape/pipeline.hpp"
#include "oracles.hpp"

using namespace landscape;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "landscape_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const LandscapeError& e) {
        return e.code();
    }
    return ErrorCode::AssumptionViolated;
}

}  // namespace

TEST_CASE("networks round-trip through JSON bit for bit") {
    std::mt19937_64 rng(23);
    Mlp net({oracle::gaussian(3, 2, rng), oracle::gaussian(1, 3, rng)},
            {oracle::gaussian(3, 1, rng), oracle::gaussian(1, 1, rng)},
            PiecewiseLinearActivation({-0.1, 2.5}, {0.3, 1.0 / 3.0, -2.0}, 0.7));
    Json j = to_json(net);
    Mlp back = mlp_from_json(Json::parse(j.dump()));
    CHECK(back.parameters() == net.parameters());
    CHECK(back.activation() == net.activation());
    CHECK(to_json(back).dump() == j.dump());
    CHECK(j["layers"][0]["W"].size() == 3);
    CHECK(j["layers"][0]["W"][0].size() == 2);
    CHECK(code_of([] { mlp_from_json(Json::parse(R"({"layers": 3})")); }) == ErrorCode::Parse);
    CHECK(code_of([] { matrix_from_json(Json::parse("[[1, 2], [3]]")); }) == ErrorCode::Parse);
}

TEST_CASE("run-length encoding of patterns") {
    Matrix A(2, 5);
    A << 1, 1, 1, 0, 0,
         0.2, 0.2, 1, 1, 1;
    Json j = run_length_encode(A);
    CHECK(run_length_decode(j) == A);
    CHECK(j["runs"].size() == 4);
    Matrix empty(0, 0);
    CHECK(run_length_decode(run_length_encode(empty)).size() == 0);
    Json bad = j;
    bad["runs"][0][1] = 9;
    CHECK(code_of([&] { run_length_decode(bad); }) == ErrorCode::Parse);
}

TEST_CASE("dataset CSV round trip and errors") {
    Dataset data = gen_dataset("blobs:3", 4, true);
    auto path = scratch("blobs.csv");
    write_dataset_csv(path.string(), data);
    Dataset back = read_dataset_csv(path.string());
    CHECK(back.X() == data.X());
    CHECK(back.Y() == data.Y());

    auto bad = scratch("bad.csv");
    write(bad, "x0,x1,y0\n0,0,1\n1,oops,0\n");
    CHECK(code_of([&] { read_dataset_csv(bad.string()); }) == ErrorCode::Parse);
    write(bad, "x0,y0\n0,1,2\n");
    CHECK(code_of([&] { read_dataset_csv(bad.string()); }) == ErrorCode::Parse);
    write(bad, "a,b\n0,1\n");
    CHECK(code_of([&] { read_dataset_csv(bad.string()); }) == ErrorCode::Parse);
    write(bad, "");
    CHECK(code_of([&] { read_dataset_csv(bad.string()); }) == ErrorCode::Parse);
    CHECK(code_of([&] { read_dataset_csv(scratch("missing.csv").string()); }) == ErrorCode::Io);
    CHECK(code_of([&] { read_json_file(scratch("missing.json").string()); }) == ErrorCode::Io);
    write(bad, "{not json");
    CHECK(code_of([&] { read_json_file(bad.string()); }) == ErrorCode::Parse);
}

TEST_CASE("dataset generators") {
    Dataset x = gen_dataset("xor", 1, true);
    CHECK(x.X() == oracle::xor_X());
    CHECK(x.Y() == oracle::xor_Y());
    CHECK(code_of([] { gen_dataset("linear", 3, true); }) == ErrorCode::GeneratorFailure);
    CHECK_NOTHROW(gen_dataset("linear", 3, false));
    Dataset b = gen_dataset("blobs:4", 9, true);
    CHECK(b.n() == 20);
    CHECK(b.has_distinct_columns());
    CHECK(gen_dataset("blobs:4", 9, true).X() == b.X());
    Dataset ce = gen_dataset("blobs:4", 2, true, LossKind::CrossEntropy);
    CHECK(ce.d_y() == 2);
    CHECK_NOTHROW(validate_labels(LossKind::CrossEntropy, ce.Y()));
    CHECK(code_of([] { gen_dataset("blobs:1", 1, false); }) == ErrorCode::Parse);
    CHECK(code_of([] { gen_dataset("spiral", 1, false); }) == ErrorCode::Parse);

    auto path = scratch("custom.csv");
    write_dataset_csv(path.string(), x);
    CHECK(gen_dataset("custom:" + path.string(), 0, true).Y() == x.Y());
}

TEST_CASE("run configs round-trip byte for byte") {
    RunConfig c;
    c.command = "descend";
    c.dims = {2, 4, 3, 1};
    c.activation = "twopiece:-0.25,1";
    c.tol = 1e-10;
    c.radius = 0.1 + 0.2;
    c.seed = 18446744073709551615ull;
    c.out = "r.json";
    std::string text = dump(to_json(c));
    RunConfig back = run_config_from_json(Json::parse(text));
    CHECK(back == c);
    CHECK(dump(to_json(back)) == text);
    CHECK(code_of([] { run_config_from_json(Json::parse("{}")); }) == ErrorCode::Parse);
}

TEST_CASE("exit codes") {
    CHECK(exit_code_for(ErrorCode::Io) == 2);
    CHECK(exit_code_for(ErrorCode::Parse) == 2);
    CHECK(exit_code_for(ErrorCode::StrictDecreaseNotAchieved) == 1);
    CHECK(exit_code_for(ErrorCode::NoAdmissibleTurningPoint) == 3);
    CHECK(exit_code_for(ErrorCode::WidthViolation) == 3);
}

TEST_CASE("demo is deterministic and passes") {
    RunConfig c;
    c.samples = 100;
    auto a = run_demo(c);
    auto b = run_demo(c);
    CHECK(a.ok());
    CHECK(a.first_failure().empty());
    CHECK(dump(a.report) == dump(b.report));
    CHECK(a.report["verdict"] == true);
    CHECK(a.report["fit"]["risk"].get<double>() == doctest::Approx(0.125));
    CHECK(run_config_from_json(a.report["config"]) == c);

    RunConfig corollary = c;
    corollary.activation = "abs";
    corollary.corollary = true;
    CHECK(run_demo(corollary).ok());
    RunConfig plain_abs = c;
    plain_abs.activation = "abs";
    CHECK(code_of([&] { run_demo(plain_abs); }) == ErrorCode::NoAdmissibleTurningPoint);
}
