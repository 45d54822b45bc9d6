#include <doctest.h>

#include <cmath>
#include <random>

#include "landscape/construction.hpp"
#include "landscape/errors.hpp"
#include "landscape/verification.hpp"
#include "oracles.hpp"

using namespace landscape;

namespace {

Dataset xor_data() { return Dataset(oracle::xor_X(), oracle::xor_Y()); }

double squared_risk(const Matrix& Y, const Matrix& P) {
    long double total = 0;
    for (Eigen::Index i = 0; i < Y.size(); ++i) {
        long double e = Y.reshaped()(i) - P.reshaped()(i);
        total += 0.5L * e * e;
    }
    return static_cast<double>(total / Y.cols());
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const LandscapeError& e) {
        return e.code();
    }
    return ErrorCode::Io;
}

bool all_inside(const ForwardTrace& t, double lo, double hi) {
    for (const Matrix& z : t.pre) {
        if (&z == &t.pre.back()) break;
        if (!((z.array() > lo).all() && (z.array() < hi).all())) return false;
    }
    return true;
}

// Output of the one-hidden-layer descent witness: the selected row becomes
// v - alpha beta^T x, moved by -ratio*gamma on I and +ratio*gamma on J.
RowVector expected_descent_row(const CertifiedPoint& p, const LinearFit& fit, const Matrix& X, double ratio) {
    const auto& sep = *p.params.separation;
    const auto& c = *p.params.constants;
    RowVector q = fit.Y_tilde.row(p.params.selected_row) - c.alpha * (sep.beta.transpose() * X);
    for (Eigen::Index i : sep.I()) q[i] -= ratio * c.gamma;
    for (Eigen::Index j : sep.J()) q[j] += ratio * c.gamma;
    return q;
}

}  // namespace

TEST_CASE("stage 1 minimum on XOR") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    auto p = build_minimum_two_piece(data, fit, {2, 3, 1}, relu());
    CHECK(p.stage == Stage::S1);
    CHECK(p.kind == PointKind::Minimum);
    CHECK(p.spurious);
    CHECK(std::fabs(p.risk - 0.125) <= 1e-9);
    Matrix out = predict(p.net, data.X());
    CHECK((out.array() - 0.5).abs().maxCoeff() <= 1e-12);
    CHECK(p.params.eta == -1.0);
    CHECK(p.net.bias(0)(0) == doctest::Approx(1.5));
    CHECK(p.net.bias(0)(1) == 1.0);
    CHECK(all_inside(forward(p.net, data.X()), 0.0, INFINITY));
    CHECK(squared_risk(data.Y(), out) == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("stage 1 descent reproduces the closed-form output") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    for (auto act : {relu(), leaky_relu(0.2), two_piece(0.2, 1.0), two_piece(-0.5, 2.0)}) {
        auto d = build_descent_two_piece(data, fit, {2, 3, 1}, act);
        double ratio = (act.slopes()[1] - act.slopes()[0]) / (act.slopes()[1] + act.slopes()[0]);
        RowVector expected = expected_descent_row(d, fit, data.X(), ratio);
        CHECK((predict(d.net, data.X()) - expected).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(d.risk < 0.125 - 1e-12);
        CHECK(d.risk == doctest::Approx(squared_risk(data.Y(), expected)).epsilon(1e-12));
        CHECK(d.params.constants->margin > 0);
        // first-order change -(2/n) ratio gamma sum_I u is a decrease
        CHECK(d.params.predicted_decrease > 0);
    }
}

TEST_CASE("stage 2 minimum and descent for deeper nets") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    auto s1 = build_descent_two_piece(data, fit, {2, 3, 1}, relu());
    for (std::vector<Eigen::Index> dims : {std::vector<Eigen::Index>{2, 3, 3, 1}, {2, 4, 2, 5, 1}}) {
        auto m = build_minimum_two_piece(data, fit, dims, relu());
        CHECK(m.stage == Stage::S2);
        CHECK(std::fabs(m.risk - 0.125) <= 1e-9);
        CHECK(all_inside(forward(m.net, data.X()), 0.0, INFINITY));
        if (dims[2] >= 2) {
            auto d = build_descent_two_piece(data, fit, dims, relu());
            CHECK(std::fabs(d.risk - s1.risk) <= 1e-10);
            CHECK(d.params.lambda >= 1.0);
        }
    }
}

TEST_CASE("stage 3 minimum sits inside the linear piece after the turning point") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    for (std::vector<Eigen::Index> dims : {std::vector<Eigen::Index>{2, 3, 1}, {2, 3, 3, 1}, {2, 4, 3, 3, 1}}) {
        auto m = build_minimum(data, fit, dims, three_piece());
        CHECK(m.stage == Stage::S3);
        CHECK(std::fabs(m.risk - 0.125) <= 1e-9);
        CHECK(all_inside(forward(m.net, data.X()), 0.0, 1.0));
        CHECK(m.params.turning->t == 0.0);
        CHECK(m.params.turning->sigma == 1.0);
    }
}

TEST_CASE("stage 3 descent equals the two-piece descent at the turning point") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    auto reference = build_descent_two_piece(data, fit, {2, 3, 1}, two_piece(0.2, 1.0));
    for (std::vector<Eigen::Index> dims : {std::vector<Eigen::Index>{2, 3, 1}, {2, 3, 3, 1}, {2, 3, 2, 2, 1}}) {
        auto d = build_descent(data, fit, dims, three_piece());
        CHECK(std::fabs(d.risk - reference.risk) <= 1e-10);
        CHECK(d.risk < 0.125);
    }
    // a kink away from the origin with a nonzero value there
    PiecewiseLinearActivation shifted({-2.0, 1.0, 3.0}, {1.0, -1.0, 0.5, 3.0}, 0.7);
    auto tp = find_turning_point(shifted);
    CHECK(tp.t == 1.0);
    auto ref = build_descent_two_piece(data, fit, {2, 3, 1}, two_piece(tp.s_minus, tp.s_plus));
    auto d = build_descent(data, fit, {2, 3, 3, 1}, shifted);
    CHECK(std::fabs(d.risk - ref.risk) <= 1e-10);
    auto m = build_minimum(data, fit, {2, 3, 3, 1}, shifted);
    CHECK(std::fabs(m.risk - 0.125) <= 1e-9);
    CHECK(all_inside(forward(m.net, data.X()), 1.0, 3.0));
}

TEST_CASE("activations with s+ = 0 are handled by reflection") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    auto act = two_piece(0.5, 0.0);
    auto m = build_minimum_two_piece(data, fit, {2, 3, 1}, act);
    CHECK(m.params.reflected);
    CHECK(std::fabs(m.risk - 0.125) <= 1e-9);
    CHECK(all_inside(forward(m.net, data.X()), -INFINITY, 0.0));
    auto cert = perturbation_local_min_test(m.net, data, LossKind::Squared, 1e-4, 200, 3);
    CHECK(cert.verdict());
    auto d = build_descent_two_piece(data, fit, {2, 3, 3, 1}, act);
    CHECK(d.params.reflected);
    CHECK(d.risk < 0.125);
    // mirrored three-piece: the admissible kink has s+ = 0
    PiecewiseLinearActivation flat({0.0, 1.0}, {1.0, 0.0, 2.0}, 0.0);
    auto m3 = build_minimum(data, fit, {2, 3, 3, 1}, flat);
    CHECK(m3.params.reflected);
    CHECK(std::fabs(m3.risk - 0.125) <= 1e-9);
    CHECK(build_descent(data, fit, {2, 3, 1}, flat).risk < 0.125);
}

TEST_CASE("reflect_hidden turns an h(-x) network into the same function with h") {
    std::mt19937_64 rng(31);
    auto h = three_piece();
    Mlp net({oracle::gaussian(4, 2, rng), oracle::gaussian(3, 4, rng), oracle::gaussian(1, 3, rng)},
            {oracle::gaussian(4, 1, rng), oracle::gaussian(3, 1, rng), oracle::gaussian(1, 1, rng)}, h.reflected());
    Matrix X = oracle::gaussian(2, 20, rng);
    CHECK((predict(reflect_hidden(net, h), X) - predict(net, X)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gamma controls") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    auto d = build_descent_two_piece(data, fit, {2, 3, 1}, relu());
    const auto& c = *d.params.constants;

    DescentOptions zero;
    zero.alpha_start = c.alpha;
    zero.gamma = 0.0;
    auto z = build_descent_two_piece(data, fit, {2, 3, 1}, relu(), zero);
    REQUIRE(z.params.constants->alpha == c.alpha);
    // W~ is a stationary point of a quadratic: moving it by -alpha beta costs
    // exactly (1/2n) sum (alpha beta^T x_i)^2
    RowVector shift = c.alpha * (d.params.separation->beta.transpose() * data.X());
    CHECK(z.risk == doctest::Approx(fit.risk + shift.squaredNorm() / (2.0 * data.n())).epsilon(1e-12));
    CHECK(z.risk >= fit.risk);

    DescentOptions flipped = zero;
    flipped.gamma = -c.gamma;
    CHECK(build_descent_two_piece(data, fit, {2, 3, 1}, relu(), flipped).risk > fit.risk);

    auto e = build_equal_slope_descent(data, fit, {2, 4, 1}, absolute_value());
    DescentOptions ez;
    ez.alpha_start = e.params.constants->alpha;
    ez.gamma = 0.0;
    CHECK(std::fabs(build_equal_slope_descent(data, fit, {2, 4, 1}, absolute_value(), ez).risk - fit.risk) <=
          1e-12);
    ez.gamma = -e.params.constants->gamma;
    CHECK(build_equal_slope_descent(data, fit, {2, 4, 1}, absolute_value(), ez).risk > fit.risk);
}

TEST_CASE("equal-slope route") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    auto d = build_equal_slope_descent(data, fit, {2, 4, 1}, absolute_value());
    CHECK(d.stage == Stage::EqualSlope);
    CHECK(0.125 - d.risk > 1e-12);
    // outputs are Y~ - gamma on I and Y~ + gamma on J
    RowVector expected = fit.Y_tilde.row(0);
    for (Eigen::Index i : d.params.separation->I()) expected[i] -= d.params.constants->gamma;
    for (Eigen::Index j : d.params.separation->J()) expected[j] += d.params.constants->gamma;
    CHECK((predict(d.net, data.X()) - expected).cwiseAbs().maxCoeff() <= 1e-12);

    CHECK(build_equal_slope_descent(data, fit, {2, 3, 2, 1}, absolute_value()).risk < 0.125);
    CHECK(build_equal_slope_descent(data, fit, {2, 4, 1}, two_piece(-3.0, 3.0)).risk < 0.125);
    PiecewiseLinearActivation tent({-1.0, 1.0}, {0.0, -2.0, 2.0}, 0.5);
    CHECK(build_equal_slope_descent(data, fit, {2, 4, 2, 1}, tent).risk < 0.125);

    CHECK(code_of([&] { build_equal_slope_descent(data, fit, {2, 2, 1}, absolute_value()); }) ==
          ErrorCode::WidthViolation);
    CHECK(code_of([&] { build_equal_slope_descent(data, fit, {2, 4, 1, 1}, absolute_value()); }) ==
          ErrorCode::WidthViolation);
    CHECK(code_of([&] { build_descent_two_piece(data, fit, {2, 3, 1}, absolute_value()); }) ==
          ErrorCode::NoAdmissibleTurningPoint);
    CHECK(code_of([&] { build_minimum(data, fit, {2, 3, 1}, absolute_value()); }) ==
          ErrorCode::NoAdmissibleTurningPoint);
    MinimumOptions any;
    any.any_kink = true;
    CHECK(std::fabs(build_minimum(data, fit, {2, 4, 1}, absolute_value(), any).risk - 0.125) <= 1e-9);
}

TEST_CASE("family of minima") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    auto family = enumerate_family(data, fit, {2, 3, 3, 1}, three_piece(), 10, 7);
    REQUIRE(family.size() == 10);
    for (std::size_t a = 0; a < family.size(); ++a) {
        CHECK(std::fabs(family[a].risk - 0.125) <= 1e-9);
        CHECK(all_inside(forward(family[a].net, data.X()), 0.0, 1.0));
        for (std::size_t b = a + 1; b < family.size(); ++b) CHECK(parameter_distance(family[a].net, family[b].net) > 1e-6);
    }
    auto again = enumerate_family(data, fit, {2, 3, 3, 1}, three_piece(), 10, 7);
    for (std::size_t a = 0; a < family.size(); ++a) CHECK(parameter_distance(family[a].net, again[a].net) == 0.0);
}

TEST_CASE("a larger M gives the same function with different parameters") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    auto base = build_minimum(data, fit, {2, 3, 3, 1}, three_piece());
    MinimumOptions tripled;
    tripled.M_multiplier = 3.0;
    auto big = build_minimum(data, fit, {2, 3, 3, 1}, three_piece(), tripled);
    CHECK(big.params.M == doctest::Approx(3 * base.params.M));
    CHECK(parameter_distance(base.net, big.net) > 1e-6);
    CHECK((predict(base.net, data.X()) - predict(big.net, data.X())).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("option validation") {
    Dataset data = xor_data();
    LinearFit fit = fit_linear(data, LossKind::Squared);
    MinimumOptions bad_eta;
    bad_eta.eta = 0.0;
    CHECK(code_of([&] { build_minimum_two_piece(data, fit, {2, 3, 1}, relu(), bad_eta); }) ==
          ErrorCode::PreconditionViolated);
    MinimumOptions bad_m;
    bad_m.M_multiplier = 0.5;
    CHECK(code_of([&] { build_minimum(data, fit, {2, 3, 1}, three_piece(), bad_m); }) ==
          ErrorCode::PreconditionViolated);
    MinimumOptions bad_scale;
    bad_scale.alpha_scales = {1.5};
    CHECK(code_of([&] { build_minimum(data, fit, {2, 3, 3, 1}, three_piece(), bad_scale); }) ==
          ErrorCode::PreconditionViolated);
    CHECK(code_of([&] { build_minimum_two_piece(data, fit, {2, 1, 1}, relu()); }) == ErrorCode::WidthViolation);
    CHECK(code_of([&] { build_minimum_two_piece(data, fit, {3, 3, 1}, relu()); }) == ErrorCode::ShapeMismatch);
    CHECK(code_of([&] { build_minimum_two_piece(data, fit, {2, 3, 1}, three_piece()); }) ==
          ErrorCode::InvalidActivation);
    CHECK(code_of([&] { build_minimum(data, fit, {2, 3, 1}, linear_activation()); }) ==
          ErrorCode::InvalidActivation);

    Dataset linear(oracle::xor_X(), oracle::xor_X().colwise().sum());
    LinearFit exact = fit_linear(linear, LossKind::Squared);
    CHECK_FALSE(build_minimum_two_piece(linear, exact, {2, 3, 1}, relu()).spurious);
    CHECK(code_of([&] { build_descent_two_piece(linear, exact, {2, 3, 1}, relu()); }) == ErrorCode::AllRowsZero);
}

TEST_CASE("multi-output data selects the row with a residual") {
    Matrix X = oracle::xor_X();
    Matrix Y(2, 4);
    Y.row(0) = X.row(0) - 2 * X.row(1);
    Y.row(1) = oracle::xor_Y();
    Dataset data(X, Y);
    LinearFit fit = fit_linear(data, LossKind::Squared);
    auto m = build_minimum_two_piece(data, fit, {2, 3, 2}, relu());
    CHECK(m.risk == doctest::Approx(fit.risk).epsilon(1e-12));
    CHECK((predict(m.net, X) - fit.Y_tilde).cwiseAbs().maxCoeff() <= 1e-12);
    auto d = build_descent_two_piece(data, fit, {2, 3, 2}, relu());
    CHECK(d.params.selected_row == 1);
    CHECK(d.risk < fit.risk);
    Matrix out = predict(d.net, X);
    CHECK((out.row(0) - fit.Y_tilde.row(0)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((out.row(1) - expected_descent_row(d, fit, X, 1.0)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(build_descent(data, fit, {2, 3, 2, 2}, three_piece()).risk < fit.risk);
}

TEST_CASE("cross-entropy loss") {
    Matrix Y(2, 4);
    Y << 1, 0, 0, 1,
         0, 1, 1, 0;
    Dataset data(oracle::xor_X(), Y);
    LinearFit fit = fit_linear(data, LossKind::CrossEntropy);
    auto m = build_minimum_two_piece(data, fit, {2, 3, 2}, relu());
    CHECK(std::fabs(m.risk - std::log(2.0)) <= 1e-8);
    CHECK(perturbation_local_min_test(m.net, data, LossKind::CrossEntropy, 1e-4, 200, 5).verdict());
    auto d = build_descent_two_piece(data, fit, {2, 3, 2}, relu());
    CHECK(d.risk < fit.risk);
    CHECK(build_descent(data, fit, {2, 3, 3, 2}, three_piece()).risk < fit.risk);
}

TEST_CASE("embedding keeps a two-piece network's function") {
    std::mt19937_64 rng(41);
    auto act = three_piece();
    auto tp = find_turning_point(act);
    Mlp net({oracle::gaussian(3, 2, rng), oracle::gaussian(2, 3, rng), oracle::gaussian(1, 2, rng)},
            {oracle::gaussian(3, 1, rng), oracle::gaussian(2, 1, rng), oracle::gaussian(1, 1, rng)},
            two_piece(tp.s_minus, tp.s_plus));
    Matrix X = oracle::gaussian(2, 10, rng);
    // scales small enough that every scaled pre-activation stays within sigma of t
    Mlp embedded = embed_at_turning_point(net, act, tp, {1e-3, 1e-6});
    CHECK((predict(embedded, X) - predict(net, X)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(all_inside(forward(embedded, X), -1.0, 1.0));
}
