#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "landscape/activation.hpp"
#include "landscape/errors.hpp"

using namespace landscape;

namespace {

// h(x) = h(b0) + integral of the slope from b0 to x, piece by piece.
double integrate(const std::vector<double>& b, const std::vector<double>& s, double anchor, double x) {
    if (b.empty()) return anchor + s[0] * x;
    double value = anchor;
    if (x < b[0]) return value + s[0] * (x - b[0]);
    for (std::size_t k = 1; k <= b.size(); ++k) {
        double lo = b[k - 1];
        double hi = k < b.size() ? b[k] : std::numeric_limits<double>::infinity();
        value += s[k] * std::clamp(x - lo, 0.0, hi - lo);
    }
    return value;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const LandscapeError& e) {
        return e.code();
    }
    FAIL("expected a LandscapeError");
    return ErrorCode::Io;
}

}  // namespace

TEST_CASE("presets evaluate to their closed forms") {
    for (double x : {-3.0, -0.5, 0.0, 0.25, 2.0}) {
        CHECK(relu()(x) == std::max(0.0, x));
        CHECK(absolute_value()(x) == std::fabs(x));
        CHECK(leaky_relu(0.1)(x) == doctest::Approx(x > 0 ? x : 0.1 * x).epsilon(1e-15));
        CHECK(linear_activation(2.0)(x) == 2.0 * x);
    }
    auto h = three_piece();
    CHECK(h(-1.0) == doctest::Approx(-0.2));
    CHECK(h(0.5) == 0.5);
    CHECK(h(1.0) == 1.0);
    CHECK(h(3.0) == 2.0);
}

TEST_CASE("random activations match the integrated slopes and are continuous") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        int k = 1 + trial % 4;
        std::vector<double> b(k), s(k + 1);
        for (double& v : b) v = U(rng);
        std::sort(b.begin(), b.end());
        for (double& v : s) v = U(rng);
        double anchor = U(rng);
        PiecewiseLinearActivation h(b, s, anchor);
        for (int i = 0; i < 20; ++i) {
            double x = 2 * U(rng);
            CHECK(h(x) == doctest::Approx(integrate(b, s, anchor, x)).epsilon(1e-12));
        }
        for (double bp : b) {
            double eps = 1e-9;
            CHECK(std::fabs(h(bp + eps) - h(bp - eps)) < 1e-7);
        }
    }
}

TEST_CASE("slope_at reports the open piece and flags breakpoints") {
    auto h = three_piece();
    CHECK(h.slope_at(-1).slope == 0.2);
    CHECK_FALSE(h.slope_at(-1).on_breakpoint);
    CHECK(h.slope_at(0.5).slope == 1.0);
    CHECK(h.slope_at(0.0).on_breakpoint);
    CHECK(h.slope_at(0.0).slope == 1.0);
    CHECK(h.slope_at(1.0).slope == 0.5);
}

TEST_CASE("reflection is x -> h(-x)") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (const auto& h : {relu(), leaky_relu(0.3), three_piece(), absolute_value(), linear_activation(-1.5),
                          PiecewiseLinearActivation({-1.0, 0.5, 2.0}, {1.0, -2.0, 0.3, 4.0}, 0.7)}) {
        auto r = h.reflected();
        for (int i = 0; i < 50; ++i) {
            double x = U(rng);
            CHECK(r(x) == doctest::Approx(h(-x)).epsilon(1e-12));
        }
        auto rr = r.reflected();
        for (double x : {-2.5, -1.0, 0.0, 0.6, 2.2}) CHECK(rr(x) == doctest::Approx(h(x)).epsilon(1e-12));
        CHECK(rr.breakpoints() == h.breakpoints());
        CHECK(rr.slopes() == h.slopes());
    }
    CHECK(two_piece(0.2, 0.0).reflected() == two_piece(-0.0, -0.2));
}

TEST_CASE("classification of activations") {
    CHECK(relu().is_two_piece());
    CHECK(absolute_value().is_two_piece());
    CHECK_FALSE(three_piece().is_two_piece());
    CHECK_FALSE(PiecewiseLinearActivation({0.0}, {0.0, 1.0}, 1.0).is_two_piece());
    CHECK(linear_activation().is_linear());
    CHECK(PiecewiseLinearActivation({0.0}, {2.0, 2.0}, 0.0).is_linear());
    CHECK_FALSE(relu().is_linear());
}

TEST_CASE("turning points") {
    auto tp = find_turning_point(three_piece());
    CHECK(tp.t == 0.0);
    CHECK(tp.s_minus == 0.2);
    CHECK(tp.s_plus == 1.0);
    CHECK(tp.sigma == 1.0);
    CHECK(tp.h_at_t == 0.0);

    auto r = find_turning_point(relu());
    CHECK(r.sigma == kUnboundedSigma);

    // first kink is inadmissible, the second is taken
    PiecewiseLinearActivation h({-1.0, 2.0}, {1.0, -1.0, 3.0}, 0.0);
    auto second = find_turning_point(h);
    CHECK(second.t == 2.0);
    CHECK(second.sigma == 3.0);
    CHECK(second.h_at_t == doctest::Approx(-3.0));

    CHECK(code_of([] { find_turning_point(absolute_value()); }) == ErrorCode::NoAdmissibleTurningPoint);
    CHECK(code_of([] { find_turning_point(linear_activation()); }) == ErrorCode::InvalidActivation);

    CHECK(find_any_kink(absolute_value()).has_value());
    CHECK_FALSE(find_any_kink(linear_activation()).has_value());
    CHECK(find_equal_slope_kink(absolute_value())->s_plus == 1.0);
    CHECK(find_equal_slope_kink(h)->t == -1.0);
    CHECK_FALSE(find_equal_slope_kink(relu()).has_value());
}

TEST_CASE("invalid activations and presets are rejected") {
    CHECK(code_of([] { PiecewiseLinearActivation({0.0}, {1.0}, 0.0); }) == ErrorCode::InvalidActivation);
    CHECK(code_of([] { PiecewiseLinearActivation({1.0, 0.0}, {1.0, 2.0, 3.0}, 0.0); }) ==
          ErrorCode::InvalidActivation);
    CHECK(code_of([] { PiecewiseLinearActivation({0.0, 0.0}, {1.0, 2.0, 3.0}, 0.0); }) ==
          ErrorCode::InvalidActivation);
    CHECK(code_of([] { PiecewiseLinearActivation({0.0}, {1.0, NAN}, 0.0); }) == ErrorCode::InvalidActivation);
    CHECK(code_of([] { activation_from_preset("tanh"); }) == ErrorCode::Parse);
    CHECK(code_of([] { activation_from_preset("leaky:x"); }) == ErrorCode::Parse);
    CHECK(code_of([] { activation_from_preset("twopiece:1"); }) == ErrorCode::Parse);
    CHECK(activation_from_preset("twopiece:-1,1") == absolute_value());
    CHECK(activation_from_preset("leaky:0.25") == leaky_relu(0.25));
    CHECK(activation_from_preset("identity").is_linear());
}
