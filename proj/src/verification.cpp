#include "landscape/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "landscape/errors.hpp"

namespace landscape {

bool Certificate::verdict() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

Certificate perturbation_local_min_test(const Mlp& net, const Dataset& data, LossKind loss, double radius,
                                        int samples, std::uint64_t seed) {
    Certificate cert;
    cert.subject = "perturbation";
    Check check{"perturbation_min_delta", true, 0.0, kPerturbationTolerance, samples, seed};
    if (radius <= 0 || samples <= 0) {
        cert.warnings.push_back("radius or sample count is zero; the test is vacuous");
        cert.add(check);
        return cert;
    }

    const Vector theta = net.parameters();
    const double base = empirical_risk(net, data, loss);
    const double ball = radius * (theta.norm() > 0 ? theta.norm() : 1.0);
    const double dim = static_cast<double>(theta.size());

    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(k));
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> uniform;
        Vector direction(theta.size());
        for (Eigen::Index p = 0; p < direction.size(); ++p) direction[p] = normal(rng);
        double r = ball * std::pow(uniform(rng), 1.0 / dim);
        Vector moved = theta + (r / direction.norm()) * direction;
        worst = std::min(worst, empirical_risk(net.with_parameters(moved), data, loss) - base);
    }
    check.measured = worst;
    check.passed = worst >= kPerturbationTolerance;
    cert.add(check);
    return cert;
}

Check descent_gap(const CertifiedPoint& minimum, const CertifiedPoint& witness) {
    double gap = minimum.risk - witness.risk;
    return Check{"descent_gap", gap > kDescentGapTolerance, gap, kDescentGapTolerance, 0, 0};
}

double fd_gradient_check(const ScalarField& fun, const GradientField& gradient, const Vector& point, double step) {
    if (!(step > 0)) throw LandscapeError(ErrorCode::PreconditionViolated, "step must be positive");
    Vector g = gradient(point);
    double worst = 0;
    Vector probe = point;
    for (Eigen::Index p = 0; p < point.size(); ++p) {
        probe[p] = point[p] + step;
        double up = fun(probe);
        probe[p] = point[p] - step;
        double down = fun(probe);
        probe[p] = point[p];
        double fd = (up - down) / (2 * step);
        worst = std::max(worst, std::abs(fd - g[p]) / std::max({1.0, std::abs(fd), std::abs(g[p])}));
    }
    return worst;
}

Certificate trace_interval_check(const ForwardTrace& trace, const std::vector<Interval>& expected) {
    Certificate cert;
    cert.subject = "trace_intervals";
    const std::size_t hidden = trace.pre.size() - 1;
    if (expected.size() != hidden) throw LandscapeError(ErrorCode::ShapeMismatch, "one interval per hidden layer");
    for (std::size_t k = 0; k < hidden; ++k) {
        const Matrix& Z = trace.pre[k];
        double margin = std::min((Z.array() - expected[k].lo).minCoeff(), (expected[k].hi - Z.array()).minCoeff());
        cert.add(Check{"layer_" + std::to_string(k + 1), margin > 0, margin, 0.0, 0, 0});
    }
    return cert;
}

std::vector<Interval> expected_intervals(const CertifiedPoint& minimum) {
    const std::size_t hidden = minimum.net.num_layers() - 1;
    const double inf = std::numeric_limits<double>::infinity();
    const bool mirrored = minimum.params.reflected;
    if (minimum.stage != Stage::S3) {
        return std::vector<Interval>(hidden, mirrored ? Interval{-inf, 0.0} : Interval{0.0, inf});
    }
    const TurningPoint& tp = *minimum.params.turning;
    if (mirrored) return std::vector<Interval>(hidden, Interval{-tp.t - tp.sigma, -tp.t});
    return std::vector<Interval>(hidden, Interval{tp.t, tp.t + tp.sigma});
}

}  // namespace landscape
