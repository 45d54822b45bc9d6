#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "landscape/construction.hpp"
#include "landscape/loss.hpp"
#include "landscape/network.hpp"

namespace landscape {

struct Check {
    std::string name;
    bool passed = false;
    double measured = 0;
    double tolerance = 0;
    int samples = 0;
    std::uint64_t seed = 0;
};

struct Certificate {
    std::string subject;
    std::vector<Check> checks;
    std::vector<std::string> warnings;

    bool verdict() const;
    void add(Check check) { checks.push_back(std::move(check)); }
};

/// Risk may not drop by more than this under any sampled perturbation.
inline constexpr double kPerturbationTolerance = -1e-10;
inline constexpr double kDescentGapTolerance = 1e-12;

/// Draws `samples` points uniformly from the ball of radius
/// radius * ||theta||_2 around the parameters; sample k uses seed ^ k.
/// Passes iff the smallest risk change is at least -1e-10.
Certificate perturbation_local_min_test(const Mlp& net, const Dataset& data, LossKind loss, double radius,
                                        int samples, std::uint64_t seed);

/// risk(minimum) - risk(witness); the check passes iff it exceeds 1e-12.
Check descent_gap(const CertifiedPoint& minimum, const CertifiedPoint& witness);

using ScalarField = std::function<double(const Vector&)>;
using GradientField = std::function<Vector(const Vector&)>;

/// Central differences against `gradient`; returns the largest
/// |fd - g| / max(1, |fd|, |g|) over coordinates.
double fd_gradient_check(const ScalarField& fun, const GradientField& gradient, const Vector& point, double step);

struct Interval {
    double lo;
    double hi;
};

/// One open interval per hidden layer; every pre-activation must lie
/// strictly inside. Each check reports the smallest distance to an end.
Certificate trace_interval_check(const ForwardTrace& trace, const std::vector<Interval>& expected);

/// Intervals the pre-activations of a constructed minimum occupy:
/// (0, inf) for two-piece stages, (t, t + sigma) after embedding.
std::vector<Interval> expected_intervals(const CertifiedPoint& minimum);

}  // namespace landscape
