#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "landscape/errors.hpp"
#include "landscape/io.hpp"

namespace landscape {

struct RunConfig {
    std::string command = "demo";
    std::string dataset = "xor";
    std::vector<Eigen::Index> dims;
    std::string activation = "threepiece";
    std::string loss = "squared";
    std::uint64_t seed = 7;
    double tol = 1e-8;
    double radius = 1e-4;
    int samples = 500;
    int steps = 10;
    int family_size = 10;
    bool corollary = false;
    std::string out;

    bool operator==(const RunConfig&) const = default;
};

Json to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& j);

struct DemoResult {
    Json report;
    std::vector<Check> checks;
    bool ok() const;
    /// Name of the first failing check, empty when all pass.
    std::string first_failure() const;
};

/// The full XOR pipeline: baseline fit, minima and descent witnesses for all
/// stages, the equal-slope route, a family of minima, cell analysis, a
/// valley path and the certificates. Deterministic for a fixed config.
DemoResult run_demo(const RunConfig& config);

/// Canonical text of a JSON document: two-space indent, sorted keys,
/// trailing newline.
std::string dump(const Json& j);

/// 2 for io/parse errors, 1 for failed numerical checks, 3 otherwise.
int exit_code_for(ErrorCode code);

}  // namespace landscape
