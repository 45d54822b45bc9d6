#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "landscape/cell_geometry.hpp"
#include "landscape/construction.hpp"
#include "landscape/linear_baseline.hpp"
#include "landscape/verification.hpp"

namespace landscape {

using Json = nlohmann::json;

Json to_json(const Matrix& M);  // nested row-major arrays
Matrix matrix_from_json(const Json& j);

Json to_json(const PiecewiseLinearActivation& act);
PiecewiseLinearActivation activation_from_json(const Json& j);

Json to_json(const Mlp& net);
Mlp mlp_from_json(const Json& j);

Json to_json(const LinearFit& fit);
Json to_json(const SeparationResult& sep);
Json to_json(const CertifiedPoint& point);
Json to_json(const Check& check);
Json to_json(const Certificate& cert);

/// Patterns are run-length encoded row by row as [value, count] pairs.
Json to_json(const CellSignature& sig);
Json run_length_encode(const Matrix& M);
Matrix run_length_decode(const Json& j);

/// Throws Io when the file cannot be opened and Parse on malformed content.
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Header x0..x{d-1}, y0..y{k-1}; one sample per line.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// "xor", "blobs:<k>", "linear" or "custom:<csv path>". Blob labels are the
/// cluster parity (one-hot over two classes for cross-entropy). With
/// `require_assumptions` the result must have distinct samples and a
/// nonzero linear residual under `loss`; random specs are redrawn up to 10
/// times before GeneratorFailure.
Dataset gen_dataset(const std::string& spec, std::uint64_t seed, bool require_assumptions,
                    LossKind loss = LossKind::Squared);

Dataset xor_dataset();

}  // namespace landscape
