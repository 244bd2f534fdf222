#pragma once

// JSON serialization for the library's report types (nlohmann/json).

#include "confspec/spectral.hpp"

#include "json.hpp"

namespace confspec {

using Json = nlohmann::json;

/// {eigenvalues[], normalized[], total_mass, clusters[][], residuals[]}
Json to_json(const SpectrumReport& report);
SpectrumReport spectrum_from_json(const Json& j);

}  // namespace confspec
