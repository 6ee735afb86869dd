#pragma once

#include "json.hpp"
#include "qfc/sse.hpp"

namespace qfc {

/// Scalar summary of a comparison run (parameters, deviations, fidelity);
/// the per-node series are included only when include_series is set.
nlohmann::json comparison_to_json(const ComparisonReport& report, bool include_series = false);

}  // namespace qfc
