#pragma once

#include "eval/metrics.hpp"

#include <optional>
#include <string>

namespace vultriage::eval {

// Four decimals, or "NaN" for an undefined ratio.
std::string format_metric(double v);

std::string render_table(const PairEvaluation& ev, const std::optional<McNemarResult>& mcnemar = std::nullopt);

// Machine-readable report with the table columns as keys. `provenance_json`
// must be a JSON object; its members are copied to the top level first.
std::string report_json(const PairEvaluation& ev, const std::optional<McNemarResult>& mcnemar,
                        const std::string& provenance_json);

} // namespace vultriage::eval
