#pragma once

// JSON encodings shared by the wire format, the log store and the CLI.
// Reals are written as IEEE-754 decimal strings (shortest round-trip form,
// "inf"/"nan" allowed); integers as JSON numbers.

#include <string>

#include "json.hpp"
#include "logitaudit/core_model.h"

namespace logitaudit {

using Json = nlohmann::json;

std::string real_to_string(double v);
double real_from_json(const Json& j);

std::string to_hex(std::span<const std::uint8_t> bytes);
// Throws Error(kParseError) on odd length or non-hex characters.
std::vector<std::uint8_t> from_hex(std::string_view hex);

std::string_view to_string(DeviationKind kind);
std::string_view to_string(DecisionKind kind);
std::string_view to_string(LoggingMode mode);
DeviationKind deviation_kind_from_string(std::string_view s);
LoggingMode logging_mode_from_string(std::string_view s);

Json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const Json& j);

Json to_json(const DeviationConfig& dev);
DeviationConfig deviation_from_json(const Json& j);

Json to_json(const StepTrace& step);
StepTrace step_trace_from_json(const Json& j);

Json to_json(const ExecutionResult& result);
ExecutionResult execution_result_from_json(const Json& j);

}  // namespace logitaudit
