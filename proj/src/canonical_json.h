#pragma once

#include <json.hpp>
#include <string>

namespace fishlen::internal {

/// Compact JSON with sorted keys and floats printed with six fixed decimals.
std::string CanonicalDump(const nlohmann::json& value);

/// Same layout, one member per line at the top level only; for small reports.
std::string CanonicalDumpPretty(const nlohmann::json& value);

}  // namespace fishlen::internal
