#pragma once

#include <string>

#include "json.hpp"

namespace radsym {

/// Serializes like nlohmann's dump() but prints every floating value with
/// 17 significant digits, and non-finite values as null.
std::string dump_json(const nlohmann::json& value, int indent = 2);

/// "%.17g" formatting shared by the JSON and CSV writers.
std::string format_double(double v);

}  // namespace radsym
