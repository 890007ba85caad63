#pragma once

#include <string>

#include <json.hpp>

namespace hg {

// Serializes a JSON document with doubles printed at 17 significant digits
// (lossless round-trip) and object keys in sorted order. Report and scenario
// files are written through this, never through nlohmann's dump().
std::string dump_json_17(const nlohmann::json& j, int indent = 2);

}  // namespace hg
