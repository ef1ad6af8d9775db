#pragma once

#include <string>

#include <json.hpp>

namespace davar {

/// Render a JSON document in the fixed canonical form used for every file
/// this toolkit writes: object keys sorted lexicographically, 2-space
/// indentation, integral numbers without a fraction part, non-integral
/// numbers in shortest round-trip decimal form, and a trailing newline.
/// parse(canonical_dump(x)) is value-identical to x and a second
/// canonical_dump is byte-identical.
std::string canonical_dump(const nlohmann::json& value);

/// Canonical rendering of a single JSON value without the trailing newline
/// (one line when the value is a scalar; used for JSON-lines output).
std::string canonical_dump_compact(const nlohmann::json& value);

}  // namespace davar
