#include "davarlabel/canonical_json.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>

#include "davarlabel/errors.hpp"

namespace davar {

namespace {

// Largest double magnitude whose integral values are exactly representable.
constexpr double kMaxExactInt = 9007199254740992.0;  // 2^53

void append_number(std::string& out, const nlohmann::json& v) {
  char buf[64];
  if (v.is_number_integer() && !v.is_number_unsigned()) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v.get<std::int64_t>());
    out.append(buf, p);
    return;
  }
  if (v.is_number_unsigned()) {
    auto [p, ec] =
        std::to_chars(buf, buf + sizeof(buf), v.get<std::uint64_t>());
    out.append(buf, p);
    return;
  }
  const double d = v.get<double>();
  if (std::isfinite(d) && d == std::trunc(d) && std::abs(d) <= kMaxExactInt) {
    auto [p, ec] =
        std::to_chars(buf, buf + sizeof(buf), static_cast<std::int64_t>(d));
    out.append(buf, p);
    return;
  }
  if (!std::isfinite(d)) {
    // JSON has no inf/nan; nlohmann emits null, do the same.
    out += "null";
    return;
  }
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), d);
  out.append(buf, p);
}

void append_string(std::string& out, const std::string& s) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

void append_value(std::string& out, const nlohmann::json& v, int depth) {
  const auto indent = [&out](int n) { out.append(2 * n, ' '); };
  switch (v.type()) {
    case nlohmann::json::value_t::null:
      out += "null";
      break;
    case nlohmann::json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case nlohmann::json::value_t::string:
      append_string(out, v.get_ref<const std::string&>());
      break;
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned:
    case nlohmann::json::value_t::number_float:
      append_number(out, v);
      break;
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        indent(depth + 1);
        append_value(out, v[i], depth + 1);
        if (i + 1 < v.size()) out += ',';
        out += '\n';
      }
      indent(depth);
      out += ']';
      break;
    }
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        break;
      }
      // nlohmann objects are std::map-backed: iteration is already sorted.
      out += "{\n";
      std::size_t i = 0;
      for (const auto& [key, val] : v.items()) {
        indent(depth + 1);
        append_string(out, key);
        out += ": ";
        append_value(out, val, depth + 1);
        if (++i < v.size()) out += ',';
        out += '\n';
      }
      indent(depth);
      out += '}';
      break;
    }
    default:
      throw Error(Errc::SchemaShapeError, "unsupported JSON value type");
  }
}

void append_value_compact(std::string& out, const nlohmann::json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::null:
      out += "null";
      break;
    case nlohmann::json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case nlohmann::json::value_t::string:
      append_string(out, v.get_ref<const std::string&>());
      break;
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned:
    case nlohmann::json::value_t::number_float:
      append_number(out, v);
      break;
    case nlohmann::json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        append_value_compact(out, v[i]);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::object: {
      out += '{';
      std::size_t i = 0;
      for (const auto& [key, val] : v.items()) {
        if (i++) out += ',';
        append_string(out, key);
        out += ':';
        append_value_compact(out, val);
      }
      out += '}';
      break;
    }
    default:
      throw Error(Errc::SchemaShapeError, "unsupported JSON value type");
  }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& value) {
  std::string out;
  append_value(out, value, 0);
  out += '\n';
  return out;
}

std::string canonical_dump_compact(const nlohmann::json& value) {
  std::string out;
  append_value_compact(out, value);
  return out;
}

}  // namespace davar
