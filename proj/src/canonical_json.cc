#include "canonical_json.h"

#include <cmath>
#include <cstdio>

namespace fishlen::internal {

namespace {

void Emit(const nlohmann::json& v, std::string& out) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(key).dump();
        out += ':';
        Emit(item, out);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        Emit(v[i], out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      if (!std::isfinite(d)) {
        out += d > 0 ? "\"inf\"" : (d < 0 ? "\"-inf\"" : "\"nan\"");
        break;
      }
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", d);
      std::string s(buf);
      if (s == "-0.000000") s = "0.000000";
      out += s;
      break;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string CanonicalDump(const nlohmann::json& value) {
  std::string out;
  Emit(value, out);
  return out;
}

std::string CanonicalDumpPretty(const nlohmann::json& value) {
  if (!value.is_object()) return CanonicalDump(value);
  std::string out = "{\n";
  bool first = true;
  for (const auto& [key, item] : value.items()) {
    if (!first) out += ",\n";
    first = false;
    out += "  " + nlohmann::json(key).dump() + ": " + CanonicalDump(item);
  }
  out += "\n}\n";
  return out;
}

}  // namespace fishlen::internal
