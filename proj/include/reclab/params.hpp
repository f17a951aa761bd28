#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "reclab/core.hpp"

namespace reclab {

/// A hyperparameter value: real, integer or categorical.
using ParamValue = std::variant<double, std::int64_t, std::string>;

/// Ordered by name so that iteration (and grid expansion) is deterministic.
using ParamMap = std::map<std::string, ParamValue>;

enum class ParamKind { real, integer, categorical };

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::real;
  ParamValue default_value;
  std::vector<std::string> choices;  // categorical only
};

using ParamSchema = std::vector<ParamSpec>;

inline std::string to_string(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) {
    std::ostringstream os;
    os.precision(17);
    os << *d;
    return os.str();
  }
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

inline double as_real(const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw ContractError("expected a numeric parameter, got '" + std::get<std::string>(v) + "'");
}

inline std::int64_t as_integer(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) {
    if (std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
    throw ContractError("expected an integer parameter, got " + to_string(v));
  }
  throw ContractError("expected an integer parameter, got '" + std::get<std::string>(v) + "'");
}

inline const std::string& as_string(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ContractError("expected a categorical parameter, got " + to_string(v));
}

/// Looks up `name`, falling back to `fallback` when absent.
inline ParamValue param_or(const ParamMap& params, const std::string& name, ParamValue fallback) {
  auto it = params.find(name);
  return it == params.end() ? std::move(fallback) : it->second;
}

/// Fills schema defaults and rejects names the schema does not know.
inline ParamMap resolve_params(const ParamSchema& schema, const ParamMap& given,
                               const std::string& owner) {
  ParamMap out;
  for (const auto& spec : schema) out[spec.name] = spec.default_value;
  for (const auto& [name, value] : given) {
    auto spec = std::find_if(schema.begin(), schema.end(),
                             [&](const ParamSpec& s) { return s.name == name; });
    if (spec == schema.end()) {
      std::string valid;
      for (const auto& s : schema) valid += (valid.empty() ? "" : ", ") + s.name;
      throw ContractError(owner + ": unknown parameter '" + name + "' (valid: " + valid + ")");
    }
    switch (spec->kind) {
      case ParamKind::real: out[name] = as_real(value); break;
      case ParamKind::integer: out[name] = as_integer(value); break;
      case ParamKind::categorical: {
        const auto& s = as_string(value);
        if (!spec->choices.empty() &&
            std::find(spec->choices.begin(), spec->choices.end(), s) == spec->choices.end()) {
          throw ContractError(owner + ": parameter '" + name + "' has invalid value '" + s + "'");
        }
        out[name] = s;
        break;
      }
    }
  }
  return out;
}

}  // namespace reclab
