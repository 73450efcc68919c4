#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>

namespace fclv::fcl {

/// Reference to a component instance by id.
struct ComponentRef {
  std::string id;
  auto operator<=>(const ComponentRef&) const = default;
};

/// Attribute / expression value: boolean, integer, real, string or component reference.
using Value = std::variant<bool, std::int64_t, double, std::string, ComponentRef>;

inline bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }
inline bool is_int(const Value& v) { return std::holds_alternative<std::int64_t>(v); }
inline bool is_real(const Value& v) { return std::holds_alternative<double>(v); }
inline bool is_string(const Value& v) { return std::holds_alternative<std::string>(v); }
inline bool is_ref(const Value& v) { return std::holds_alternative<ComponentRef>(v); }
inline bool is_numeric(const Value& v) { return is_int(v) || is_real(v); }

inline double as_real(const Value& v) {
  return is_int(v) ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v);
}

/// Human-readable type name for error messages.
std::string type_name(const Value& v);

/// Render a value the way the constraint DSL would spell it.
std::string to_text(const Value& v);

using AttrMap = std::map<std::string, Value>;

}  // namespace fclv::fcl
