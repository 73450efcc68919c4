#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fclv {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Syntax error with source location and a one-line expectation hint.
struct ParseError : Error {
  ParseError(std::string message, int line, int col, std::string hint = "")
      : Error(format(message, line, col, hint)), line(line), col(col), hint(std::move(hint)) {}
  int line = 0;
  int col = 0;
  std::string hint;

 private:
  static std::string format(const std::string& message, int line, int col, const std::string& hint) {
    std::string s = std::to_string(line) + ":" + std::to_string(col) + ": " + message;
    if (!hint.empty()) s += " (expected " + hint + ")";
    return s;
  }
};

/// Evaluation-time failure: unbound variable, unknown name, type mismatch.
/// Carries the offending name and the step index at which it occurred.
struct EvalError : Error {
  EvalError(std::string message, std::string name, std::int64_t step)
      : Error(message + " [name: " + name + ", step: " + std::to_string(step) + "]"),
        name(std::move(name)),
        step(step) {}
  std::string name;
  std::int64_t step = -1;
};

/// A constraint fell outside the online-checkable subset.
struct SubsetError : Error {
  explicit SubsetError(std::string constraint, std::vector<std::string> reasons)
      : Error(join(constraint, reasons)), constraint(std::move(constraint)), reasons(std::move(reasons)) {}
  std::string constraint;
  std::vector<std::string> reasons;

 private:
  static std::string join(const std::string& c, const std::vector<std::string>& rs) {
    std::string s = "constraint not online-checkable: \"" + c + "\"";
    for (const auto& r : rs) s += "; " + r;
    return s;
  }
};

}  // namespace fclv
