#include "fclverify/violation.hpp"

#include <algorithm>
#include <tuple>

namespace fclv::fcl {

std::string binding_text(const std::map<std::string, std::string>& binding) {
  std::string out;
  for (const auto& [var, id] : binding) {
    if (!out.empty()) out += ", ";
    out += var + "=" + id;
  }
  return out;
}

bool report_less(const Violation& a, const Violation& b) {
  return std::tie(a.step, a.constraint_index, a.binding, a.kind, a.detail) <
         std::tie(b.step, b.constraint_index, b.binding, b.kind, b.detail);
}

std::vector<Violation> dedup_violations(std::vector<Violation> all) {
  std::stable_sort(all.begin(), all.end(), report_less);
  std::vector<Violation> out;
  for (auto& v : all) {
    bool seen = false;
    for (const auto& kept : out) {
      if (kept.constraint_index == v.constraint_index && kept.constraint == v.constraint &&
          kept.binding == v.binding && kept.initial_state == v.initial_state) {
        seen = true;
        break;
      }
    }
    if (!seen) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace fclv::fcl
