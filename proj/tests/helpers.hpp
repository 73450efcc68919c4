#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "fclverify/fcdsl.hpp"
#include "fclverify/trace.hpp"

namespace testutil {

inline std::string source_dir() { return FCLVERIFY_SOURCE_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

/// Parse a single constraint given its indented body lines.
inline fclv::fcl::Constraint parse_one(const std::string& body) {
  std::string text = "constraint \"test\"\n";
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) text += "  " + line + "\n";
  auto doc = fclv::fcl::parse_constraints(text);
  REQUIRE(doc.constraints.size() == 1);
  return doc.constraints.front();
}

inline fclv::fcl::Snapshot snap(std::int64_t step) {
  fclv::fcl::Snapshot s;
  s.step = step;
  return s;
}

inline void add_component(fclv::fcl::Snapshot& s, const std::string& id, const std::string& type,
                          fclv::fcl::AttrMap attrs = {}) {
  s.components[id] = fclv::fcl::Component{type, std::move(attrs)};
}

inline void add_villager(fclv::fcl::Snapshot& s, const std::string& id, const std::string& role,
                         std::int64_t hp, const std::string& location) {
  add_component(s, id, "Villager",
                {{"role", role}, {"hp", hp}, {"location", location}});
}

}  // namespace testutil
