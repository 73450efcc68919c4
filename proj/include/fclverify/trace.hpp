#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fclverify/value.hpp"

namespace fclv::fcl {

struct Component {
  std::string type;
  AttrMap attrs;
  bool operator==(const Component&) const = default;
};

/// One per-step system state: components with attributes plus the ensemble
/// assignment chosen at that step. Step 0 is the initial state before any
/// adaptation. A snapshot may legitimately record an update that violates
/// the generic rules; checking is the verifier's job.
struct Snapshot {
  std::int64_t step = 0;
  std::map<std::string, Component> components;
  std::map<std::string, std::set<std::string>> ensembles;
  std::map<std::string, AttrMap> beyond_control;
  bool operator==(const Snapshot&) const = default;
};

struct Trace {
  std::vector<Snapshot> snapshots;

  std::int64_t length() const { return static_cast<std::int64_t>(snapshots.size()); }
  const Snapshot& at(std::int64_t i) const { return snapshots.at(static_cast<std::size_t>(i)); }
  bool operator==(const Trace&) const = default;
};

// Line-delimited trace format: one self-describing snapshot record per line,
// UTF-8, field order irrelevant, unknown fields rejected.
std::string to_record(const Snapshot& s);
Snapshot snapshot_from_record(const std::string& line);

void write_trace(std::ostream& out, const Trace& t);
Trace read_trace(std::istream& in);
void save_trace(const std::string& path, const Trace& t);
Trace load_trace(const std::string& path);

}  // namespace fclv::fcl
