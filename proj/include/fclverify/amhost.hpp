#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fclverify/adsl.hpp"
#include "fclverify/value.hpp"

namespace fclv::am {

/// One ensemble-resolution request: the filtered component view for one
/// assignment method, observable environment state, and the legal group ids.
struct AssignRequest {
  std::string method;
  std::int64_t step = 0;
  std::vector<std::pair<std::string, fcl::AttrMap>> components;  // id -> attrs, ordered by id
  std::map<std::string, fcl::AttrMap> beyond_control;
  std::vector<std::string> group_ids;
};

struct AmError {
  std::string message;
  std::string traceback;
};

/// Assignments are an ordered call log (component, group); a component may
/// legitimately appear twice here — the generic checks flag it.
struct AssignResponse {
  std::vector<std::pair<std::string, std::string>> assignments;
  std::optional<AmError> error;
};

std::string request_to_record(const AssignRequest& req);
AssignRequest request_from_record(const std::string& line);
std::string response_to_record(const AssignResponse& resp);
AssignResponse response_from_record(const std::string& line);

struct AmEndpoint {
  enum class Kind { Builtin, Subprocess };
  Kind kind = Kind::Builtin;
  std::string builtin_name;
  std::vector<std::string> command;  // argv for subprocess endpoints
  std::string working_dir;
  int startup_timeout_ms = 10000;
  int call_timeout_ms = 10000;
};

/// A live adaptation manager. Builtin sessions run in-process; subprocess
/// sessions speak the line-delimited protocol over stdin/stdout.
class AmSession {
 public:
  virtual ~AmSession() = default;
  virtual AssignResponse invoke(const AssignRequest& req) = 0;
};

/// In-process policies, registered by name. A fresh instance is created per
/// run so policies may keep per-run state.
using BuiltinFactory = std::function<std::unique_ptr<AmSession>()>;
void register_builtin(const std::string& name, BuiltinFactory factory);
std::vector<std::string> builtin_names();

/// Spawn failures, handshake timeouts, malformed frames and call timeouts all
/// surface as AssignResponse.error so the runtime can turn them into generic
/// violations; open_session throws only on configuration errors.
std::unique_ptr<AmSession> open_session(const AmEndpoint& endpoint);

struct MaterializeResult {
  AmEndpoint endpoint;
  std::optional<std::string> error;  // no code block, bad scratch dir, ...
  std::string note;                  // e.g. multiple code blocks, last taken
};

/// Extract the (last) fenced code block from a generation response, write it
/// with the base-class module and the protocol adapter into scratch_dir, and
/// return a subprocess endpoint running it.
MaterializeResult materialize_generated_am(const std::string& response_text,
                                           const std::string& scratch_dir,
                                           const adsl::ArchitectureSpec& spec,
                                           const std::string& python_exe = "python3");

/// The abstract base-class listing shared by prompts and the generated module.
std::string render_base_class(const adsl::ArchitectureSpec& spec);

}  // namespace fclv::am
