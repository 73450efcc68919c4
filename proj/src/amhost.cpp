#include "fclverify/amhost.hpp"

#include <algorithm>
#include <chrono>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "fclverify/errors.hpp"
#include "generated_assets.hpp"

namespace fclv::am {

using nlohmann::json;

// Defined in scenario.cpp; makes the shipped policies available by name.
void ensure_default_builtins();

namespace {

json attrs_to_json(const fcl::AttrMap& attrs) {
  json out = json::object();
  for (const auto& [k, v] : attrs) {
    switch (v.index()) {
      case 0: out[k] = std::get<bool>(v); break;
      case 1: out[k] = std::get<std::int64_t>(v); break;
      case 2: out[k] = std::get<double>(v); break;
      case 3: out[k] = std::get<std::string>(v); break;
      default: out[k] = std::get<fcl::ComponentRef>(v).id; break;
    }
  }
  return out;
}

fcl::AttrMap attrs_from_json(const json& j) {
  fcl::AttrMap out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_boolean()) {
      out.emplace(k, v.get<bool>());
    } else if (v.is_number_integer() || v.is_number_unsigned()) {
      out.emplace(k, v.get<std::int64_t>());
    } else if (v.is_number_float()) {
      out.emplace(k, v.get<double>());
    } else if (v.is_string()) {
      out.emplace(k, v.get<std::string>());
    } else {
      throw Error("unsupported attribute value in record");
    }
  }
  return out;
}

}  // namespace

std::string request_to_record(const AssignRequest& req) {
  json j;
  j["method"] = req.method;
  j["step"] = req.step;
  json comps = json::array();
  for (const auto& [id, attrs] : req.components) {
    comps.push_back(json{{"id", id}, {"attrs", attrs_to_json(attrs)}});
  }
  j["components"] = comps;
  json bc = json::object();
  for (const auto& [name, attrs] : req.beyond_control) bc[name] = attrs_to_json(attrs);
  j["beyond_control"] = bc;
  j["group_ids"] = req.group_ids;
  return j.dump();
}

AssignRequest request_from_record(const std::string& line) {
  json j = json::parse(line);
  AssignRequest req;
  req.method = j.at("method").get<std::string>();
  req.step = j.at("step").get<std::int64_t>();
  for (const auto& c : j.at("components")) {
    req.components.emplace_back(c.at("id").get<std::string>(), attrs_from_json(c.at("attrs")));
  }
  if (j.contains("beyond_control")) {
    for (const auto& [name, attrs] : j["beyond_control"].items()) {
      req.beyond_control.emplace(name, attrs_from_json(attrs));
    }
  }
  for (const auto& g : j.at("group_ids")) req.group_ids.push_back(g.get<std::string>());
  return req;
}

std::string response_to_record(const AssignResponse& resp) {
  json j;
  if (resp.error) {
    j["error"] = json{{"message", resp.error->message}, {"traceback", resp.error->traceback}};
  } else {
    json a = json::array();
    for (const auto& [cid, gid] : resp.assignments) a.push_back(json::array({cid, gid}));
    j["assignments"] = a;
  }
  return j.dump();
}

AssignResponse response_from_record(const std::string& line) {
  json j = json::parse(line);
  AssignResponse resp;
  if (j.contains("error")) {
    AmError e;
    if (j["error"].is_object()) {
      e.message = j["error"].value("message", std::string{});
      e.traceback = j["error"].value("traceback", std::string{});
    } else {
      e.message = j["error"].get<std::string>();
    }
    resp.error = std::move(e);
    return resp;
  }
  const json& a = j.at("assignments");
  if (a.is_object()) {
    for (const auto& [cid, gid] : a.items()) {
      if (gid.is_string()) {
        resp.assignments.emplace_back(cid, gid.get<std::string>());
      } else if (gid.is_array()) {
        for (const auto& g : gid) resp.assignments.emplace_back(cid, g.get<std::string>());
      } else {
        throw Error("assignment value must be a group id or a list of group ids");
      }
    }
  } else if (a.is_array()) {
    for (const auto& pair : a) {
      resp.assignments.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    }
  } else {
    throw Error("assignments must be an object or an array of pairs");
  }
  return resp;
}

// --------------------------------------------------------------------------
// builtin registry

namespace {

std::map<std::string, BuiltinFactory>& builtin_registry() {
  static std::map<std::string, BuiltinFactory> registry;
  return registry;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_builtin(const std::string& name, BuiltinFactory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  builtin_registry()[name] = std::move(factory);
}

std::vector<std::string> builtin_names() {
  ensure_default_builtins();
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [name, f] : builtin_registry()) {
    (void)f;
    names.push_back(name);
  }
  return names;
}

// --------------------------------------------------------------------------
// subprocess transport

namespace {

struct LineReader {
  int fd = -1;
  std::string buffer;

  // Returns the next line (without newline) or nullopt on timeout/EOF.
  std::optional<std::string> read_line(int timeout_ms, std::string* why) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
      auto nl = buffer.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        return line;
      }
      const auto now = clock::now();
      if (now >= deadline) {
        if (why) *why = "timeout";
        return std::nullopt;
      }
      const int wait_ms = static_cast<int>(
          std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
      pollfd pfd{fd, POLLIN, 0};
      const int r = ::poll(&pfd, 1, std::max(wait_ms, 1));
      if (r < 0) {
        if (errno == EINTR) continue;
        if (why) *why = std::strerror(errno);
        return std::nullopt;
      }
      if (r == 0) {
        if (why) *why = "timeout";
        return std::nullopt;
      }
      char chunk[4096];
      const ssize_t n = ::read(fd, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        if (why) *why = std::strerror(errno);
        return std::nullopt;
      }
      if (n == 0) {
        if (why) *why = "end of stream";
        return std::nullopt;
      }
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }
};

std::string read_tail(const std::string& path, std::size_t max_bytes = 4000) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (all.size() > max_bytes) all = all.substr(all.size() - max_bytes);
  return all;
}

class SubprocessSession final : public AmSession {
 public:
  explicit SubprocessSession(const AmEndpoint& ep) : ep_(ep) {
    std::signal(SIGPIPE, SIG_IGN);
    if (ep.command.empty()) {
      startup_error_ = "subprocess endpoint without a command";
      return;
    }
    stderr_path_ = (ep.working_dir.empty() ? std::filesystem::temp_directory_path().string()
                                           : ep.working_dir) +
                   "/am_stderr.log";
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      startup_error_ = "cannot create pipes";
      return;
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      startup_error_ = "fork failed";
      return;
    }
    if (pid_ == 0) {
      ::dup2(to_child[0], 0);
      ::dup2(from_child[1], 1);
      int err = ::open(stderr_path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      if (err >= 0) ::dup2(err, 2);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      if (!ep.working_dir.empty() && ::chdir(ep.working_dir.c_str()) != 0) _exit(126);
      std::vector<char*> argv;
      for (const auto& a : ep.command) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      ::execvp(argv[0], argv.data());
      _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_fd_ = to_child[1];
    reader_.fd = from_child[0];

    std::string why;
    auto line = reader_.read_line(ep.startup_timeout_ms, &why);
    if (!line) {
      startup_error_ = "no handshake from adaptation manager process (" + why + ")" + stderr_tail();
      return;
    }
    try {
      json j = json::parse(*line);
      if (!j.value("ready", false)) {
        startup_error_ = "adaptation manager failed to start: " +
                         (j.contains("error") ? j["error"].get<std::string>() : *line);
      }
    } catch (const std::exception&) {
      startup_error_ = "malformed handshake: " + *line + stderr_tail();
    }
  }

  ~SubprocessSession() override {
    if (in_fd_ >= 0) ::close(in_fd_);
    if (reader_.fd >= 0) ::close(reader_.fd);
    if (pid_ > 0) {
      int status = 0;
      for (int spins = 0; spins < 50; ++spins) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) return;
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

  AssignResponse invoke(const AssignRequest& req) override {
    AssignResponse resp;
    if (startup_error_) {
      resp.error = AmError{*startup_error_, ""};
      return resp;
    }
    if (dead_) {
      resp.error = AmError{"adaptation manager process is no longer responding", ""};
      return resp;
    }
    const std::string line = request_to_record(req) + "\n";
    ssize_t off = 0;
    while (off < static_cast<ssize_t>(line.size())) {
      const ssize_t n = ::write(in_fd_, line.data() + off, line.size() - static_cast<std::size_t>(off));
      if (n < 0) {
        if (errno == EINTR) continue;
        dead_ = true;
        resp.error = AmError{"cannot send request to adaptation manager: " +
                                 std::string(std::strerror(errno)),
                             stderr_tail()};
        return resp;
      }
      off += n;
    }
    std::string why;
    auto reply = reader_.read_line(ep_.call_timeout_ms, &why);
    if (!reply) {
      dead_ = true;
      resp.error = AmError{"no response from adaptation manager (" + why + ")", stderr_tail()};
      return resp;
    }
    try {
      return response_from_record(*reply);
    } catch (const std::exception& e) {
      dead_ = true;
      resp.error = AmError{"malformed response frame: " + std::string(e.what()), *reply};
      return resp;
    }
  }

 private:
  std::string stderr_tail() {
    std::string tail = read_tail(stderr_path_);
    return tail.empty() ? "" : "\n" + tail;
  }

  AmEndpoint ep_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  LineReader reader_;
  std::optional<std::string> startup_error_;
  std::string stderr_path_;
  bool dead_ = false;
};

}  // namespace

std::unique_ptr<AmSession> open_session(const AmEndpoint& endpoint) {
  if (endpoint.kind == AmEndpoint::Kind::Builtin) {
    ensure_default_builtins();
    std::lock_guard<std::mutex> lock(registry_mutex());
    auto it = builtin_registry().find(endpoint.builtin_name);
    if (it == builtin_registry().end()) {
      throw Error("unknown builtin adaptation manager: " + endpoint.builtin_name);
    }
    return it->second();
  }
  return std::make_unique<SubprocessSession>(endpoint);
}

// --------------------------------------------------------------------------
// generated-code materialization

std::string render_base_class(const adsl::ArchitectureSpec& spec) {
  if (!spec.am_interface) throw Error("architecture specification has no am_interface");
  std::string out = "class " + spec.am_interface->base_class + "(abc.ABC):\n";
  for (const auto& a : spec.assignments) {
    out += "    @abc.abstractmethod\n";
    out += "    def " + a.method + "(self, components, environment, group_ids, step):\n";
    out += "        pass\n";
  }
  return out;
}

namespace {

std::vector<std::string> fenced_blocks(const std::string& text) {
  std::vector<std::string> blocks;
  std::size_t pos = 0;
  for (;;) {
    std::size_t open = text.find("```", pos);
    if (open == std::string::npos) break;
    std::size_t body = text.find('\n', open);
    if (body == std::string::npos) break;
    ++body;  // skip the fence line (optional language tag)
    std::size_t close = text.find("```", body);
    if (close == std::string::npos) break;
    blocks.push_back(text.substr(body, close - body));
    pos = text.find('\n', close);
    if (pos == std::string::npos) break;
  }
  return blocks;
}

std::string replace_all(std::string text, const std::string& needle, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

MaterializeResult materialize_generated_am(const std::string& response_text,
                                           const std::string& scratch_dir,
                                           const adsl::ArchitectureSpec& spec,
                                           const std::string& python_exe) {
  MaterializeResult result;
  if (!spec.am_interface) {
    result.error = "architecture specification has no am_interface";
    return result;
  }
  auto blocks = fenced_blocks(response_text);
  if (blocks.empty()) {
    result.error = "no code block found in the generation response";
    return result;
  }
  if (blocks.size() > 1) {
    result.note = "response contained " + std::to_string(blocks.size()) +
                  " code blocks; using the last one";
  }
  std::error_code ec;
  std::filesystem::create_directories(scratch_dir, ec);
  if (ec) {
    result.error = "cannot create scratch directory " + scratch_dir + ": " + ec.message();
    return result;
  }

  auto write_file = [&](const std::string& name, const std::string& content) {
    std::ofstream out(scratch_dir + "/" + name, std::ios::binary);
    out << content;
  };
  write_file(spec.am_interface->base_module + ".py", "import abc\n\n\n" + render_base_class(spec));
  write_file("generated_am.py", blocks.back());
  std::string adapter = assets::kAdapterTemplate;
  adapter = replace_all(adapter, "{{AM_CLASS}}", spec.am_interface->class_name);
  adapter = replace_all(adapter, "{{GENERATED_MODULE}}", "generated_am");
  write_file("am_main.py", adapter);

  result.endpoint.kind = AmEndpoint::Kind::Subprocess;
  result.endpoint.command = {python_exe, "am_main.py"};
  result.endpoint.working_dir = scratch_dir;
  return result;
}

}  // namespace fclv::am
