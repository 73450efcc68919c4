#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fclverify/errors.hpp"
#include "fclverify/prompt.hpp"

namespace fclv::gen {

struct TransportError : Error {
  using Error::Error;
};

/// A code-generation backend: one chat completion per call.
class GenBackend {
 public:
  virtual ~GenBackend() = default;
  virtual std::string complete(const std::vector<Message>& conversation) = 0;
  virtual std::string name() const = 0;
};

/// Replays fixture files (sorted by filename) and records every conversation
/// it receives; the last response repeats once the fixture is exhausted.
class MockBackend final : public GenBackend {
 public:
  explicit MockBackend(const std::string& fixture_dir);
  std::string complete(const std::vector<Message>& conversation) override;
  std::string name() const override { return "mock"; }

  const std::vector<std::vector<Message>>& received() const { return received_; }
  std::size_t fixture_size() const { return responses_.size(); }

 private:
  std::vector<std::string> responses_;
  std::vector<std::vector<Message>> received_;
  std::size_t cursor_ = 0;
};

struct HttpChatConfig {
  std::string base_url;      // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";  // key is read from the environment only
  std::optional<double> temperature;
  int timeout_ms = 120000;
};

/// Chat-completions client (no streaming). Throws TransportError on transport
/// or protocol failures.
class HttpChatBackend final : public GenBackend {
 public:
  explicit HttpChatBackend(HttpChatConfig config);
  std::string complete(const std::vector<Message>& conversation) override;
  std::string name() const override { return "http:" + config_.model; }

 private:
  HttpChatConfig config_;
};

}  // namespace fclv::gen
