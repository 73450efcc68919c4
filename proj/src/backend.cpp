#include "fclverify/backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

namespace fclv::gen {

using nlohmann::json;

MockBackend::MockBackend(const std::string& fixture_dir) {
  std::vector<std::string> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(fixture_dir, ec)) {
    if (entry.is_regular_file()) files.push_back(entry.path().string());
  }
  if (ec) throw Error("cannot read fixture directory " + fixture_dir + ": " + ec.message());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    responses_.emplace_back((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  }
  if (responses_.empty()) throw Error("fixture directory is empty: " + fixture_dir);
}

std::string MockBackend::complete(const std::vector<Message>& conversation) {
  received_.push_back(conversation);
  const std::size_t idx = std::min(cursor_, responses_.size() - 1);
  ++cursor_;
  return responses_[idx];
}

HttpChatBackend::HttpChatBackend(HttpChatConfig config) : config_(std::move(config)) {}

std::string HttpChatBackend::complete(const std::vector<Message>& conversation) {
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  std::string host = url;
  std::string prefix;
  auto scheme_end = host.find("://");
  std::string scheme = "https";
  if (scheme_end != std::string::npos) {
    scheme = host.substr(0, scheme_end);
    host = host.substr(scheme_end + 3);
  }
  auto slash = host.find('/');
  if (slash != std::string::npos) {
    prefix = host.substr(slash);
    host = host.substr(0, slash);
  }

  json body;
  body["model"] = config_.model;
  json msgs = json::array();
  for (const auto& m : conversation) {
    msgs.push_back(json{{"role", m.role}, {"content", m.content}});
  }
  body["messages"] = msgs;
  if (config_.temperature) body["temperature"] = *config_.temperature;

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto request = [&](auto& client) -> std::string {
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    client.set_connection_timeout(30, 0);
    auto res = client.Post(prefix + "/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res) {
      throw TransportError("chat request failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw TransportError("chat request returned status " + std::to_string(res->status) + ": " +
                           res->body);
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
      throw TransportError("malformed chat response: " + res->body);
    }
    return reply["choices"][0]["message"]["content"].get<std::string>();
  };

  if (scheme == "https") {
    httplib::SSLClient client(host);
    client.enable_server_certificate_verification(true);
    return request(client);
  }
  httplib::Client client(host);
  return request(client);
}

}  // namespace fclv::gen
