#include "flows/remote_backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include <fmt/format.h>

namespace flows {

RemoteBackend::RemoteBackend(RemoteBackendOptions options, Sleeper sleeper)
    : options_(std::move(options)), sleeper_(std::move(sleeper)) {
  if (options_.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  const auto scheme_end = options_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint must be an http(s) URL");
  const auto path_start = options_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = options_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : options_.endpoint.substr(path_start);
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string RemoteBackend::complete(const BackendRequest& request) {
  request.validate();
  Value messages = Value::array();
  for (const auto& t : request.turns) messages.push_back(Value{{"role", to_string(t.role)}, {"content", t.content}});
  const Value body{{"model", request.model},
                   {"messages", std::move(messages)},
                   {"temperature", request.temperature},
                   {"max_tokens", request.max_tokens},
                   {"n", 1}};
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!options_.api_key_env.empty()) {
    const char* key = std::getenv(options_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw BackendError(BackendError::Kind::auth,
                         "credential environment variable '" + options_.api_key_env + "' is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(options_.timeout).count());
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(options_.timeout).count());

  std::chrono::milliseconds backoff = options_.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    ++attempts_;
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "network error: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      try {
        const Value reply = Value::parse(res->body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const std::exception& e) {
        throw BackendError(BackendError::Kind::invalid_request, std::string("malformed completion response: ") + e.what());
      }
    } else if (res->status == 401 || res->status == 403) {
      throw BackendError(BackendError::Kind::auth, fmt::format("authentication failed (HTTP {})", res->status));
    } else if (res->status == 429) {
      last_error = "rate limited (HTTP 429)";
    } else if (res->status >= 500) {
      last_error = fmt::format("server error (HTTP {})", res->status);
    } else {
      throw BackendError(BackendError::Kind::invalid_request,
                         fmt::format("request rejected (HTTP {}): {}", res->status, res->body.substr(0, 200)));
    }
    if (attempt == options_.max_attempts) break;
    sleeper_(backoff);
    backoff = std::min(backoff * 2, options_.max_backoff);
  }
  throw BackendError(BackendError::Kind::budget_exhausted,
                     fmt::format("gave up after {} attempts; last error: {}", options_.max_attempts, last_error));
}

}  // namespace flows
