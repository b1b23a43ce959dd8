#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <string>

#include "flows/backend.hpp"

namespace flows {

struct RemoteBackendOptions {
  /// Full chat-completions URL, e.g. "https://api.openai.com/v1/chat/completions".
  std::string endpoint;
  std::string model;
  /// Environment variable holding the bearer token; empty sends no header.
  std::string api_key_env;
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{16000};
  std::chrono::seconds timeout{120};
};

/// Client for an OpenAI-style chat-completions endpoint. Retries rate
/// limits, 5xx responses and network failures with exponential backoff;
/// authentication failures and other 4xx responses fail immediately.
class RemoteBackend final : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit RemoteBackend(RemoteBackendOptions options, Sleeper sleeper = {});

  std::string complete(const BackendRequest& request) override;
  std::string default_model() const override { return options_.model; }

  /// HTTP attempts made so far (all requests).
  std::uint64_t attempts() const noexcept { return attempts_.load(); }

 private:
  RemoteBackendOptions options_;
  Sleeper sleeper_;
  std::string scheme_host_port_;
  std::string path_;
  std::atomic<std::uint64_t> attempts_{0};
};

}  // namespace flows
