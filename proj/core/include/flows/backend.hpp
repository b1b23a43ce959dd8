#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flows/value.hpp"

namespace flows {

struct ChatTurn {
  enum class Role { system, user, assistant };

  Role role = Role::user;
  std::string content;

  friend bool operator==(const ChatTurn&, const ChatTurn&) = default;
};

const char* to_string(ChatTurn::Role role) noexcept;
ChatTurn::Role role_from_string(std::string_view name);

struct BackendRequest {
  std::string model;
  std::vector<ChatTurn> turns;
  double temperature = 0.0;
  int max_tokens = 2048;

  /// Throws std::invalid_argument: empty model, negative temperature,
  /// non-positive max_tokens, a system turn after position 0, or an empty
  /// user/assistant turn.
  void validate() const;

  /// {"max_tokens","model","temperature","turns":[{"content","role"}]}
  Value canonical() const;
  /// canonical_dump(canonical()).
  std::string canonical_text() const;
  /// Lower-case hex SHA-256 of canonical_text().
  std::string hash() const;

  static BackendRequest from_value(const Value& v);

  friend bool operator==(const BackendRequest&, const BackendRequest&) = default;
};

/// Lower-case hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view bytes);

class BackendError : public std::runtime_error {
 public:
  enum class Kind { auth, rate_limit, transient, invalid_request, budget_exhausted, queue_exhausted, not_found };

  BackendError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }
  bool retryable() const noexcept { return kind_ == Kind::rate_limit || kind_ == Kind::transient; }

 private:
  Kind kind_;
};

const char* to_string(BackendError::Kind kind) noexcept;

/// A completion tool. Implementations are safe to call from several threads.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string complete(const BackendRequest& request) = 0;
  /// Model name used when a flow does not pin one.
  virtual std::string default_model() const = 0;
};

/// Deterministic backend for tests and replay. Serves responses keyed by
/// request hash first, then pops the FIFO queue. Every request is recorded.
class ScriptedBackend final : public Backend {
 public:
  ScriptedBackend() = default;
  explicit ScriptedBackend(std::vector<std::string> queue, std::string model = "scripted");

  void push(std::string response);
  void add_keyed(const std::string& request_hash, std::string response);
  /// When strict, requests with no keyed response fail with not_found
  /// instead of falling back to the queue.
  void set_strict_keys(bool strict);

  std::string complete(const BackendRequest& request) override;
  std::string default_model() const override { return model_; }

  std::vector<BackendRequest> requests() const;
  std::size_t call_count() const;
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::string model_ = "scripted";
  std::deque<std::string> queue_;
  std::map<std::string, std::deque<std::string>> keyed_;
  bool strict_ = false;
  std::vector<BackendRequest> requests_;
};

/// Resolves the backend binding named in an LLM flow's config.
class BackendResolver {
 public:
  virtual ~BackendResolver() = default;
  /// Throws BackendError(invalid_request) for unknown bindings.
  virtual Backend& resolve(const std::string& binding) = 0;
};

/// Named bindings with an optional fallback used for unlisted names.
class BackendMap final : public BackendResolver {
 public:
  BackendMap() = default;
  explicit BackendMap(std::shared_ptr<Backend> fallback) : fallback_(std::move(fallback)) {}

  void bind(std::string binding, std::shared_ptr<Backend> backend);
  Backend& resolve(const std::string& binding) override;

 private:
  std::map<std::string, std::shared_ptr<Backend>, std::less<>> bindings_;
  std::shared_ptr<Backend> fallback_;
};

}  // namespace flows
