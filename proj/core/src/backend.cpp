#include "flows/backend.hpp"

#include <openssl/evp.h>

#include <fmt/format.h>

#include "flows/cache.hpp"
#include "flows/flow.hpp"
#include "flows/trace.hpp"

namespace flows {

const char* to_string(ChatTurn::Role role) noexcept {
  switch (role) {
    case ChatTurn::Role::system: return "system";
    case ChatTurn::Role::user: return "user";
    case ChatTurn::Role::assistant: return "assistant";
  }
  return "user";
}

ChatTurn::Role role_from_string(std::string_view name) {
  if (name == "system") return ChatTurn::Role::system;
  if (name == "user") return ChatTurn::Role::user;
  if (name == "assistant") return ChatTurn::Role::assistant;
  throw std::invalid_argument("unknown chat role '" + std::string(name) + "'");
}

const char* to_string(BackendError::Kind kind) noexcept {
  switch (kind) {
    case BackendError::Kind::auth: return "auth";
    case BackendError::Kind::rate_limit: return "rate_limit";
    case BackendError::Kind::transient: return "transient";
    case BackendError::Kind::invalid_request: return "invalid_request";
    case BackendError::Kind::budget_exhausted: return "budget_exhausted";
    case BackendError::Kind::queue_exhausted: return "queue_exhausted";
    case BackendError::Kind::not_found: return "not_found";
  }
  return "transient";
}

void BackendRequest::validate() const {
  if (model.empty()) throw std::invalid_argument("request model must be non-empty");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be non-negative");
  if (max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const auto& t = turns[i];
    if (t.role == ChatTurn::Role::system && i != 0) throw std::invalid_argument("system turn only allowed first");
    if (t.role != ChatTurn::Role::system && t.content.empty()) {
      throw std::invalid_argument(fmt::format("turn {} ({}) has empty content", i, to_string(t.role)));
    }
  }
}

Value BackendRequest::canonical() const {
  Value turns_v = Value::array();
  for (const auto& t : turns) turns_v.push_back(Value{{"content", t.content}, {"role", to_string(t.role)}});
  return Value{{"max_tokens", max_tokens}, {"model", model}, {"temperature", temperature}, {"turns", std::move(turns_v)}};
}

std::string BackendRequest::canonical_text() const { return canonical_dump(canonical()); }

std::string BackendRequest::hash() const { return sha256_hex(canonical_text()); }

BackendRequest BackendRequest::from_value(const Value& v) {
  BackendRequest r;
  r.model = v.at("model").get<std::string>();
  r.temperature = v.at("temperature").get<double>();
  r.max_tokens = v.at("max_tokens").get<int>();
  for (const auto& t : v.at("turns")) {
    r.turns.push_back({role_from_string(t.at("role").get<std::string>()), t.at("content").get<std::string>()});
  }
  return r;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> queue, std::string model)
    : model_(std::move(model)), queue_(std::make_move_iterator(queue.begin()), std::make_move_iterator(queue.end())) {}

void ScriptedBackend::push(std::string response) {
  std::lock_guard lock(mutex_);
  queue_.push_back(std::move(response));
}

void ScriptedBackend::add_keyed(const std::string& request_hash, std::string response) {
  std::lock_guard lock(mutex_);
  keyed_[request_hash].push_back(std::move(response));
}

void ScriptedBackend::set_strict_keys(bool strict) {
  std::lock_guard lock(mutex_);
  strict_ = strict;
}

std::string ScriptedBackend::complete(const BackendRequest& request) {
  const std::string key = request.hash();
  std::lock_guard lock(mutex_);
  requests_.push_back(request);
  if (auto it = keyed_.find(key); it != keyed_.end() && !it->second.empty()) {
    std::string out = std::move(it->second.front());
    it->second.pop_front();
    return out;
  }
  if (strict_) {
    std::string first_user;
    for (const auto& t : request.turns) {
      if (t.role != ChatTurn::Role::system) {
        first_user = t.content.substr(0, 80);
        break;
      }
    }
    throw BackendError(BackendError::Kind::not_found,
                       fmt::format("no recorded response for request {} ({} turns; first: \"{}\")", key,
                                   request.turns.size(), first_user));
  }
  if (queue_.empty()) throw BackendError(BackendError::Kind::queue_exhausted, "scripted response queue exhausted");
  std::string out = std::move(queue_.front());
  queue_.pop_front();
  return out;
}

std::vector<BackendRequest> ScriptedBackend::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::size_t ScriptedBackend::call_count() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mutex_);
  std::size_t n = queue_.size();
  for (const auto& [_, q] : keyed_) n += q.size();
  return n;
}

void BackendMap::bind(std::string binding, std::shared_ptr<Backend> backend) {
  bindings_.insert_or_assign(std::move(binding), std::move(backend));
}

Backend& BackendMap::resolve(const std::string& binding) {
  if (auto it = bindings_.find(binding); it != bindings_.end()) return *it->second;
  if (fallback_) return *fallback_;
  throw BackendError(BackendError::Kind::invalid_request, "no backend bound to '" + binding + "'");
}

std::string RunContext::complete(const std::string& binding, const BackendRequest& request,
                                 const InstanceId& caller) const {
  if (backends == nullptr) throw BackendError(BackendError::Kind::invalid_request, "no backends configured");
  Backend& backend = backends->resolve(binding);
  request.validate();
  const std::string key = request.hash();
  emit(EventKind::backend_call, caller, Value{{"binding", binding}, {"hash", key}, {"request", request.canonical()}});
  auto warn = [&](const std::string& what) { emit(EventKind::warning, caller, Value{{"message", "cache: " + what}}); };
  if (cache != nullptr) {
    try {
      if (auto hit = cache->lookup(key)) {
        emit(EventKind::backend_response, caller, Value{{"hash", key}, {"response", *hit}, {"cached", true}});
        return *hit;
      }
    } catch (const CacheError& e) {
      warn(e.what());
    }
  }
  std::string response = backend.complete(request);
  if (cache != nullptr) {
    try {
      cache->store(key, response);
    } catch (const CacheError& e) {
      warn(e.what());
    }
  }
  emit(EventKind::backend_response, caller, Value{{"hash", key}, {"response", response}, {"cached", false}});
  return response;
}

}  // namespace flows
