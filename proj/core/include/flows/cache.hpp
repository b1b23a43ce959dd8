#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "flows/backend.hpp"

namespace flows {

class CacheError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CacheStats {
  std::uint64_t entries = 0;
  std::uint64_t bytes = 0;
};

/// Persistent response cache: one file per entry, named by the request hash.
/// File layout: "flows-cache 1 <stored_at> <length>\n" followed by exactly
/// <length> response bytes. Writes go through a temporary file and a rename;
/// writes to the same key are serialized.
class ResponseCache {
 public:
  /// Creates the directory if needed. Throws CacheError when it cannot.
  explicit ResponseCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }

  /// nullopt on miss; CacheError on unreadable or corrupt entries.
  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& response);

  CacheStats stats() const;
  void clear();

 private:
  std::mutex& stripe(const std::string& key) const;

  std::filesystem::path dir_;
  mutable std::array<std::mutex, 32> stripes_;
};

/// Serves a hit byte-identically without contacting the backend; on a miss
/// calls the backend and stores the response. Cache I/O failures degrade to
/// pass-through and are reported through `warn`.
std::string cached_complete(ResponseCache* cache, Backend& backend, const BackendRequest& request,
                            const std::function<void(const std::string&)>& warn = {});

}  // namespace flows
