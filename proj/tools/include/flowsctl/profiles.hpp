#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <flows/cache.hpp>
#include <flows/grid.hpp>
#include <flows/remote_backend.hpp>

namespace flowsctl {

/// One entry of a profiles file:
///
///   {"scripted": {"type": "scripted", "scripts": "scripts.json"},
///    "remote":   {"type": "remote", "endpoint": "...", "model": "gpt-4",
///                 "api_key_env": "OPENAI_API_KEY", "cache_dir": ".flows-cache"}}
///
/// Scripts map problem id -> binding -> list of responses. Relative paths are
/// resolved against the profiles file's directory.
struct BackendProfile {
  std::string name;
  std::string type;
  std::string model = "scripted";
  std::map<std::string, std::map<std::string, std::vector<std::string>>> scripts;
  flows::RemoteBackendOptions remote;
  std::optional<std::filesystem::path> cache_dir;
};

/// Throws flows::ConfigError naming the field.
BackendProfile load_profile(const std::filesystem::path& profiles_file, const std::string& name);

/// Scripted profiles build fresh backends for every (problem, variant) so
/// queues never leak between runs; the remote profile shares one client.
flows::BackendFactory make_backend_factory(const BackendProfile& profile);

}  // namespace flowsctl
