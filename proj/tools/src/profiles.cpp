#include "flowsctl/profiles.hpp"

#include <fstream>

#include <flows/errors.hpp>

namespace flowsctl {

namespace fs = std::filesystem;
using flows::ConfigError;
using flows::Value;

namespace {

ConfigError bad(const std::string& field, const std::string& msg) {
  return ConfigError(ConfigError::Kind::invalid_params, field, msg);
}

Value read_json(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw bad(what, "cannot open '" + path.string() + "'");
  try {
    return Value::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw bad(what, "'" + path.string() + "': " + e.what());
  }
}

std::string text(const Value& v, const std::string& field, const char* key, std::string fallback = {}) {
  if (!v.contains(key)) return fallback;
  if (!v[key].is_string()) throw bad(field + "." + key, "must be text");
  return v[key].get<std::string>();
}

}  // namespace

BackendProfile load_profile(const fs::path& profiles_file, const std::string& name) {
  const Value all = read_json(profiles_file, "profiles");
  if (!all.is_object() || !all.contains(name)) throw bad("backend-profile", "no profile named '" + name + "'");
  const Value& p = all[name];
  if (!p.is_object()) throw bad(name, "must be a map");
  BackendProfile prof;
  prof.name = name;
  prof.type = text(p, name, "type");
  const fs::path base = profiles_file.parent_path();
  if (p.contains("cache_dir")) prof.cache_dir = base / text(p, name, "cache_dir");
  if (prof.type == "scripted") {
    prof.model = text(p, name, "model", "scripted");
    const auto scripts_path = text(p, name, "scripts");
    if (scripts_path.empty()) throw bad(name + ".scripts", "is required");
    const Value scripts = read_json(base / scripts_path, name + ".scripts");
    try {
      prof.scripts = scripts.get<decltype(prof.scripts)>();
    } catch (const nlohmann::json::exception& e) {
      throw bad(name + ".scripts", std::string("must map problem -> binding -> [responses]: ") + e.what());
    }
  } else if (prof.type == "remote") {
    prof.remote.endpoint = text(p, name, "endpoint");
    prof.remote.model = text(p, name, "model");
    prof.remote.api_key_env = text(p, name, "api_key_env");
    if (prof.remote.endpoint.empty()) throw bad(name + ".endpoint", "is required");
    if (prof.remote.model.empty()) throw bad(name + ".model", "is required");
    if (p.contains("max_attempts")) prof.remote.max_attempts = p["max_attempts"].get<int>();
    prof.model = prof.remote.model;
  } else {
    throw bad(name + ".type", "must be scripted or remote");
  }
  return prof;
}

flows::BackendFactory make_backend_factory(const BackendProfile& profile) {
  if (profile.type == "remote") {
    auto shared = std::make_shared<flows::BackendMap>(std::make_shared<flows::RemoteBackend>(profile.remote));
    return [shared](const flows::Problem&, const flows::FlowVariant&) -> std::shared_ptr<flows::BackendResolver> {
      return shared;
    };
  }
  auto scripts = std::make_shared<const decltype(profile.scripts)>(profile.scripts);
  const std::string model = profile.model;
  return [scripts, model](const flows::Problem& problem,
                          const flows::FlowVariant&) -> std::shared_ptr<flows::BackendResolver> {
    auto map = std::make_shared<flows::BackendMap>(
        std::make_shared<flows::ScriptedBackend>(std::vector<std::string>{}, model));
    const auto it = scripts->find(problem.id);
    if (it != scripts->end()) {
      for (const auto& [binding, queue] : it->second) {
        map->bind(binding, std::make_shared<flows::ScriptedBackend>(queue, model));
      }
    }
    return map;
  };
}

}  // namespace flowsctl
