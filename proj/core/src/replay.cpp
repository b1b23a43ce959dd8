#include "flows/replay.hpp"

#include <map>

namespace flows {
namespace {

/// Forwards to a shared backend while reporting a fixed default model.
class PinnedModel final : public Backend {
 public:
  PinnedModel(std::shared_ptr<Backend> inner, std::string model) : inner_(std::move(inner)), model_(std::move(model)) {}
  std::string complete(const BackendRequest& request) override { return inner_->complete(request); }
  std::string default_model() const override { return model_; }

 private:
  std::shared_ptr<Backend> inner_;
  std::string model_;
};

}  // namespace

ReplayBackends replay_backend(const std::vector<TraceEvent>& events) {
  ReplayBackends out;
  std::string first_model = "scripted";
  std::map<std::string, std::string> binding_models;
  for (const auto& e : events) {
    if (e.kind == EventKind::backend_call) {
      const auto model = e.body.at("request").at("model").get<std::string>();
      if (binding_models.empty()) first_model = model;
      binding_models.try_emplace(e.body.at("binding").get<std::string>(), model);
    }
  }
  out.store = std::make_shared<ScriptedBackend>(std::vector<std::string>{}, first_model);
  out.store->set_strict_keys(true);
  for (const auto& e : events) {
    if (e.kind == EventKind::backend_response) {
      out.store->add_keyed(e.body.at("hash").get<std::string>(), e.body.at("response").get<std::string>());
    }
  }
  out.resolver = std::make_shared<BackendMap>(out.store);
  for (const auto& [binding, model] : binding_models) {
    out.resolver->bind(binding, std::make_shared<PinnedModel>(out.store, model));
  }
  return out;
}

ReplayBackends replay_backend(const std::filesystem::path& trace_path) { return replay_backend(read_trace(trace_path)); }

RecordedRun recorded_run(const std::vector<TraceEvent>& events) {
  std::optional<InstanceId> root;
  std::optional<FlowConfig> config;
  for (const auto& e : events) {
    if (!root && e.kind == EventKind::flow_start && e.body.contains("config")) {
      root = e.instance;
      config = FlowConfig::from_value(e.body["config"]);
    } else if (root && e.kind == EventKind::message_in && e.instance == *root) {
      const auto& m = e.body.at("message");
      return RecordedRun{*config, payload_from(m.at("payload")), InstanceId(m.at("created_by").get<std::string>())};
    }
  }
  throw std::runtime_error("trace does not record a root flow invocation");
}

}  // namespace flows
