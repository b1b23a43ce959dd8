#include "flows/trace.hpp"

#include <map>

#include "flows/errors.hpp"

namespace flows {

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::flow_start: return "flow_start";
    case EventKind::flow_end: return "flow_end";
    case EventKind::message_in: return "message_in";
    case EventKind::message_out: return "message_out";
    case EventKind::backend_call: return "backend_call";
    case EventKind::backend_response: return "backend_response";
    case EventKind::state_update: return "state_update";
    case EventKind::warning: return "warning";
  }
  return "warning";
}

EventKind event_kind_from_string(std::string_view name) {
  for (auto k : {EventKind::flow_start, EventKind::flow_end, EventKind::message_in, EventKind::message_out,
                 EventKind::backend_call, EventKind::backend_response, EventKind::state_update, EventKind::warning}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown trace event kind '" + std::string(name) + "'");
}

Value TraceEvent::to_value() const {
  return Value{{"seq", seq}, {"ts", format_timestamp(timestamp)}, {"instance", instance.str()}, {"kind", to_string(kind)},
               {"body", body}};
}

TraceEvent TraceEvent::from_value(const Value& v) {
  TraceEvent e;
  e.seq = v.at("seq").get<std::uint64_t>();
  e.timestamp = parse_timestamp(v.at("ts").get<std::string>());
  e.instance = InstanceId(v.at("instance").get<std::string>());
  e.kind = event_kind_from_string(v.at("kind").get<std::string>());
  e.body = v.at("body");
  return e;
}

void TraceSink::record(EventKind kind, const InstanceId& instance, Value body) {
  std::lock_guard lock(mutex_);
  TraceEvent e;
  e.seq = next_seq_;
  e.timestamp = std::chrono::system_clock::now();
  e.instance = instance;
  e.kind = kind;
  e.body = std::move(body);
  write(e);
  ++next_seq_;
}

void MemoryTraceSink::write(const TraceEvent& event) {
  std::lock_guard lock(mutex_);
  events_.push_back(event);
}

std::vector<TraceEvent> MemoryTraceSink::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

FileTraceSink::FileTraceSink(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw FlowError(FlowErrorKind::trace_io, InstanceId(), "cannot open trace file '" + path_.string() + "'");
  out_ << Value{{"format", kTraceFormat}, {"version", kTraceVersion}}.dump() << '\n';
  out_.flush();
  if (!out_) throw FlowError(FlowErrorKind::trace_io, InstanceId(), "cannot write trace file '" + path_.string() + "'");
}

void FileTraceSink::write(const TraceEvent& event) {
  out_ << canonical_dump(event.to_value()) << '\n';
  if (event.kind == EventKind::flow_end) out_.flush();
  if (!out_) {
    throw FlowError(FlowErrorKind::trace_io, event.instance, "write to trace file '" + path_.string() + "' failed");
  }
}

std::vector<TraceEvent> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace '" + path.string() + "'");
  const Value header = Value::parse(line);
  if (header.value("format", "") != kTraceFormat || header.value("version", 0) != kTraceVersion) {
    throw std::runtime_error("unsupported trace header in '" + path.string() + "'");
  }
  std::vector<TraceEvent> events;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      events.push_back(TraceEvent::from_value(Value::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (events.size() > 1 && events.back().seq <= events[events.size() - 2].seq) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": sequence numbers not increasing");
    }
  }
  return events;
}

namespace {

class IdNormalizer {
 public:
  std::string ordinal(const std::string& id) {
    auto [it, inserted] = ordinals_.try_emplace(id, ordinals_.size() + 1);
    return "#" + std::to_string(it->second);
  }

  Value walk(const Value& v) {
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      return looks_like_generated_id(s) ? Value(ordinal(s)) : v;
    }
    if (v.is_array()) {
      Value out = Value::array();
      for (const auto& item : v) out.push_back(walk(item));
      return out;
    }
    if (v.is_object()) {
      Value out = Value::object();
      for (const auto& [key, item] : v.items()) {
        // Wall-clock fields and cache provenance are not part of run identity.
        if (key == "created_at" || key == "cached") continue;
        out[key] = walk(item);
      }
      return out;
    }
    return v;
  }

 private:
  std::map<std::string, std::size_t> ordinals_;
};

}  // namespace

std::vector<Value> normalize_trace(const std::vector<TraceEvent>& events) {
  IdNormalizer norm;
  std::vector<Value> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    Value v{{"instance", norm.ordinal(e.instance.str())}, {"kind", to_string(e.kind)}};
    v["body"] = norm.walk(e.body);
    out.push_back(std::move(v));
  }
  return out;
}

std::optional<std::size_t> first_trace_difference(const std::vector<Value>& a, const std::vector<Value>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return i;
  }
  if (a.size() != b.size()) return n;
  return std::nullopt;
}

}  // namespace flows
