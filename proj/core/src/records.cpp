#include "flows/records.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace flows {

Value RunRecord::to_value() const {
  Value v{{"problem_id", problem_id},
          {"variant", variant},
          {"solved", solved},
          {"rounds_used", rounds_used},
          {"release_date", format_date(release_date)},
          {"source", source},
          {"difficulty", difficulty},
          {"trace_ref", trace_ref},
          {"wall_time", wall_time},
          {"hidden_verdict", hidden_verdict},
          {"calls", calls}};
  if (error) v["error"] = *error;
  return v;
}

RunRecord RunRecord::from_value(const Value& v) {
  RunRecord r;
  r.problem_id = v.at("problem_id").get<std::string>();
  r.variant = v.at("variant").get<std::string>();
  r.solved = v.at("solved").get<bool>();
  r.rounds_used = v.at("rounds_used").get<int>();
  r.release_date = parse_date(v.at("release_date").get<std::string>());
  r.source = v.value("source", "");
  r.difficulty = v.value("difficulty", "");
  r.trace_ref = v.value("trace_ref", "");
  r.wall_time = v.value("wall_time", 0.0);
  r.hidden_verdict = v.value("hidden_verdict", "");
  if (v.contains("calls")) r.calls = v["calls"].get<std::map<std::string, int>>();
  if (v.contains("error")) r.error = v["error"].get<std::string>();
  return r;
}

bool RunRecord::same_outcome(const RunRecord& o) const {
  return problem_id == o.problem_id && variant == o.variant && solved == o.solved && rounds_used == o.rounds_used &&
         release_date == o.release_date && source == o.source && difficulty == o.difficulty &&
         trace_ref == o.trace_ref && hidden_verdict == o.hidden_verdict && calls == o.calls && error == o.error;
}

std::string record_line(const RunRecord& record) { return canonical_dump(record.to_value()); }

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::vector<RunRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Value v;
    try {
      v = Value::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": malformed record");
    }
    out.push_back(RunRecord::from_value(v));
  }
  return out;
}

void sort_records(std::vector<RunRecord>& records) {
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return a.problem_id != b.problem_id ? a.problem_id < b.problem_id : a.variant < b.variant;
  });
}

}  // namespace flows
