#include "flows/grid.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "flows/compose.hpp"
#include "flows/registry.hpp"

namespace flows {

namespace fs = std::filesystem;

fs::path trace_path(const fs::path& out_dir, const std::string& problem_id, const std::string& variant) {
  return out_dir / problem_id / variant / "trace.log";
}

namespace {

std::string difficulty_text(const Difficulty& d) {
  if (const int* rating = std::get_if<int>(&d)) return std::to_string(*rating);
  return to_string(std::get<Band>(d));
}

std::map<std::string, int> count_calls(const fs::path& trace) {
  std::map<std::string, int> calls;
  for (const auto& e : read_trace(trace)) {
    if (e.kind == EventKind::flow_start) ++calls[e.body.at("name").get<std::string>()];
  }
  return calls;
}

}  // namespace

RunOutcome run_single(const Problem& problem, const FlowVariant& variant, const GridSettings& settings) {
  RunOutcome out;
  RunRecord& rec = out.record;
  rec.problem_id = problem.id;
  rec.variant = variant.display_name();
  rec.release_date = problem.release_date;
  rec.source = problem.source;
  rec.difficulty = difficulty_text(problem.difficulty);
  const fs::path trace_file = trace_path(settings.out_dir, problem.id, rec.variant);
  rec.trace_ref = fs::relative(trace_file, settings.out_dir).generic_string();

  const auto started = std::chrono::steady_clock::now();
  auto fail = [&](FlowErrorKind kind, const std::string& what) {
    out.error_kind = kind;
    rec.solved = false;
    rec.error = what;
  };

  try {
    std::shared_ptr<BackendResolver> backends = settings.backends(problem, variant);
    FlowPtr flow = create_flow(build_variant(variant, settings.variant));
    Payload output;
    {
      FileTraceSink sink(trace_file);
      RunContext ctx;
      ctx.trace = &sink;
      ctx.backends = backends.get();
      ctx.cache = settings.cache;
      ctx.toolchain = settings.toolchain;
      ctx.console = settings.console;
      const Message input = package_input(problem_payload(problem), InstanceId("operator"), {});
      try {
        output = flow->run(input, ctx).payload();
      } catch (const FlowError& e) {
        fail(e.kind(), e.what());
      }
    }
    rec.calls = count_calls(trace_file);
    if (!rec.error) {
      rec.rounds_used = rounds_used(output);
      const auto it = output.find("code");
      out.program = it != output.end() && it->second.is_string() ? it->second.get<std::string>() : std::string();
      if (problem.hidden_tests.empty()) {
        fail(FlowErrorKind::failed, "problem has no hidden tests");
      } else if (settings.toolchain == nullptr) {
        fail(FlowErrorKind::environment, "no sandbox toolchain configured");
      } else {
        const auto report = sandbox::run_tests({settings.variant.language, out.program}, problem.hidden_tests,
                                               settings.variant.limits, *settings.toolchain,
                                               settings.variant.issue_title);
        rec.hidden_verdict = sandbox::to_string(report.verdict);
        rec.solved = report.verdict == sandbox::Verdict::AllPassed;
      }
    }
  } catch (const sandbox::SandboxEnvironmentError& e) {
    fail(FlowErrorKind::environment, e.what());
  } catch (const FlowError& e) {
    fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    fail(FlowErrorKind::failed, e.what());
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

GridResult evaluate_grid(const std::vector<Problem>& problems, const std::vector<FlowVariant>& variants,
                         const GridSettings& settings) {
  if (settings.workers < 1) throw std::invalid_argument("worker count must be at least 1");
  if (!settings.backends) throw std::invalid_argument("grid needs a backend factory");
  fs::create_directories(settings.out_dir);
  const fs::path records_file = settings.out_dir / kRecordsFile;

  std::vector<RunRecord> existing;
  if (settings.resume) existing = read_records(records_file);
  {
    // Rewrite so an interrupted trailing line never precedes new appends.
    const fs::path tmp = records_file.string() + ".tmp";
    std::ofstream rewrite(tmp, std::ios::binary | std::ios::trunc);
    for (const auto& r : existing) rewrite << record_line(r) << '\n';
    rewrite.close();
    if (!rewrite) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    fs::rename(tmp, records_file);
  }

  std::set<std::pair<std::string, std::string>> done;
  for (const auto& r : existing) done.emplace(r.problem_id, r.variant);

  std::vector<std::pair<const Problem*, FlowVariant>> todo;
  std::set<std::pair<std::string, std::string>> requested;
  for (const auto& p : problems) {
    for (const auto& v : variants) {
      requested.emplace(p.id, v.display_name());
      if (!done.count({p.id, v.display_name()})) todo.emplace_back(&p, v);
    }
  }

  GridResult result;
  for (const auto& r : existing) {
    if (requested.count({r.problem_id, r.variant})) result.records.push_back(r);
  }

  std::ofstream out(records_file, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open '" + records_file.string() + "'");
  std::mutex writer;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      RunOutcome o = run_single(*todo[i].first, todo[i].second, settings);
      std::lock_guard lock(writer);
      out << record_line(o.record) << '\n';
      out.flush();
      result.records.push_back(o.record);
      ++result.new_runs;
      if (settings.on_record) settings.on_record(o.record);
    }
  };
  const std::size_t n = std::min(settings.workers, std::max<std::size_t>(todo.size(), 1));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!out) throw std::runtime_error("write to '" + records_file.string() + "' failed");
  sort_records(result.records);
  return result;
}

}  // namespace flows
