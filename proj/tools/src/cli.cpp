#include "flowsctl/cli.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include <flows/cc_flows.hpp>
#include <flows/grid.hpp>
#include <flows/registry.hpp>
#include <flows/replay.hpp>
#include <flows/stats.hpp>
#include <flows/table.hpp>

#include "flowsctl/profiles.hpp"

namespace flowsctl {

namespace fs = std::filesystem;

namespace {

/// Failures of the host environment rather than of the inputs.
class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string profile = "scripted";
  std::string profiles_file;
  std::uint64_t seed = flows::kDefaultBootstrapSeed;
  double wall_time = 10.0;
  std::uint64_t memory_mib = 256;
  int max_rounds = 4;
  bool interactive_plan = false;
  std::string python = "python3";
  std::string out = "runs";
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--backend-profile", o.profile, "Backend profile name")->capture_default_str();
  cmd.add_option("--profiles", o.profiles_file, "Profiles file (default: nearest profiles.json in the dataset directory or above)");
  cmd.add_option("--seed", o.seed, "Seed for bootstrap resampling")->capture_default_str();
  cmd.add_option("--wall-time", o.wall_time, "Per-test wall time in seconds")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd.add_option("--memory", o.memory_mib, "Per-test memory limit in MiB")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd.add_option("--max-rounds", o.max_rounds, "Refinement rounds for feedback variants")->capture_default_str()->check(
      CLI::PositiveNumber);
  cmd.add_flag("--interactive-plan", o.interactive_plan, "Read oracle plans from the console");
  cmd.add_option("--python", o.python, "Python interpreter used by the sandbox")->capture_default_str();
  cmd.add_option("--out", o.out, "Output directory")->capture_default_str();
}

flows::VariantSettings variant_settings(const CommonOptions& o) {
  flows::VariantSettings s;
  s.max_rounds = o.max_rounds;
  s.limits.wall_time = std::chrono::milliseconds(static_cast<long long>(o.wall_time * 1000.0));
  s.limits.memory = o.memory_mib << 20;
  s.interactive_plan = o.interactive_plan;
  return s;
}

fs::path profiles_path(const CommonOptions& o, const fs::path& dataset) {
  if (!o.profiles_file.empty()) return o.profiles_file;
  fs::path d = fs::absolute(dataset).lexically_normal();
  if (d.filename().empty()) d = d.parent_path();
  if (!fs::is_directory(d)) d = d.parent_path();
  for (fs::path at = d; !at.empty(); at = at.parent_path()) {
    if (fs::exists(at / "profiles.json")) return at / "profiles.json";
    if (at == at.root_path()) break;
  }
  return d / "profiles.json";
}

void preflight(const flows::sandbox::Toolchain& toolchain, const std::string& language) {
  const auto* lang = toolchain.find(language);
  if (lang == nullptr) throw EnvironmentError("no toolchain for language '" + language + "'");
  try {
    flows::sandbox::run_process({lang->run.front(), "-c", "pass"}, fs::temp_directory_path().string(), {},
                                flows::sandbox::ExecutionLimits{});
  } catch (const flows::sandbox::SandboxEnvironmentError& e) {
    throw EnvironmentError(e.what());
  }
}

std::vector<flows::FlowVariant> parse_variant_list(const std::string& list) {
  if (list.empty()) return flows::default_variants();
  std::vector<flows::FlowVariant> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(flows::parse_variant(item));
  }
  if (out.empty()) throw std::invalid_argument("no variants given");
  return out;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << bytes;
  if (!f) throw EnvironmentError("cannot write '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct ReportSpec {
  std::vector<std::string> problems;
  std::vector<std::string> variants;
  std::optional<flows::Date> cutoff;
  std::uint64_t seed = flows::kDefaultBootstrapSeed;
  std::string baseline = "Code";

  flows::Value to_value() const {
    return flows::Value{{"problems", problems},
                        {"variants", variants},
                        {"cutoff", cutoff ? flows::Value(flows::format_date(*cutoff)) : flows::Value()},
                        {"seed", seed},
                        {"baseline", baseline}};
  }
  static ReportSpec from_value(const flows::Value& v) {
    ReportSpec s;
    s.problems = v.at("problems").get<std::vector<std::string>>();
    s.variants = v.at("variants").get<std::vector<std::string>>();
    if (!v.at("cutoff").is_null()) s.cutoff = flows::parse_date(v["cutoff"].get<std::string>());
    s.seed = v.at("seed").get<std::uint64_t>();
    s.baseline = v.value("baseline", "Code");
    return s;
  }
};

constexpr const char* kSpecFile = "eval.json";
constexpr const char* kTableFile = "results.txt";
constexpr const char* kTableCsvFile = "results.csv";
constexpr const char* kSeriesFile = "series.csv";

/// Renders table and series from persisted records; returns the table text.
std::string render_outputs(const fs::path& out_dir, const ReportSpec& spec) {
  std::vector<flows::RunRecord> records;
  const std::set<std::string> problems(spec.problems.begin(), spec.problems.end());
  const std::set<std::string> variants(spec.variants.begin(), spec.variants.end());
  for (auto& r : flows::read_records(out_dir / flows::kRecordsFile)) {
    if (problems.count(r.problem_id) && variants.count(r.variant)) records.push_back(std::move(r));
  }
  flows::sort_records(records);
  const auto table = flows::rates_from_records(records, spec.variants, spec.cutoff, spec.seed);
  const std::string text = flows::render_results_table(table, spec.baseline);
  write_file(out_dir / kTableFile, text);
  write_file(out_dir / kTableCsvFile, flows::render_results_csv(table, spec.baseline));

  std::vector<flows::LabeledSeries> series;
  for (const auto& v : spec.variants) {
    std::vector<flows::RunRecord> mine;
    for (const auto& r : records) {
      if (r.variant == v) mine.push_back(r);
    }
    series.push_back({v, flows::sliding_window(mine, 2, 1, spec.seed)});
  }
  write_file(out_dir / kSeriesFile, flows::series_to_csv(series));
  return text;
}

flows::sandbox::Toolchain toolchain_for(const CommonOptions& o) { return flows::sandbox::Toolchain::defaults(o.python); }

std::unique_ptr<flows::ResponseCache> cache_for(const BackendProfile& profile) {
  if (profile.type != "remote" || !profile.cache_dir) return nullptr;
  return std::make_unique<flows::ResponseCache>(*profile.cache_dir);
}

int cmd_run(const std::string& problem_file, const std::string& variant_name, const CommonOptions& o, Io io) {
  const auto variant = flows::parse_variant(variant_name);
  const auto problems = flows::load_problems(problem_file);
  if (problems.size() != 1) throw std::invalid_argument("'" + problem_file + "' must hold exactly one problem");
  const auto profile = load_profile(profiles_path(o, problem_file), o.profile);
  const auto toolchain = toolchain_for(o);
  preflight(toolchain, "python");
  const auto cache = cache_for(profile);

  flows::GridSettings settings;
  settings.variant = variant_settings(o);
  settings.backends = make_backend_factory(profile);
  settings.cache = cache.get();
  settings.toolchain = &toolchain;
  settings.out_dir = o.out;
  settings.console = flows::Console{&io.in, &io.out};
  fs::create_directories(settings.out_dir);

  const auto outcome = flows::run_single(problems.front(), variant, settings);
  const auto& rec = outcome.record;
  if (outcome.error_kind == flows::FlowErrorKind::environment) {
    io.err << "error: " << rec.error.value_or("environment failure") << '\n';
    return kEnvironment;
  }
  io.out << "problem: " << rec.problem_id << '\n'
         << "variant: " << rec.variant << '\n'
         << "rounds_used: " << rec.rounds_used << '\n'
         << "verdict: " << (rec.hidden_verdict.empty() ? "none" : rec.hidden_verdict) << '\n'
         << "trace: " << (fs::path(o.out) / rec.trace_ref).string() << '\n';
  if (rec.error) io.out << "error: " << *rec.error << '\n';
  if (!outcome.program.empty()) io.out << "```python\n" << outcome.program << "\n```\n";
  return rec.solved ? kSolved : kUnsolved;
}

int cmd_eval(const std::string& dataset, const std::string& variant_list, std::size_t workers, bool resume,
             const std::string& cutoff_text, const CommonOptions& o, Io io) {
  const auto variants = parse_variant_list(variant_list);
  if (workers < 1) throw std::invalid_argument("--workers must be at least 1");
  if (o.interactive_plan && workers != 1) throw std::invalid_argument("--interactive-plan requires --workers 1");
  std::optional<flows::Date> cutoff;
  if (!cutoff_text.empty()) cutoff = flows::parse_date(cutoff_text);
  const auto problems = flows::load_problems(dataset);
  const auto profile = load_profile(profiles_path(o, dataset), o.profile);
  const auto toolchain = toolchain_for(o);
  preflight(toolchain, "python");
  const auto cache = cache_for(profile);

  flows::GridSettings settings;
  settings.variant = variant_settings(o);
  settings.backends = make_backend_factory(profile);
  settings.cache = cache.get();
  settings.toolchain = &toolchain;
  settings.out_dir = o.out;
  settings.workers = workers;
  settings.resume = resume;
  settings.console = flows::Console{&io.in, &io.out};

  const auto result = flows::evaluate_grid(problems, variants, settings);

  ReportSpec spec;
  for (const auto& p : problems) spec.problems.push_back(p.id);
  for (const auto& v : variants) spec.variants.push_back(v.display_name());
  spec.cutoff = cutoff;
  spec.seed = o.seed;
  write_file(fs::path(o.out) / kSpecFile, spec.to_value().dump(2) + "\n");
  const std::string table = render_outputs(o.out, spec);

  std::size_t failed = 0;
  for (const auto& r : result.records) failed += r.error ? 1 : 0;
  io.out << result.new_runs << " new runs\n" << result.records.size() << " records";
  if (failed > 0) io.out << " (" << failed << " with errors)";
  io.out << "\n\n" << table;
  return kSolved;
}

int cmd_report(const std::string& out_dir, const std::string& cutoff_text, bool has_seed, std::uint64_t seed, Io io) {
  const fs::path dir(out_dir);
  ReportSpec spec = ReportSpec::from_value(flows::Value::parse(read_file(dir / kSpecFile)));
  if (!cutoff_text.empty()) spec.cutoff = flows::parse_date(cutoff_text);
  if (has_seed) spec.seed = seed;
  io.out << render_outputs(dir, spec);
  return kSolved;
}

int cmd_replay(const std::string& trace_file, const std::string& config_file, const std::string& python, Io io) {
  std::vector<flows::TraceEvent> events;
  try {
    events = flows::read_trace(trace_file);
  } catch (const std::runtime_error& e) {
    throw std::invalid_argument(e.what());
  }
  auto recorded = flows::recorded_run(events);
  if (!config_file.empty()) recorded.config = flows::load_flow_config(config_file);
  auto backends = flows::replay_backend(events);
  const auto toolchain = flows::sandbox::Toolchain::defaults(python);
  auto flow = flows::create_flow(recorded.config);

  flows::MemoryTraceSink sink;
  flows::RunContext ctx;
  ctx.trace = &sink;
  ctx.backends = backends.resolver.get();
  ctx.toolchain = &toolchain;
  ctx.console = flows::Console{&io.in, &io.out};
  try {
    flow->run(flows::package_input(recorded.input, recorded.created_by, {}), ctx);
  } catch (const flows::FlowError& e) {
    if (e.kind() == flows::FlowErrorKind::replay_divergence) {
      io.out << "diverged: " << e.what() << '\n';
      return kUnsolved;
    }
    if (e.kind() == flows::FlowErrorKind::environment) throw EnvironmentError(e.what());
  }
  const auto a = flows::normalize_trace(events);
  const auto b = flows::normalize_trace(sink.events());
  if (const auto at = flows::first_trace_difference(a, b)) {
    io.out << "diverged at event " << (*at + 1) << '\n';
    io.out << "  recorded: " << (*at < a.size() ? flows::canonical_dump(a[*at]) : std::string("<end of trace>")) << '\n';
    io.out << "  replayed: " << (*at < b.size() ? flows::canonical_dump(b[*at]) : std::string("<end of trace>")) << '\n';
    return kUnsolved;
  }
  io.out << "identical (" << a.size() << " events)\n";
  return kSolved;
}

int cmd_cache(const std::string& action, const std::string& dir, Io io) {
  flows::ResponseCache cache(dir);
  if (action == "clear") {
    cache.clear();
    io.out << "cleared " << dir << '\n';
    return kSolved;
  }
  const auto stats = cache.stats();
  io.out << "entries: " << stats.entries << "\nbytes: " << stats.bytes << '\n';
  return kSolved;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, Io io) {
  CLI::App app{"Run, evaluate and replay competitive-coding flows", "flowsctl"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  std::string problem_file;
  std::string variant_name;
  auto* run = app.add_subcommand("run", "Run one variant on one problem");
  run->add_option("--problem", problem_file, "Problem file")->required();
  run->add_option("--variant", variant_name, "Variant name, e.g. Code_Debug")->required();
  add_common(*run, run_opts);

  CommonOptions eval_opts;
  std::string dataset;
  std::string variant_list;
  std::size_t workers = 1;
  bool resume = true;
  std::string cutoff;
  auto* eval = app.add_subcommand("eval", "Evaluate a problem x variant grid");
  eval->add_option("--dataset", dataset, "Problem directory")->required();
  eval->add_option("--variants", variant_list, "Comma-separated variants (default: the nine evaluated variants)");
  eval->add_option("--workers", workers, "Concurrent runs")->capture_default_str();
  eval->add_flag("--resume,!--no-resume", resume, "Skip pairs already recorded")->capture_default_str();
  eval->add_option("--cutoff", cutoff, "Knowledge cutoff date (YYYY-MM-DD); splits the table into pre/post groups");
  add_common(*eval, eval_opts);

  std::string report_dir;
  std::string report_cutoff;
  std::uint64_t report_seed = flows::kDefaultBootstrapSeed;
  auto* report = app.add_subcommand("report", "Re-render tables and series from persisted records");
  report->add_option("--out", report_dir, "Run directory written by eval")->required();
  report->add_option("--cutoff", report_cutoff, "Override the cutoff used by eval");
  auto* report_seed_opt = report->add_option("--seed", report_seed, "Override the bootstrap seed used by eval");

  std::string trace_file;
  std::string config_file;
  std::string replay_python = "python3";
  std::uint64_t replay_seed = 0;
  auto* replay = app.add_subcommand("replay", "Re-execute a recorded run against its own backend responses");
  replay->add_option("--trace", trace_file, "Trace file")->required();
  replay->add_option("--config", config_file, "Flow config to run instead of the recorded one");
  replay->add_option("--python", replay_python, "Python interpreter used by the sandbox")->capture_default_str();
  replay->add_option("--seed", replay_seed, "Accepted for uniformity; replay is deterministic");

  std::string cache_action;
  std::string cache_dir = ".flows-cache";
  std::uint64_t cache_seed = 0;
  auto* cache = app.add_subcommand("cache", "Inspect or clear the response cache");
  cache->add_option("action", cache_action, "stats | clear")->required()->check(CLI::IsMember({"stats", "clear"}));
  cache->add_option("--cache-dir", cache_dir, "Cache directory")->capture_default_str();
  cache->add_option("--seed", cache_seed, "Accepted for uniformity");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, io.out, io.err);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*run) return cmd_run(problem_file, variant_name, run_opts, io);
    if (*eval) return cmd_eval(dataset, variant_list, workers, resume, cutoff, eval_opts, io);
    if (*report) return cmd_report(report_dir, report_cutoff, report_seed_opt->count() > 0, report_seed, io);
    if (*replay) return cmd_replay(trace_file, config_file, replay_python, io);
    if (*cache) return cmd_cache(cache_action, cache_dir, io);
  } catch (const EnvironmentError& e) {
    io.err << "error: " << e.what() << '\n';
    return kEnvironment;
  } catch (const flows::sandbox::SandboxEnvironmentError& e) {
    io.err << "error: " << e.what() << '\n';
    return kEnvironment;
  } catch (const flows::ConfigError& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const flows::DatasetError& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const flows::TableError& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    io.err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kEnvironment;
  }
  return kUsage;
}

}  // namespace flowsctl
