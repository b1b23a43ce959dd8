#include "flows/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>

extern char** environ;

namespace flows::sandbox {

namespace fs = std::filesystem;

void Toolchain::add(std::string tag, LanguageConfig config) {
  if (config.run.empty()) throw std::invalid_argument("language '" + tag + "' has an empty run command");
  languages_.insert_or_assign(std::move(tag), std::move(config));
}

const LanguageConfig* Toolchain::find(std::string_view tag) const {
  const auto it = languages_.find(tag);
  return it == languages_.end() ? nullptr : &it->second;
}

std::vector<std::string> Toolchain::tags() const {
  std::vector<std::string> out;
  for (const auto& [tag, _] : languages_) out.push_back(tag);
  return out;
}

Toolchain Toolchain::defaults(const std::string& python) {
  LanguageConfig py;
  py.source_name = "solution.py";
  py.run = {python, "{source}"};
  py.check = {python, "-m", "py_compile", "{source}"};
  Toolchain t;
  for (const char* tag : {"python", "python3", "py"}) t.add(tag, py);
  return t;
}

Value TestCase::to_value() const {
  Value v{{"input", input}};
  if (expected_output) v["output"] = *expected_output;
  return v;
}

TestCase TestCase::from_value(const Value& v) {
  TestCase t;
  t.input = v.at("input").get<std::string>();
  if (v.contains("output")) t.expected_output = v["output"].get<std::string>();
  return t;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::AllPassed: return "AllPassed";
    case Verdict::CompilationError: return "CompilationError";
    case Verdict::Timeout: return "Timeout";
    case Verdict::RuntimeError: return "RuntimeError";
    case Verdict::WrongAnswer: return "WrongAnswer";
  }
  return "RuntimeError";
}

Verdict verdict_from_string(std::string_view name) {
  for (auto v : {Verdict::AllPassed, Verdict::CompilationError, Verdict::Timeout, Verdict::RuntimeError,
                 Verdict::WrongAnswer}) {
    if (name == to_string(v)) return v;
  }
  throw std::invalid_argument("unknown verdict '" + std::string(name) + "'");
}

namespace {

std::vector<std::string_view> normalized_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    const auto last = line.find_last_not_of(" \t\r\f\v");
    line = last == std::string_view::npos ? std::string_view{} : line.substr(0, last + 1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

/// Drops leading blank lines and trailing whitespace; indentation survives.
std::string trim_block(std::string_view s) {
  const auto last = s.find_last_not_of(" \t\r\n");
  if (last == std::string_view::npos) return {};
  std::size_t first = 0;
  for (std::size_t i = 0; i <= last; ++i) {
    if (s[i] == '\n') first = i + 1;
    else if (s[i] != ' ' && s[i] != '\t' && s[i] != '\r') break;
  }
  return std::string(s.substr(first, last - first + 1));
}

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { close(); }
  void close() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

void make_pipe(Fd& r, Fd& w) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw SandboxEnvironmentError(std::string("pipe: ") + std::strerror(errno));
  r.fd = fds[0];
  w.fd = fds[1];
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "flows-sandbox-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw SandboxEnvironmentError(std::string("cannot create temporary directory: ") + std::strerror(errno));
    }
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

constexpr std::size_t kOutputCap = 16u << 20;

std::vector<std::string> substitute(const std::vector<std::string>& pattern, const std::string& source) {
  std::vector<std::string> out;
  for (const auto& arg : pattern) out.push_back(arg == "{source}" ? source : arg);
  return out;
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string process_error_text(const ProcessResult& r) {
  std::string text = trim_block(r.err);
  if (r.output_limit) return text.empty() ? "output limit exceeded" : text + "\noutput limit exceeded";
  if (r.signal != 0 && text.empty()) return std::string("terminated by signal ") + ::strsignal(r.signal);
  if (text.empty()) return "exit status " + std::to_string(r.exit_code);
  return text;
}

/// Drops the per-run temporary directory from error text ("/tmp/x/solution.py" -> "solution.py").
std::string scrub_workdir(std::string text, const std::filesystem::path& workdir) {
  std::error_code ec;
  const auto real = std::filesystem::canonical(workdir, ec);
  for (const auto& dir : {workdir.string(), ec ? workdir.string() : real.string()}) {
    const std::string prefix = dir + "/";
    for (auto pos = text.find(prefix); pos != std::string::npos; pos = text.find(prefix, pos)) {
      text.erase(pos, prefix.size());
    }
  }
  return text;
}

}  // namespace

bool compare_output(std::string_view expected, std::string_view actual) {
  return normalized_lines(expected) == normalized_lines(actual);
}

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& workdir, std::string_view input,
                          const ExecutionLimits& limits) {
  if (argv.empty()) throw SandboxEnvironmentError("empty command");
  ignore_sigpipe();

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  std::vector<std::string> env_store;
  for (char** e = environ; *e != nullptr; ++e) {
    if (std::strncmp(*e, "PYTHONHASHSEED=", 15) != 0) env_store.emplace_back(*e);
  }
  env_store.emplace_back("PYTHONHASHSEED=0");
  env_store.emplace_back("PYTHONDONTWRITEBYTECODE=1");
  std::vector<char*> envp;
  for (auto& e : env_store) envp.push_back(e.data());
  envp.push_back(nullptr);

  Fd in_r, in_w, out_r, out_w, err_r, err_w, exec_r, exec_w;
  make_pipe(in_r, in_w);
  make_pipe(out_r, out_w);
  make_pipe(err_r, err_w);
  make_pipe(exec_r, exec_w);

  const rlim_t mem = static_cast<rlim_t>(limits.memory);
  const pid_t pid = ::fork();
  if (pid < 0) throw SandboxEnvironmentError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    if (::chdir(workdir.c_str()) != 0 || ::dup2(in_r.fd, 0) < 0 || ::dup2(out_w.fd, 1) < 0 ||
        ::dup2(err_w.fd, 2) < 0) {
      const int err = errno;
      (void)!::write(exec_w.fd, &err, sizeof err);
      ::_exit(127);
    }
    struct rlimit rl{mem, mem};
    ::setrlimit(RLIMIT_AS, &rl);
    struct rlimit core{0, 0};
    ::setrlimit(RLIMIT_CORE, &core);
    ::execvpe(args[0], args.data(), envp.data());
    const int err = errno;
    (void)!::write(exec_w.fd, &err, sizeof err);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  in_r.close();
  out_w.close();
  err_w.close();
  exec_w.close();

  int exec_errno = 0;
  if (::read(exec_r.fd, &exec_errno, sizeof exec_errno) == static_cast<ssize_t>(sizeof exec_errno)) {
    ::waitpid(pid, nullptr, 0);
    throw SandboxEnvironmentError("cannot start '" + argv[0] + "': " + std::strerror(exec_errno));
  }

  ::fcntl(in_w.fd, F_SETFL, ::fcntl(in_w.fd, F_GETFL) | O_NONBLOCK);
  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() + limits.wall_time;
  std::size_t written = 0;
  if (input.empty()) in_w.close();

  auto kill_group = [&] { ::kill(-pid, SIGKILL); };
  char buf[65536];
  while (out_r.fd >= 0 || err_r.fd >= 0) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      kill_group();
      break;
    }
    pollfd fds[3];
    int n = 0;
    int idx_in = -1, idx_out = -1, idx_err = -1;
    if (in_w.fd >= 0) {
      idx_in = n;
      fds[n++] = {in_w.fd, POLLOUT, 0};
    }
    if (out_r.fd >= 0) {
      idx_out = n;
      fds[n++] = {out_r.fd, POLLIN, 0};
    }
    if (err_r.fd >= 0) {
      idx_err = n;
      fds[n++] = {err_r.fd, POLLIN, 0};
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    const int rc = ::poll(fds, static_cast<nfds_t>(n), static_cast<int>(std::min<long long>(left, 1000)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      kill_group();
      ::waitpid(pid, nullptr, 0);
      throw SandboxEnvironmentError(std::string("poll: ") + std::strerror(errno));
    }
    if (idx_in >= 0 && fds[idx_in].revents != 0) {
      if (fds[idx_in].revents & (POLLERR | POLLHUP)) {
        in_w.close();
      } else {
        const ssize_t w = ::write(in_w.fd, input.data() + written, input.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if ((w < 0 && errno != EAGAIN && errno != EINTR) || written == input.size()) in_w.close();
      }
    }
    auto drain = [&](int idx, Fd& fd, std::string& sink) {
      if (idx < 0 || fds[idx].revents == 0) return;
      const ssize_t r = ::read(fd.fd, buf, sizeof buf);
      if (r > 0) {
        sink.append(buf, static_cast<std::size_t>(r));
        if (result.out.size() + result.err.size() > kOutputCap) {
          result.output_limit = true;
          kill_group();
          out_r.close();
          err_r.close();
        }
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        fd.close();
      }
    };
    drain(idx_out, out_r, result.out);
    drain(idx_err, err_r, result.err);
  }
  in_w.close();

  int status = 0;
  for (;;) {
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (!result.timed_out && std::chrono::steady_clock::now() >= deadline) {
      result.timed_out = true;
      kill_group();
    }
    ::usleep(2000);
  }
  // Reap any grandchildren left in the group.
  ::kill(-pid, SIGKILL);

  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  if (WIFSIGNALED(status)) {
    result.signal = WTERMSIG(status);
    result.exit_code = 128 + result.signal;
  }
  return result;
}

TestReport run_tests(const CandidateProgram& program, const std::vector<TestCase>& tests, const ExecutionLimits& limits,
                     const Toolchain& toolchain, std::string_view issue_title) {
  if (tests.empty()) throw std::invalid_argument("run_tests needs at least one test");
  if (limits.wall_time.count() <= 0 || limits.memory == 0) throw std::invalid_argument("limits must be positive");
  const LanguageConfig* lang = toolchain.find(program.language_tag);
  if (lang == nullptr) throw std::invalid_argument("no toolchain configured for language '" + program.language_tag + "'");

  TempDir dir;
  {
    std::ofstream src(dir.path() / lang->source_name, std::ios::binary);
    src << program.source;
    if (!src) throw SandboxEnvironmentError("cannot write candidate source");
  }

  TestReport report;
  auto finish = [&] {
    report.summary = format_report(report, issue_title);
    return report;
  };

  if (!lang->check.empty()) {
    auto r = run_process(substitute(lang->check, lang->source_name), dir.path().string(), {}, limits);
    r.err = scrub_workdir(std::move(r.err), dir.path());
    std::error_code ec;
    std::filesystem::remove_all(dir.path() / "__pycache__", ec);
    if (r.timed_out || r.exit_code != 0) {
      report.verdict = Verdict::CompilationError;
      report.failures.push_back({0, {}, {}, r.timed_out ? "compilation timed out" : process_error_text(r)});
      return finish();
    }
  }

  const auto argv = substitute(lang->run, lang->source_name);
  std::optional<Failure> runtime;
  std::vector<Failure> wrong;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const auto& t = tests[i];
    auto r = run_process(argv, dir.path().string(), t.input, limits);
    r.err = scrub_workdir(std::move(r.err), dir.path());
    const std::string expected = t.expected_output.value_or("");
    if (r.timed_out) {
      report.verdict = Verdict::Timeout;
      report.failures.push_back({i + 1, t.input, expected, {}});
      return finish();
    }
    if (r.exit_code != 0 || r.output_limit) {
      if (!runtime) runtime = Failure{i + 1, t.input, expected, process_error_text(r)};
      continue;
    }
    if (t.expected_output && !compare_output(*t.expected_output, r.out)) wrong.push_back({i + 1, t.input, expected, r.out});
  }
  if (runtime) {
    report.verdict = Verdict::RuntimeError;
    report.failures.push_back(*runtime);
  } else if (!wrong.empty()) {
    report.verdict = Verdict::WrongAnswer;
    report.failures = std::move(wrong);
  }
  return finish();
}

std::string format_report(const TestReport& report, std::string_view issue_title) {
  const std::string title(issue_title);
  const std::string fence = "```\n";
  auto field = [](const std::string& s) { return strip_trailing_newlines(s); };
  switch (report.verdict) {
    case Verdict::AllPassed:
      return title + "\nAll of the executed tests passed.";
    case Verdict::CompilationError:
      return title + "\nThe execution resulted in a compilation error.\n## Compilation error message:\n" +
             (report.failures.empty() ? std::string() : report.failures.front().actual);
    case Verdict::Timeout:
      return title + "\nThe execution timed out, the solution is not efficient enough.";
    case Verdict::RuntimeError: {
      const Failure f = report.failures.empty() ? Failure{} : report.failures.front();
      return title + "\nThe execution resulted in a runtime error on the following test.\n## [Failed test] Input\n" +
             fence + field(f.input) + "\n" + fence + "## [Failed test] Runtime error message\n" + f.actual;
    }
    case Verdict::WrongAnswer:
      break;
  }
  const std::string logical =
      "\nThe Python code does not solve the problem in the problem description due to logical errors.";
  if (report.failures.size() == 1) {
    const auto& f = report.failures.front();
    return title + logical + " It fails the following test:\n## [Failed test] Input\n" + fence + field(f.input) + "\n" +
           fence + "## [Failed test] Expected output\n" + fence + field(f.expected) + "\n" + fence +
           "## [Failed test] Generated output\n" + fence + field(f.actual) + "\n```";
  }
  std::string out = title + logical + " It fails on the following tests.";
  for (std::size_t k = 0; k < report.failures.size(); ++k) {
    const auto& f = report.failures[k];
    const std::string idx = std::to_string(k + 1);
    out += "\n## [Failed test " + idx + "]\n### [Failed test " + idx + "] Input\n" + fence + field(f.input) + "\n" +
           fence + "### [Failed test " + idx + "] Expected output\n" + fence + field(f.expected) + "\n" + fence +
           "### [Failed test " + idx + "] Generated output\n" + fence + field(f.actual) + "\n```";
  }
  return out;
}

}  // namespace flows::sandbox
