#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flows/value.hpp"

namespace flows::sandbox {

/// "{source}" in an argument list is replaced by the source file name.
struct LanguageConfig {
  std::string source_name = "solution.py";
  std::vector<std::string> run;
  /// Syntax/byte-compile pass run once before the first test; empty skips it.
  std::vector<std::string> check;
};

/// Language tag -> invocation pattern.
class Toolchain {
 public:
  void add(std::string tag, LanguageConfig config);
  /// nullptr when the tag is not configured.
  const LanguageConfig* find(std::string_view tag) const;
  std::vector<std::string> tags() const;

  /// "python", "python3" and "py" run through `python` (default "python3").
  static Toolchain defaults(const std::string& python = "python3");

 private:
  std::map<std::string, LanguageConfig, std::less<>> languages_;
};

struct CandidateProgram {
  std::string language_tag = "python";
  std::string source;
};

struct TestCase {
  std::string input;
  /// Absent only for run-only probes.
  std::optional<std::string> expected_output;

  Value to_value() const;
  static TestCase from_value(const Value& v);
};

struct ExecutionLimits {
  std::chrono::milliseconds wall_time{10'000};
  std::uint64_t memory = 256ull << 20;
};

enum class Verdict { AllPassed, CompilationError, Timeout, RuntimeError, WrongAnswer };

const char* to_string(Verdict v) noexcept;
/// Throws std::invalid_argument.
Verdict verdict_from_string(std::string_view name);

struct Failure {
  /// 1-based test index; 0 for compilation errors.
  std::size_t index = 0;
  std::string input;
  std::string expected;
  /// Program output for wrong answers, error text otherwise.
  std::string actual;

  friend bool operator==(const Failure&, const Failure&) = default;
};

inline constexpr std::string_view kDefaultIssueTitle = "# Issue with the last proposed solution";

struct TestReport {
  Verdict verdict = Verdict::AllPassed;
  std::vector<Failure> failures;
  std::string summary;
};

/// Interpreter missing, spawn failure, temp directory trouble. Never a
/// program verdict.
class SandboxEnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Equal after stripping trailing whitespace on every line and dropping
/// trailing blank lines.
bool compare_output(std::string_view expected, std::string_view actual);

/// Renders the issue report for `report` (ignores report.summary).
std::string format_report(const TestReport& report, std::string_view issue_title = kDefaultIssueTitle);

/// Raw result of one child process.
struct ProcessResult {
  int exit_code = 0;
  int signal = 0;
  bool timed_out = false;
  bool output_limit = false;
  std::string out;
  std::string err;
};

/// Runs `argv` in `workdir` with `input` on stdin under the given limits.
/// Throws SandboxEnvironmentError when the program cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& workdir, std::string_view input,
                          const ExecutionLimits& limits);

/// Judges `program` on `tests` in a fresh temporary directory. Tests run
/// serially; execution stops at the first timeout.
/// Throws std::invalid_argument for empty tests or an unconfigured language,
/// SandboxEnvironmentError for infrastructure failures.
TestReport run_tests(const CandidateProgram& program, const std::vector<TestCase>& tests, const ExecutionLimits& limits,
                     const Toolchain& toolchain, std::string_view issue_title = kDefaultIssueTitle);

}  // namespace flows::sandbox
