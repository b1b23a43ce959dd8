#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "flows/date.hpp"
#include "flows/sandbox.hpp"

namespace flows {

enum class Band { easy, medium, hard };

const char* to_string(Band b) noexcept;

/// Codeforces problems carry an integer rating, LeetCode problems a band.
using Difficulty = std::variant<int, Band>;

struct Problem {
  std::string id;
  std::string source;  ///< "codeforces" | "leetcode"
  Difficulty difficulty = 0;
  Date release_date{};
  std::string problem_description;
  std::string input_description;
  std::string output_description;
  std::vector<sandbox::TestCase> public_examples;
  std::optional<std::string> explanation;
  std::vector<sandbox::TestCase> hidden_tests;
  std::optional<std::string> human_plan;
};

/// Names the document and the offending field.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(std::string file, std::string field, const std::string& message);

  const std::string& file() const noexcept { return file_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string file_;
  std::string field_;
};

/// Parses one problem document. `hidden_tests` may be an inline list or a
/// path (relative to `origin`'s directory) of a JSON list of tests.
Problem parse_problem(const Value& doc, const std::filesystem::path& origin);

/// Loads a single problem file, or every "*.json" file in a directory except
/// "*.tests.json" companions. Results are sorted by id.
std::vector<Problem> load_problems(const std::filesystem::path& path);

inline constexpr Date kDefaultCutoff{std::chrono::year{2021}, std::chrono::month{9}, std::chrono::day{1}};

struct CutoffSplit {
  Date cutoff{};
  std::vector<Problem> pre;
  std::vector<Problem> post;
};

/// release_date < cutoff goes to pre; the boundary date goes to post.
CutoffSplit split_by_cutoff(const std::vector<Problem>& problems, Date cutoff = kDefaultCutoff);

struct Bucket {
  bool post = false;
  Band band = Band::easy;
  std::vector<Problem> problems;

  /// "pre-easy", "post-hard", ...
  std::string label() const;
};

struct BucketOptions {
  Date cutoff = kDefaultCutoff;
  /// Truncate each bucket to at most this many problems.
  std::optional<std::size_t> target;
  /// When set, truncation keeps a seeded random subset instead of the
  /// earliest problems by (release_date, id).
  std::optional<std::uint64_t> seed;
};

/// Six buckets ordered pre-easy, pre-medium, pre-hard, post-easy, ...
/// Throws DatasetError for problems without a band difficulty.
std::array<Bucket, 6> bucket_leetcode(const std::vector<Problem>& problems, const BucketOptions& options = {});

}  // namespace flows
