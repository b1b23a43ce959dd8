#include "flows/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "flows/rng.hpp"

namespace flows {

namespace fs = std::filesystem;

const char* to_string(Band b) noexcept {
  switch (b) {
    case Band::easy: return "easy";
    case Band::medium: return "medium";
    case Band::hard: return "hard";
  }
  return "easy";
}

DatasetError::DatasetError(std::string file, std::string field, const std::string& message)
    : std::runtime_error(file + (field.empty() ? "" : ": field '" + field + "'") + ": " + message),
      file_(std::move(file)),
      field_(std::move(field)) {}

namespace {

Value read_json(const fs::path& path, const std::string& file) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(file, "", "cannot open");
  try {
    return Value::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DatasetError(file, "", e.what());
  }
}

std::vector<sandbox::TestCase> parse_tests(const Value& v, const std::string& file, const std::string& field,
                                           bool need_output) {
  if (!v.is_array()) throw DatasetError(file, field, "must be a list of {input, output}");
  std::vector<sandbox::TestCase> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& t = v[i];
    const std::string where = field + "[" + std::to_string(i) + "]";
    if (!t.is_object()) throw DatasetError(file, where, "must be a map");
    for (const auto& [key, _] : t.items()) {
      if (key != "input" && key != "output") throw DatasetError(file, where + "." + key, "unknown field");
    }
    if (!t.contains("input") || !t["input"].is_string()) throw DatasetError(file, where + ".input", "must be text");
    sandbox::TestCase tc;
    tc.input = t["input"].get<std::string>();
    if (t.contains("output")) {
      if (!t["output"].is_string()) throw DatasetError(file, where + ".output", "must be text");
      tc.expected_output = t["output"].get<std::string>();
    } else if (need_output) {
      throw DatasetError(file, where + ".output", "missing expected output");
    }
    out.push_back(std::move(tc));
  }
  return out;
}

}  // namespace

Problem parse_problem(const Value& doc, const fs::path& origin) {
  const std::string file = origin.string();
  if (!doc.is_object()) throw DatasetError(file, "", "problem document must be a map");
  static const std::set<std::string> known{"id",
                                           "source",
                                           "difficulty",
                                           "release_date",
                                           "problem_description",
                                           "input_description",
                                           "output_description",
                                           "public_examples",
                                           "explanation",
                                           "hidden_tests",
                                           "human_plan"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.count(key)) throw DatasetError(file, key, "unknown field");
  }
  auto text = [&](const char* key, bool required) -> std::optional<std::string> {
    if (!doc.contains(key)) {
      if (required) throw DatasetError(file, key, "missing");
      return std::nullopt;
    }
    if (!doc[key].is_string()) throw DatasetError(file, key, "must be text");
    return doc[key].get<std::string>();
  };

  Problem p;
  p.id = *text("id", true);
  if (p.id.empty()) throw DatasetError(file, "id", "must be non-empty");
  p.source = *text("source", true);
  if (p.source != "codeforces" && p.source != "leetcode") {
    throw DatasetError(file, "source", "must be codeforces or leetcode");
  }
  if (!doc.contains("difficulty")) throw DatasetError(file, "difficulty", "missing");
  const auto& d = doc["difficulty"];
  if (d.is_number_integer()) {
    p.difficulty = d.get<int>();
  } else if (d == "easy") {
    p.difficulty = Band::easy;
  } else if (d == "medium") {
    p.difficulty = Band::medium;
  } else if (d == "hard") {
    p.difficulty = Band::hard;
  } else {
    throw DatasetError(file, "difficulty", "must be an integer rating or easy|medium|hard");
  }
  const auto date = *text("release_date", true);
  try {
    p.release_date = parse_date(date);
  } catch (const std::invalid_argument& e) {
    throw DatasetError(file, "release_date", e.what());
  }
  p.problem_description = *text("problem_description", true);
  p.input_description = *text("input_description", true);
  p.output_description = *text("output_description", true);
  if (!doc.contains("public_examples")) throw DatasetError(file, "public_examples", "missing");
  p.public_examples = parse_tests(doc["public_examples"], file, "public_examples", true);
  p.explanation = text("explanation", false);
  p.human_plan = text("human_plan", false);

  if (!doc.contains("hidden_tests")) throw DatasetError(file, "hidden_tests", "missing");
  const auto& h = doc["hidden_tests"];
  if (h.is_string()) {
    const fs::path companion = origin.parent_path() / h.get<std::string>();
    std::error_code ec;
    if (!fs::is_regular_file(companion, ec)) {
      throw DatasetError(file, "hidden_tests", "companion file '" + companion.string() + "' not found");
    }
    p.hidden_tests = parse_tests(read_json(companion, companion.string()), companion.string(), "hidden_tests", true);
  } else {
    p.hidden_tests = parse_tests(h, file, "hidden_tests", true);
  }
  return p;
}

std::vector<Problem> load_problems(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw DatasetError(path.string(), "", "does not exist");
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto name = entry.path().filename().string();
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      if (name.size() >= 11 && name.ends_with(".tests.json")) continue;
      files.push_back(entry.path());
    }
  } else {
    files.push_back(path);
  }
  std::vector<Problem> out;
  for (const auto& f : files) out.push_back(parse_problem(read_json(f, f.string()), f));
  std::sort(out.begin(), out.end(), [](const Problem& a, const Problem& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].id == out[i - 1].id) throw DatasetError(path.string(), "id", "duplicate id '" + out[i].id + "'");
  }
  return out;
}

CutoffSplit split_by_cutoff(const std::vector<Problem>& problems, Date cutoff) {
  CutoffSplit split;
  split.cutoff = cutoff;
  for (const auto& p : problems) (p.release_date < cutoff ? split.pre : split.post).push_back(p);
  return split;
}

std::string Bucket::label() const { return std::string(post ? "post-" : "pre-") + to_string(band); }

std::array<Bucket, 6> bucket_leetcode(const std::vector<Problem>& problems, const BucketOptions& options) {
  std::array<Bucket, 6> buckets;
  for (std::size_t i = 0; i < 6; ++i) {
    buckets[i].post = i >= 3;
    buckets[i].band = static_cast<Band>(i % 3);
  }
  for (const auto& p : problems) {
    const Band* band = std::get_if<Band>(&p.difficulty);
    if (band == nullptr) throw DatasetError(p.id, "difficulty", "bucketing needs an easy|medium|hard band");
    const std::size_t idx = (p.release_date < options.cutoff ? 0 : 3) + static_cast<std::size_t>(*band);
    buckets[idx].problems.push_back(p);
  }
  for (auto& b : buckets) {
    auto& v = b.problems;
    std::sort(v.begin(), v.end(), [](const Problem& x, const Problem& y) {
      return x.release_date != y.release_date ? x.release_date < y.release_date : x.id < y.id;
    });
    if (!options.target || v.size() <= *options.target) continue;
    if (options.seed) {
      Xoshiro256 rng(*options.seed);
      for (std::size_t i = v.size() - 1; i > 0; --i) std::swap(v[i], v[rng.below(i + 1)]);
      v.resize(*options.target);
      std::sort(v.begin(), v.end(), [](const Problem& x, const Problem& y) {
        return x.release_date != y.release_date ? x.release_date < y.release_date : x.id < y.id;
      });
    } else {
      v.resize(*options.target);
    }
  }
  return buckets;
}

}  // namespace flows
