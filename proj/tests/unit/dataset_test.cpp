#include <gtest/gtest.h>

#include <fstream>

#include <flows/dataset.hpp>

#include "test_support.hpp"

namespace flows {
namespace {

using testing::TempDir;

Value problem_doc(const std::string& id, const std::string& date, Value difficulty = 800,
                  const std::string& source = "codeforces") {
  return Value{{"id", id},
               {"source", source},
               {"difficulty", std::move(difficulty)},
               {"release_date", date},
               {"problem_description", "d"},
               {"input_description", "i"},
               {"output_description", "o"},
               {"public_examples", {{{"input", "1\n"}, {"output", "1\n"}}}},
               {"hidden_tests", {{{"input", "2\n"}, {"output", "2\n"}}}}};
}

std::string fmt_month(int m) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "2021-%02d-15", m);
  return buf;
}

void write(const std::filesystem::path& p, const Value& v) { std::ofstream(p) << v.dump(2); }

Problem problem(const std::string& id, const std::string& date, Difficulty d = 800) {
  Problem p;
  p.id = id;
  p.source = std::holds_alternative<Band>(d) ? "leetcode" : "codeforces";
  p.difficulty = d;
  p.release_date = parse_date(date);
  return p;
}

TEST(Load, DirectoryOfThree) {
  TempDir dir;
  for (const char* id : {"c", "a", "b"}) write(dir / (std::string(id) + ".json"), problem_doc(id, "2021-01-01"));
  const auto ps = load_problems(dir.path());
  ASSERT_EQ(ps.size(), 3u);
  EXPECT_EQ(ps[0].id, "a");
  EXPECT_EQ(ps[2].id, "c");
}

TEST(Load, SingleFile) {
  TempDir dir;
  write(dir / "x.json", problem_doc("x", "2021-01-01", "medium", "leetcode"));
  const auto ps = load_problems(dir / "x.json");
  ASSERT_EQ(ps.size(), 1u);
  EXPECT_EQ(std::get<Band>(ps[0].difficulty), Band::medium);
}

TEST(Load, MissingReleaseDateNamesField) {
  TempDir dir;
  auto doc = problem_doc("x", "2021-01-01");
  doc.erase("release_date");
  write(dir / "x.json", doc);
  try {
    load_problems(dir.path());
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.field(), "release_date");
    EXPECT_NE(e.file().find("x.json"), std::string::npos);
  }
}

TEST(Load, BadDate) {
  TempDir dir;
  write(dir / "x.json", problem_doc("x", "2021-13-01"));
  try {
    load_problems(dir.path());
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.field(), "release_date");
  }
}

TEST(Load, RejectsUnknownFieldsDuplicatesAndBadValues) {
  {
    TempDir dir;
    auto doc = problem_doc("x", "2021-01-01");
    doc["extra"] = 1;
    write(dir / "x.json", doc);
    EXPECT_THROW(load_problems(dir.path()), DatasetError);
  }
  {
    TempDir dir;
    write(dir / "a.json", problem_doc("x", "2021-01-01"));
    write(dir / "b.json", problem_doc("x", "2021-01-01"));
    EXPECT_THROW(load_problems(dir.path()), DatasetError);
  }
  {
    TempDir dir;
    write(dir / "a.json", problem_doc("x", "2021-01-01", "extreme", "leetcode"));
    EXPECT_THROW(load_problems(dir.path()), DatasetError);
  }
  {
    TempDir dir;
    write(dir / "a.json", problem_doc("x", "2021-01-01", 800, "atcoder"));
    EXPECT_THROW(load_problems(dir.path()), DatasetError);
  }
  {
    TempDir dir;
    auto doc = problem_doc("x", "2021-01-01");
    doc["public_examples"] = Value{{{"input", "1"}}};
    write(dir / "a.json", doc);
    EXPECT_THROW(load_problems(dir.path()), DatasetError);
  }
  {
    TempDir dir;
    std::ofstream(dir / "a.json") << "{not json";
    EXPECT_THROW(load_problems(dir.path()), DatasetError);
  }
}

TEST(Load, CompanionHiddenTests) {
  const auto ps = load_problems(testing::fixture_dir() / "cc6" / "problems");
  ASSERT_EQ(ps.size(), 6u);
  const auto& p4 = ps[3];
  EXPECT_EQ(p4.id, "P4");
  EXPECT_GE(p4.hidden_tests.size(), 2u);
  EXPECT_FALSE(ps[5].human_plan.has_value());
}

TEST(Load, MissingCompanionFile) {
  TempDir dir;
  auto doc = problem_doc("x", "2021-01-01");
  doc["hidden_tests"] = "x.tests.json";
  write(dir / "x.json", doc);
  try {
    load_problems(dir.path());
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.field(), "hidden_tests");
  }
}

TEST(Load, OrderInsensitive) {
  TempDir a;
  TempDir b;
  for (const char* id : {"p1", "p2", "p3"}) write(a / (std::string(id) + ".json"), problem_doc(id, "2021-01-01"));
  for (const char* id : {"p3", "p1", "p2"}) write(b / ("z" + std::string(id) + ".json"), problem_doc(id, "2021-01-01"));
  std::vector<std::string> ia;
  std::vector<std::string> ib;
  for (const auto& p : load_problems(a.path())) ia.push_back(p.id);
  for (const auto& p : load_problems(b.path())) ib.push_back(p.id);
  EXPECT_EQ(ia, ib);
}

TEST(Split, Examples) {
  const auto s = split_by_cutoff({problem("a", "2021-05-01"), problem("b", "2021-11-01")});
  EXPECT_EQ(s.pre.size(), 1u);
  EXPECT_EQ(s.post.size(), 1u);
  EXPECT_TRUE(split_by_cutoff({problem("a", "2020-01-01"), problem("b", "2021-08-31")}).post.empty());
  const auto boundary = split_by_cutoff({problem("a", "2021-09-01")});
  EXPECT_TRUE(boundary.pre.empty());
  EXPECT_EQ(boundary.post.size(), 1u);
}

TEST(Split, Partitions) {
  std::vector<Problem> ps;
  for (int m = 1; m <= 12; ++m) ps.push_back(problem("p" + std::to_string(m), fmt_month(m)));
  const auto s = split_by_cutoff(ps, parse_date("2021-06-15"));
  EXPECT_EQ(s.pre.size() + s.post.size(), ps.size());
  for (const auto& p : s.pre) EXPECT_LT(p.release_date, parse_date("2021-06-15"));
  for (const auto& p : s.post) EXPECT_GE(p.release_date, parse_date("2021-06-15"));
}

TEST(Buckets, OnePerBucket) {
  std::vector<Problem> ps;
  int i = 0;
  for (const char* date : {"2021-01-01", "2022-01-01"}) {
    for (Band b : {Band::easy, Band::medium, Band::hard}) ps.push_back(problem("p" + std::to_string(i++), date, b));
  }
  const auto buckets = bucket_leetcode(ps);
  for (const auto& b : buckets) EXPECT_EQ(b.problems.size(), 1u) << b.label();
  EXPECT_EQ(buckets[0].label(), "pre-easy");
  EXPECT_EQ(buckets[5].label(), "post-hard");
}

std::vector<Problem> easy_pre(int n) {
  std::vector<Problem> ps;
  for (int i = 0; i < n; ++i) {
    char date[16];
    std::snprintf(date, sizeof date, "2020-%02d-%02d", 1 + i / 28, 1 + i % 28);
    ps.push_back(problem("e" + std::to_string(1000 + i), date, Band::easy));
  }
  return ps;
}

TEST(Buckets, TruncatesToTargetEarliestFirst) {
  BucketOptions o;
  o.target = 93;
  const auto ps = easy_pre(120);
  const auto buckets = bucket_leetcode(ps, o);
  ASSERT_EQ(buckets[0].problems.size(), 93u);
  EXPECT_EQ(buckets[0].problems.front().id, "e1000");
  EXPECT_EQ(buckets[0].problems.back().id, "e1092");
}

TEST(Buckets, SeededTruncationIsDeterministic) {
  BucketOptions o;
  o.target = 10;
  o.seed = 7;
  const auto ps = easy_pre(50);
  auto ids = [&](const BucketOptions& opt) {
    std::vector<std::string> out;
    for (const auto& p : bucket_leetcode(ps, opt)[0].problems) out.push_back(p.id);
    return out;
  };
  EXPECT_EQ(ids(o), ids(o));
  EXPECT_EQ(ids(o).size(), 10u);
  auto other = o;
  other.seed = 8;
  EXPECT_NE(ids(o), ids(other));
}

TEST(Buckets, RatingValuedProblemIsAnError) {
  EXPECT_THROW(bucket_leetcode({problem("a", "2021-01-01", 1200)}), DatasetError);
}

}  // namespace
}  // namespace flows
