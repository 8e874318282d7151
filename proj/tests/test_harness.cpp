#include "corpus_gen.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <invsynth/harness.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>

using namespace invsynth;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name)
{
  static const fs::path root = fs::temp_directory_path() / ("invsynth-harness-" + std::to_string(::getpid()));
  static const struct cleanup
  {
    ~cleanup()
    {
      std::error_code ec;
      fs::remove_all(root, ec);
    }
  } at_exit;
  fs::path dir = root / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path &path, const std::string &text)
{
  std::ofstream(path, std::ios::binary) << text;
}

const char *two_loops = "int main()\n{\n  int i = 0;\n  while (i < 3) i++;\n  for (int j = 0; j < 3; j++) { }\n"
                        "  return 0;\n}\n";

} // namespace

TEST(Normalize, Examples)
{
  EXPECT_EQ(normalize("x = __VERIFIER_nondet_int(); // pick"), "x = unknown_int();");
  EXPECT_EQ(normalize("ERROR: reach_error();"), "//@ assert (\\false);");
  EXPECT_EQ(normalize("  if (n < 0) reach_error();\n"), "  if (n < 0) {\n//@ assert (\\false);\n}\n");
  EXPECT_EQ(normalize("# 1 \"a.c\"\nint main()\n{\n  __VERIFIER_assert(x == 0);\n}\n"),
            "int main()\n{\n  //@ assert (x == 0);\n  return 0;\n}\n");
  EXPECT_EQ(normalize("void main()\n{\n  x = __VERIFIER_nondet_uchar();\n}\n"), "void main()\n{\n  x = unknown_uint();\n}\n");
}

TEST(Normalize, IdempotentAndCountPreserving)
{
  std::mt19937_64 rng(17);
  for(int i = 0; i < 50; ++i)
  {
    const std::string src = corpus_gen::sv_comp_style(rng);
    const std::string once = normalize(src);
    EXPECT_EQ(normalize(once), once) << src;
    EXPECT_EQ(once.find("__VERIFIER_"), std::string::npos) << once;
    EXPECT_EQ(once.find("// "), std::string::npos) << once;
    const category before = categorize(src), after = categorize(once);
    EXPECT_EQ(before.loops, after.loops) << src;
    EXPECT_EQ(before.methods, after.methods) << src;
  }
}

TEST(Normalize, NormalizedExemplarsStillParse)
{
  for(const auto &entry : fs::directory_iterator(support::source_dir() + "/bench/exemplars"))
  {
    if(entry.path().extension() != ".c")
      continue;
    const std::string n = normalize(support::read_file(entry.path()));
    EXPECT_NO_THROW(parse_program(n)) << entry.path();
  }
}

TEST(Categorize, TheSlice)
{
  const category one = categorize(support::exemplar("count_down_signed.c"));
  EXPECT_EQ(one.loops, 1u);
  EXPECT_EQ(one.methods, 1u);
  EXPECT_TRUE(one.included);
  EXPECT_TRUE(one.reason.empty());

  const category two = categorize(two_loops);
  EXPECT_EQ(two.loops, 2u);
  EXPECT_FALSE(two.included);
  EXPECT_EQ(two.reason, "loops=2");

  std::string big = "int main()\n{\n  int x = 0;\n  while (x < 3)\n    x++;\n";
  while(std::count(big.begin(), big.end(), '\n') < 500)
    big += "  x = x;\n";
  big += "}\n";
  ASSERT_EQ(std::count(big.begin(), big.end(), '\n'), 501);
  const category large = categorize(big);
  EXPECT_EQ(large.lines, 501u);
  EXPECT_FALSE(large.included);
  EXPECT_EQ(large.reason, "size");

  EXPECT_TRUE(categorize("int main(){ int a[3]; while(1){} }").arrays);
  EXPECT_TRUE(categorize("int main(){ int *p; while(1){} }").pointers);
  EXPECT_EQ(categorize("int f(){return 1;}\nint main(){ do { } while (f()); }").methods, 2u);
  EXPECT_EQ(categorize("int main(){ do { } while (1); }").loops, 1u);
}

TEST(PassAtK, MatchesEnumeration)
{
  for(std::size_t n = 1; n <= 10; ++n)
    for(std::size_t c = 0; c <= n; ++c)
      for(std::size_t k = 1; k <= n; ++k)
        EXPECT_NEAR(pass_at_k(n, c, k), reference::pass_at_k(n, c, k), 1e-12) << n << " " << c << " " << k;
  EXPECT_EQ(pass_at_k(15, 15, 1), 1.0);
  EXPECT_EQ(pass_at_k(15, 0, 15), 0.0);
  EXPECT_NEAR(pass_at_k(4, 2, 2), 5.0 / 6.0, 1e-15);
}

TEST(PassAtK, MonotoneAndBounded)
{
  for(std::size_t n = 1; n <= 40; ++n)
    for(std::size_t c = 0; c <= n; ++c)
      for(std::size_t k = 1; k <= n; ++k)
      {
        const double v = pass_at_k(n, c, k);
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
        if(k < n)
        {
          ASSERT_LE(v, pass_at_k(n, c, k + 1) + 1e-15);
        }
        if(c < n)
        {
          ASSERT_LE(v, pass_at_k(n, c + 1, k) + 1e-15);
        }
      }
  EXPECT_NEAR(pass_at_k(1000, 3, 500), 1.0 - (500.0 * 499 * 498) / (1000.0 * 999 * 998), 1e-12);
}

TEST(PassAtK, DomainErrors)
{
  EXPECT_THROW(pass_at_k(5, 6, 1), std::domain_error);
  EXPECT_THROW(pass_at_k(5, 2, 0), std::domain_error);
  EXPECT_THROW(pass_at_k(5, 2, 6), std::domain_error);
  EXPECT_THROW(pass_at_k(0, 0, 1), std::domain_error);
}

namespace {

// completion i carries the candidates named in sets[i]
session_record model_session(const std::vector<std::vector<std::size_t>> &sets)
{
  session_record s;
  for(std::size_t i = 0; i < sets.size(); ++i)
  {
    completion_record c;
    c.index = i;
    for(std::size_t id : sets[i])
      c.candidates.insert(parse_invariant(reference::model::name(id), id));
    s.completions.push_back(std::move(c));
  }
  s.n_samples = sets.size();
  return s;
}

} // namespace

TEST(UnionHoudini, FullSubsetIsHoudiniOnTheUnion)
{
  std::mt19937_64 rng(3);
  for(int t = 0; t < 50; ++t)
  {
    const std::size_t m = 2 + rng() % 8;
    const reference::model md = reference::model::random(m, rng);
    std::vector<std::vector<std::size_t>> sets(1 + rng() % 5);
    for(std::size_t i = 0; i < m; ++i)
      sets[rng() % sets.size()].push_back(i);
    const session_record s = model_session(sets);
    reference::model_oracle o(md);
    const program p = reference::model_program(m);
    const double rate = union_houdini_rate(o, p, s, sets.size(), 5, 1);
    const bool expected = reference::exhaustive_search(md).any_verifies;
    EXPECT_EQ(rate, expected ? 1.0 : 0.0);
  }
}

TEST(UnionHoudini, OneSufficientCompletionFollowsTheClosedForm)
{
  // c0 alone verifies; c1 .. c5 are established, inductive and useless
  reference::model md;
  md.established = {true, true, true, true, true, true};
  md.deps = {{}, {}, {2}, {}, {}, {3}};
  md.goals = {{0}};
  const session_record s = model_session({{1}, {2, 3}, {0}, {4}, {5, 1}, {}, {3}, {2}});
  const program p = reference::model_program(6);
  const std::size_t n = s.completions.size(), trials = 4000;
  for(std::size_t k = 1; k <= n; ++k)
  {
    reference::model_oracle o(md);
    const double rate = union_houdini_rate(o, p, s, k, trials, 42 + k);
    const double exact = pass_at_k(n, 1, k);
    const double sigma = std::sqrt(exact * (1 - exact) / static_cast<double>(trials));
    EXPECT_NEAR(rate, exact, 5 * sigma + 1e-12) << "k=" << k;
    // memoized per subset: never more Houdini runs than distinct subsets
    EXPECT_LE(o.checks, trials * 7);
  }
  reference::model_oracle a(md), b(md);
  EXPECT_EQ(union_houdini_rate(a, p, s, 3, 100, 9), union_houdini_rate(b, p, s, 3, 100, 9));
}

TEST(UnionHoudini, DomainErrors)
{
  reference::model md;
  md.established = {true};
  md.deps = {{}};
  md.goals = {{0}};
  reference::model_oracle o(md);
  const session_record s = model_session({{0}, {}});
  const program p = reference::model_program(1);
  EXPECT_THROW(union_houdini_rate(o, p, s, 1, 0, 0), std::domain_error);
  EXPECT_THROW(union_houdini_rate(o, p, s, 0, 10, 0), std::domain_error);
  EXPECT_THROW(union_houdini_rate(o, p, s, 3, 10, 0), std::domain_error);
}

TEST(Corpus, ManifestAndLoading)
{
  const fs::path dir = scratch("corpus");
  write(dir / "b.c", two_loops);
  write(dir / "a.c", support::exemplar("count_down_signed.c"));
  write(dir / "c.c", "int main()\n{\n  int x = __VERIFIER_nondet_int();\n  while (x > 0) x--;\n"
                     "  __VERIFIER_assert(x <= 0);\n}\n");
  write(dir / "notes.txt", "ignored");
  write(dir / "manifest.json", R"({"benchmarks": {"a.c": {"expected": "positive"}, "b.c": {"expected": "negative"}}})");
  const auto entries = load_corpus(dir);
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].id, "a");
  EXPECT_EQ(entries[0].expected, expectation::positive);
  EXPECT_TRUE(entries[0].supported);
  EXPECT_EQ(entries[1].expected, expectation::negative);
  EXPECT_FALSE(entries[1].supported);
  EXPECT_EQ(entries[1].unsupported_reason, "loops=2");
  EXPECT_EQ(entries[2].expected, expectation::unknown);
  EXPECT_TRUE(entries[2].supported) << entries[2].unsupported_reason << "\n" << entries[2].normalized;
  EXPECT_EQ(entries[2].normalized.find("__VERIFIER_"), std::string::npos);

  write(dir / "manifest.json", R"({"a.c": "negative"})");
  EXPECT_EQ(read_manifest(dir).at("a.c"), expectation::negative);
}

TEST(Campaign, EmptyCorpus)
{
  const fs::path dir = scratch("empty"), out = scratch("empty-out");
  campaign_config cfg;
  cfg.out_dir = out;
  const auto report = run_campaign(dir, cfg);
  EXPECT_TRUE(report.results.empty());
  EXPECT_EQ(report.summary.attempted, 0u);
  EXPECT_TRUE(fs::exists(out / "report.csv"));
  EXPECT_TRUE(fs::exists(out / "summary.json"));
}

TEST(Campaign, ExcludedFilesAndRecomputedAggregates)
{
  REQUIRE_Z3();
  const fs::path dir = scratch("mixed"), out = scratch("mixed-out");
  write(dir / "count_down.c", support::exemplar("count_down_signed.c"));
  write(dir / "two_loops.c", two_loops);
  write(dir / "refuted.c", "int main()\n{\n  int x = 0;\n  while (x < 3)\n    x++;\n  assert(x == 4);\n  return 0;\n}\n");
  write(dir / "manifest.json", R"({"count_down.c": "positive", "refuted.c": "positive", "two_loops.c": "positive"})");

  campaign_config cfg;
  cfg.out_dir = out;
  cfg.offline_budget = 40;
  cfg.loopy.n_samples = 2;
  cfg.loopy.eager = true;
  cfg.union_trials = 2;
  const auto report = run_campaign(dir, cfg);
  ASSERT_EQ(report.results.size(), 3u);
  EXPECT_EQ(report.summary.benchmarks, 3u);
  EXPECT_EQ(report.summary.attempted, 2u);

  const std::string csv = report_csv(report);
  EXPECT_EQ(csv.rfind("# invsynth report v1\n", 0), 0u);
  EXPECT_NE(csv.find("two_loops,excluded,loops=2,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("refuted,ran,"), std::string::npos) << csv;

  // the summary is a function of the session files alone
  std::vector<benchmark_result> reloaded;
  for(auto &s : load_sessions(out))
  {
    benchmark_result r;
    for(const auto &orig : report.results)
      if(orig.session && orig.session->benchmark == s.benchmark)
        r = orig;
    r.session = std::move(s);
    reloaded.push_back(std::move(r));
  }
  ASSERT_EQ(reloaded.size(), 2u);
  const auto again = aggregate(reloaded);
  EXPECT_EQ(again.solved_no_houdini, report.summary.solved_no_houdini);
  EXPECT_EQ(again.solved_houdini, report.summary.solved_houdini);
  EXPECT_EQ(again.solved_repair, report.summary.solved_repair);
  EXPECT_EQ(again.ids_houdini, report.summary.ids_houdini);
  ASSERT_EQ(again.pass_at_k.size(), report.summary.pass_at_k.size());
  for(std::size_t i = 0; i < again.pass_at_k.size(); ++i)
    EXPECT_NEAR(again.pass_at_k[i].expected_solved, report.summary.pass_at_k[i].expected_solved, 1e-12);
  EXPECT_EQ(again.union_houdini_solved, report.summary.union_houdini_solved);

  for(const auto &r : report.results)
  {
    if(r.session && r.session->benchmark == "refuted")
    {
      EXPECT_FALSE(r.session->success);
    }
  }
}
