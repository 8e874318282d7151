#pragma once

#include <invsynth/loopy.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace invsynth {

// --- corpus ------------------------------------------------------------------------

/// Benchmark clean-up: comments (not annotations) and preprocessor lines
/// removed, __VERIFIER_* calls mapped to the unknown_*/assume/assert
/// vocabulary, error labels and reach_error() turned into
/// `//@ assert (\false);`, and a default return added to an int main that
/// lacks one. Idempotent.
std::string normalize(const std::string &source);

/// Removes // and /* */ comments, keeping //@ and /*@ annotations, string
/// literals and line structure.
std::string strip_comments(const std::string &source);

struct category
{
  std::size_t loops = 0;
  std::size_t methods = 0;
  bool arrays = false;
  bool pointers = false;
  std::size_t lines = 0;
  bool included = false;
  /// Why the benchmark is outside the single-loop, single-method slice.
  std::string reason;
};

/// Lexical feature scan on comment-stripped text. Definitions of the
/// verifier intrinsics are not counted.
category categorize(const std::string &source);

enum class expectation
{
  positive,
  negative,
  unknown
};

const char *to_string(expectation e);

struct benchmark_entry
{
  std::string id;
  std::filesystem::path path;
  std::string normalized;
  category features;
  bool supported = false;
  std::string unsupported_reason;
  expectation expected = expectation::unknown;
};

/// Expectations from `manifest.json` in the corpus directory:
/// {"benchmarks": {"<file>.c": {"expected": "positive"}}}, or the flat
/// form {"<file>.c": "positive"}.
std::map<std::string, expectation> read_manifest(const std::filesystem::path &corpus);

/// All *.c files of the corpus, sorted by name, normalized and categorized.
std::vector<benchmark_entry> load_corpus(const std::filesystem::path &corpus);

// --- metrics --------------------------------------------------------------------------

/// 1 - C(n-c, k) / C(n, k). Throws std::domain_error unless
/// 0 <= c <= n and 1 <= k <= n.
double pass_at_k(std::size_t n, std::size_t c, std::size_t k);

/// Fraction of `trials` uniformly drawn k-subsets of the session's
/// completions whose union Houdini verifies. Throws std::domain_error for
/// trials == 0, k == 0 or k above the number of completions.
double union_houdini_rate(
  oracle &o, const program &p, const session_record &s, std::size_t k, std::size_t trials, std::uint64_t seed);

// --- campaigns --------------------------------------------------------------------------

struct campaign_config
{
  loopy_config loopy;
  solver_config solver = solver_config::defaults();
  std::string provider_spec = "offline";
  std::size_t offline_budget = 200;
  std::string endpoint_config;
  std::string record_log;
  std::size_t workers = 1;
  std::size_t oracle_jobs = 1;
  std::size_t union_trials = 100;
  std::uint64_t union_seed = 0;
  std::filesystem::path out_dir = "out";
};

struct benchmark_result
{
  benchmark_entry entry;
  std::optional<session_record> session;
  /// rates[k - 1] for k = 1 .. completions; empty when not computed.
  std::vector<double> union_rates;
};

struct pass_at_k_point
{
  std::size_t k = 0;
  double expected_solved = 0;
};

struct campaign_summary
{
  std::size_t benchmarks = 0;
  std::size_t attempted = 0;
  std::size_t solved_no_houdini = 0;
  std::size_t solved_houdini = 0;
  std::size_t solved_repair = 0;
  /// Expected number of benchmarks solved by k completions, over the
  /// sessions with every completion checked.
  std::vector<pass_at_k_point> pass_at_k;
  std::vector<double> union_houdini_solved;
  std::vector<std::string> ids_no_houdini, ids_houdini, ids_repair;
};

struct campaign_report
{
  std::string provider;
  std::string prompt;
  std::vector<benchmark_result> results;
  campaign_summary summary;
};

/// Pure function of the session records (and stored union rates).
campaign_summary aggregate(const std::vector<benchmark_result> &results);

/// Runs loopy on every supported, non-negative benchmark of the corpus and
/// writes sessions/<id>.json, report.csv, passk.csv, solved_sets.json and
/// summary.json under config.out_dir.
campaign_report run_campaign(const std::filesystem::path &corpus, const campaign_config &config);

void write_report(const campaign_report &report, const std::filesystem::path &out_dir);
std::string report_csv(const campaign_report &report);

/// Reloads sessions/<id>.json files written by a campaign.
std::vector<session_record> load_sessions(const std::filesystem::path &out_dir);

} // namespace invsynth
