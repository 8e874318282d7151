#pragma once

#include <invsynth/repair.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace invsynth {

struct loopy_config
{
  std::size_t n_samples = 15;
  std::size_t n_repair = 0;
  prompt_template prompt = builtin_template("M2");
  prompt_template repair_prompt = builtin_template("Mr");
  bool enable_houdini = true;
  bool enable_repair = false;
  /// Generate and check all n_samples completions before deciding, instead
  /// of stopping at the first verified one. The outcome is the same; the
  /// record then holds a verdict for every completion (needed for pass@k).
  bool eager = false;
  generation_config generation;
  std::string benchmark;
};

struct completion_record
{
  std::size_t index = 0;
  std::string response;
  candidate_set candidates;
  /// False when the oracle was skipped (empty set) or generation failed.
  bool checked = false;
  bool success = false;
  std::size_t blamed = 0;
  std::optional<std::string> syntax_error;
  std::string provider_error;
  double latency_ms = 0;
};

enum class solved_by
{
  none,
  completion,
  houdini,
  repair
};

const char *to_string(solved_by s);

struct session_record
{
  static constexpr int schema_version = 1;

  std::string benchmark;
  std::string provider;
  std::string prompt;
  std::size_t n_samples = 0;
  std::size_t n_repair = 0;
  bool houdini_enabled = false;
  bool repair_enabled = false;

  std::vector<completion_record> completions;
  candidate_set union_set;
  std::optional<houdini_outcome> houdini;
  std::optional<repair_outcome> repair;

  bool success = false;
  solved_by how = solved_by::none;
  /// Index of the first completion that verified on its own.
  std::optional<std::size_t> first_success;
  candidate_set invariants;

  std::size_t oracle_calls = 0;
  std::size_t provider_calls = 0;
  double wall_ms = 0;
  /// Infrastructure failure that ended the session early.
  std::string error;
};

/// Sample, check each completion, union + Houdini, then repair.
session_record loopy(oracle &o, const program &p, provider &prov, const loopy_config &config);

nlohmann::json to_json(const session_record &s);
session_record session_from_json(const nlohmann::json &j);

} // namespace invsynth
