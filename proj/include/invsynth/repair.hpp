#pragma once

#include <invsynth/houdini.hpp>
#include <invsynth/proposer.hpp>

#include <optional>
#include <string>
#include <vector>

namespace invsynth {

struct repair_round
{
  std::size_t round = 0;
  /// Verifier feedback placed in the prompt.
  std::string feedback;
  std::string response;
  candidate_set candidates;
  bool direct_success = false;
  std::optional<houdini_outcome> houdini;
  /// Set when the provider failed; the round counts as used.
  std::string provider_error;
};

struct repair_outcome
{
  bool success = false;
  candidate_set invariants;
  std::size_t rounds_used = 0;
  std::size_t oracle_calls = 0;
  std::size_t provider_calls = 0;
  std::vector<repair_round> transcript;
};

struct repair_config
{
  std::size_t rounds = 7;
  prompt_template prompt = builtin_template("Mr");
  generation_config generation;
  std::string benchmark;
  /// Completion index of round 1; later rounds count up from it.
  std::size_t first_index = 0;
};

/// Asks the provider to fix a failing set, round by round: each round
/// renders the repair prompt over the annotated program and the oracle's
/// feedback, checks the returned set directly, then runs Houdini on it.
/// Each round repairs the set returned by the previous one.
repair_outcome repair(
  oracle &o, const program &p, candidate_set candidates, provider &prov, const repair_config &config);

} // namespace invsynth
