#pragma once

#include <invsynth/expr.hpp>
#include <invsynth/program.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace invsynth {

using valuation = std::map<std::string, std::int64_t>;

struct eval_options
{
  int_semantics semantics = int_semantics::unbounded;
  kind_map kinds;
  /// Finite domain for `forall`; without one, quantifiers evaluate to
  /// nothing (undetermined).
  std::optional<std::pair<std::int64_t, std::int64_t>> quantifier_range;
};

/// Concrete evaluation. Unassigned variables read as 0. Returns nothing on
/// division by zero, arithmetic beyond 2^62 in unbounded mode, `nondet`, or
/// an unbounded quantifier.
std::optional<std::int64_t> evaluate_int(const expr &e, const valuation &env, const eval_options &opt);
std::optional<bool> evaluate_bool(const expr &e, const valuation &env, const eval_options &opt);

/// Canonical in-range representative of `v` for a variable of `kind`: the
/// identity in unbounded mode; int32/uint32 wraparound in wrap32 mode.
std::int64_t normalize_value(std::int64_t v, int_kind kind, int_semantics semantics);

struct bounded_options
{
  std::int64_t low = -6;
  std::int64_t high = 6;
  int max_iterations = 64;
  int_semantics semantics = int_semantics::unbounded;
  std::size_t max_states = 2'000'000;
};

struct assertion_violation
{
  source_location location;
  valuation state;
};

struct exploration_result
{
  /// Distinct loop-head states over the loop-head variables.
  std::vector<valuation> loop_head_states;
  std::vector<assertion_violation> violations;
  /// Paths dropped because an expression was undefined (division by zero,
  /// overflow beyond the evaluator's range).
  std::size_t undefined_paths = 0;
  bool truncated = false;
};

/// Exhaustive execution from every initial state with uninitialised
/// variables and havoc results drawn from [low, high] (non-negative part for
/// unsigned variables), unrolling the loop at most `max_iterations` times.
exploration_result explore_bounded(const program &p, const bounded_options &opt);

} // namespace invsynth
