#pragma once

#include <invsynth/oracle.hpp>

#include <string>
#include <vector>

namespace invsynth {

enum class prune_reason
{
  syntax,
  blamed
};

const char *to_string(prune_reason r);

struct prune_step
{
  std::size_t iteration = 0;
  candidate_set pruned;
  prune_reason reason = prune_reason::blamed;
};

struct houdini_outcome
{
  bool success = false;
  candidate_set survivors;
  std::size_t oracle_calls = 0;
  std::vector<prune_step> trace;
};

/// Removes the offending candidates until the oracle accepts the rest: one
/// syntax error per iteration, all blamed candidates at once. Stops with
/// failure when nothing is blamed but the set still does not verify, or
/// when the set runs empty. At most |candidates| + 1 oracle calls.
houdini_outcome houdini(oracle &o, const program &p, candidate_set candidates);

} // namespace invsynth
