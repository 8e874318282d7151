#pragma once

#include "support.hpp"

namespace fixtures {

/// Conjuncts generated before repair for the garbage-y program.
inline invsynth::candidate_set before_repair()
{
  return support::cands({"1 <= x", "x <= 11", "y == 10 - x", "0 <= y", "y <= 9", "y == 10 - (x - 1)", "y < 10"});
}

/// The repaired set: lets y be anything at loop entry.
inline const char *after_repair_response()
{
  return "The invariants need to account for y being uninitialised before the first iteration.\n"
         "```\n"
         "loop invariant x == 1 || y == 10 - x + 1;\n"
         "loop invariant x == 1 || y < 10;\n"
         "```\n";
}

} // namespace fixtures
