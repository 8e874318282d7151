#pragma once

#include <iterator>
#include <random>
#include <string>

namespace corpus_gen {

/// A small SV-COMP style file: intrinsic declarations, nondet calls,
/// error labels, comments and preprocessor line markers.
inline std::string sv_comp_style(std::mt19937_64 &rng)
{
  static const char *pieces[] = {
    "  x = __VERIFIER_nondet_int(); // pick\n",
    "  y = __VERIFIER_nondet_uint();\n",
    "  /* block\n     comment */\n",
    "  __VERIFIER_assume(x > 0);\n",
    "  assume_abort_if_not(y < 100);\n",
    "  if (x < 0) { ERROR: reach_error(); }\n",
    "  if (y == 7) goto ERROR;\n",
    "  __VERIFIER_assert(x + y >= 0);\n",
    "  x = x + 1; // bump\n",
    "  //@ assert x >= 0;\n",
    "\n\n\n",
    "# 12 \"file.c\"\n",
    "  if (x > y) reach_error();\n",
    "  while (x > 0) { x--; __VERIFIER_assert(x >= 0); }\n",
  };
  std::string out = "extern void abort(void);\nextern int __VERIFIER_nondet_int(void);\n"
                    "void reach_error() { __assert_fail(\"0\", \"f.c\", 3, \"reach_error\"); }\n"
                    "int main()\n{\n  int x;\n  unsigned int y;\n";
  const std::size_t n = 2 + rng() % 8;
  for(std::size_t i = 0; i < n; ++i)
    out += pieces[rng() % std::size(pieces)];
  if(rng() % 2)
    out += "  return 0;\n";
  out += "}\n";
  if(rng() % 3 == 0)
    out += "// trailing\n";
  return out;
}

} // namespace corpus_gen
