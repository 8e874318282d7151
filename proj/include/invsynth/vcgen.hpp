#pragma once

#include <invsynth/program.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace invsynth {

enum class vc_kind
{
  establishment,   ///< target: candidate id
  preservation,    ///< target: candidate id
  sufficiency,     ///< target: index into program::post
  body_assertion,  ///< target: index into program::body_asserts
  entry_assertion, ///< target: index into program::entry_asserts
  division_guard   ///< divisors in the loop guard or body are nonzero
};

const char *to_string(vc_kind k);

/// A validity query. Free variables of `formula` are implicitly universally
/// quantified; havoc results inside the body appear as `forall`-bound names.
struct verification_condition
{
  vc_kind kind = vc_kind::establishment;
  std::size_t target = 0;
  source_location location;
  expr formula;
  /// Ids of the candidates assumed in the hypothesis.
  std::vector<std::size_t> provenance;
  kind_map kinds;
};

/// How `assert` statements behave in wp.
enum class assert_mode
{
  check,  ///< assert(e) yields e && Q
  assume  ///< assert(e) yields e ==> Q (checked elsewhere)
};

/// Postconditions for the four ways a loop-body statement can finish.
struct continuations
{
  expr normal;
  expr brk = bool_const(true);
  expr cont;
  expr ret = bool_const(true);
};

struct wp_options
{
  assert_mode asserts = assert_mode::check;
  /// When set, only the assertion with this traversal index is checked; the
  /// others are assumed. Overrides `asserts`.
  std::optional<std::size_t> only_assert;
  /// `d != 0` for every non-literal divisor: checked (conjoined) or assumed
  /// (as a hypothesis of what follows).
  assert_mode divisors = assert_mode::assume;
  kind_map kinds;
};

/// Weakest precondition of a loop-free statement: normal completion and
/// `continue` lead to `post`, `break` and `return` to `true`.
expr wp(const stmt &s, const expr &post, const wp_options &opt = {});
expr wp(const stmt &s, const continuations &k, const wp_options &opt = {});

/// (/\ pre) ==> I. Throws missing_expr for an unparsed candidate.
verification_condition establishment_vc(const program &p, const candidate &c);

/// (/\ all parsed candidates /\ B) ==> wp(S, target). Unparsed members of
/// `all` are left out of the hypothesis; an unparsed target throws
/// missing_expr.
verification_condition preservation_vc(
  const program &p, const candidate_set &all, const candidate &target);

/// One VC per post assertion, then one per body assertion, then a division
/// guard VC when the loop guard or body divides by a non-literal. With a
/// `break` in the body the exit condition covers both loop exits.
std::vector<verification_condition> sufficiency_vc(const program &p, const candidate_set &candidates);

/// Assertions (and division guards) before the loop; independent of any
/// candidate.
std::vector<verification_condition> entry_vcs(const program &p);

} // namespace invsynth
