#pragma once

#include <invsynth/program.hpp>

#include <string>

namespace invsynth {

/// Canonical C rendering of a program. parse_program(pretty_print(p)) == p.
std::string pretty_print(const program &p);

/// Expression in C syntax (boolean constants as 1/0).
std::string to_c_string(const expr &e);

/// The program's source with one loop annotation block right before the loop:
///
///     /*@
///       loop invariant <source>;
///     */
///
/// An annotation block already sitting before the loop is replaced. Programs
/// without source text are pretty-printed first.
std::string annotate(const program &p, const candidate_set &candidates);

} // namespace invsynth
