#pragma once

#include <invsynth/program.hpp>

#include <string>
#include <string_view>

namespace invsynth {

/// Parses one single-loop, single-function integer program (see
/// docs/grammar.md). A loop annotation block, if present, is skipped; use
/// parse_annotated() to read it.
///
/// Throws syntax_error on malformed text and unsupported_feature on valid C
/// outside the subset (no loop, several loops, arrays, pointers, ...).
program parse_program(std::string_view text);

/// Like parse_program(), and also returns the candidates listed in the
/// `loop invariant` clauses right before the loop.
annotated_program parse_annotated(std::string_view text);

/// Parses an ACSL-style boolean expression. Throws syntax_error.
expr parse_expression(std::string_view text);

/// Never throws: text that does not parse yields a candidate without an
/// expression whose `parse_error` holds the reason.
candidate parse_invariant(std::string_view text, std::size_t id = 0);

/// Fills the derived fields (pre, post, entry_asserts, body_asserts) from the
/// statement fields. parse_program() already calls this; programs assembled
/// by hand need it once.
void derive_obligations(program &p);

} // namespace invsynth
