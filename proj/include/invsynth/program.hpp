#pragma once

#include <invsynth/expr.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace invsynth {

struct source_location
{
  int line = 0;
  int column = 0;
};

enum class stmt_kind
{
  skip,
  assign,
  havoc, ///< from unknown_int()/unknown_uint() or an uninitialised local
  assume,
  assert_,
  seq,
  if_else,
  return_,
  break_,
  continue_
};

/// Loop-free statement tree. Immutable once built.
struct stmt
{
  stmt_kind kind = stmt_kind::skip;
  std::string target;             ///< assign/havoc
  expr value;                     ///< assign rhs, assume/assert/if condition
  std::vector<stmt> children;     ///< seq items, or {then, else} for if_else
  source_location location;       ///< asserts; ignored by ==

  static stmt skip();
  static stmt assign(std::string v, expr e);
  static stmt havoc(std::string v);
  static stmt assume(expr e);
  static stmt assertion(expr e, source_location at = {});
  static stmt sequence(std::vector<stmt> items);
  static stmt if_else(expr cond, stmt then_branch, stmt else_branch);
  static stmt return_();
  static stmt break_();
  static stmt continue_();

  friend bool operator==(const stmt &a, const stmt &b);
  friend bool operator!=(const stmt &a, const stmt &b) { return !(a == b); }
};

enum class decl_scope
{
  function, ///< visible at the loop head
  loop_body,
  after_loop
};

struct declaration
{
  std::string name;
  int_kind kind = int_kind::signed_int;
  decl_scope scope = decl_scope::function;

  friend bool operator==(const declaration &, const declaration &) = default;
};

struct assertion
{
  expr formula;
  source_location location;
};

/// A single-function, single-loop program:
///   prefix; while(loop_guard) loop_body; suffix
/// The statement fields are what the source says; `pre`, `post`,
/// `entry_asserts` and `body_asserts` are derived from them when parsed.
struct program
{
  std::string name = "main";
  bool returns_int = true;
  std::vector<declaration> decls;

  stmt prefix;
  expr loop_guard;
  stmt loop_body;
  stmt suffix;

  /// Facts holding at loop entry, over the loop-head variables and possibly
  /// `!`-suffixed auxiliaries (earlier versions, havoc results).
  std::vector<expr> pre;
  /// Assertions after the loop, each relative to the loop-exit state.
  std::vector<assertion> post;
  /// Assertions before the loop; closed obligations independent of the loop.
  std::vector<assertion> entry_asserts;
  /// Assertions inside the loop body, in traversal order.
  std::vector<assertion> body_asserts;

  std::string source_text;
  /// Byte offset of the first character of the line holding the loop keyword.
  std::size_t loop_line_offset = 0;
  /// Byte range of a loop annotation block found right before the loop.
  std::optional<std::pair<std::size_t, std::size_t>> annotation_span;

  /// Variables visible at the loop head, in declaration order.
  std::vector<std::string> loop_head_vars() const;
  const declaration *find_decl(const std::string &name) const;
  kind_map kinds() const;

  /// Structural equality: names, declarations and statements; source text
  /// and locations are ignored.
  friend bool operator==(const program &a, const program &b);
};

/// A candidate loop invariant: verbatim text plus, when it parses, its
/// expression. Candidate sets dedup on the normalized expression.
struct candidate
{
  std::string source;
  std::optional<expr> parsed;
  std::size_t id = 0;
  std::string parse_error; ///< why `parsed` is empty

  /// Normalized text: the printed expression if parsed, else the trimmed
  /// source with collapsed whitespace.
  std::string key() const;
};

/// Ordered set of candidates with normalized-key deduplication.
class candidate_set
{
public:
  candidate_set() = default;
  candidate_set(std::initializer_list<candidate> items);

  /// Returns false (and leaves the set unchanged) for a duplicate key.
  bool insert(candidate c);
  void insert_all(const candidate_set &other);
  bool contains(const candidate &c) const;
  bool contains_key(const std::string &key) const;
  /// Removes the candidates whose keys appear in `victims`.
  void remove(const candidate_set &victims);
  void remove_key(const std::string &key);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const candidate &operator[](std::size_t i) const { return items_[i]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  std::vector<std::string> sources() const;
  std::vector<std::string> keys() const;
  const std::string &key(std::size_t i) const { return keys_[i]; }

  friend bool operator==(const candidate_set &a, const candidate_set &b);

private:
  std::vector<candidate> items_;
  std::vector<std::string> keys_;
  std::unordered_set<std::string> index_;
};

struct annotated_program
{
  program prog;
  candidate_set candidates;
};

} // namespace invsynth
