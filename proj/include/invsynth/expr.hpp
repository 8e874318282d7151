#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace invsynth {

enum class int_kind
{
  signed_int,
  unsigned_int
};

/// How integer terms are interpreted by the evaluator and the SMT encoding.
enum class int_semantics
{
  unbounded, ///< mathematical integers, Euclidean div/mod
  wrap32     ///< 32-bit two's complement, C division, unsigned-aware ordering
};

enum class expr_kind
{
  // integer terms
  int_const,
  var,
  neg,
  add,
  sub,
  mul,
  div,
  mod,
  // boolean terms
  bool_const,
  nondet, ///< a nondeterministic choice, only legal as a branch/loop condition
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  not_,
  and_,
  or_,
  implies,
  iff,
  forall
};

bool is_boolean(expr_kind k);
bool is_comparison(expr_kind k);
const char *op_symbol(expr_kind k);

/// Immutable expression tree with value semantics; nodes are shared.
class expr
{
public:
  expr(); ///< the constant `true`

  expr_kind kind() const { return node_->kind; }
  std::int64_t value() const { return node_->value; }
  const std::string &name() const { return node_->name; }
  const std::vector<expr> &args() const { return node_->args; }
  const expr &arg(std::size_t i) const { return node_->args.at(i); }

  bool is_boolean() const { return invsynth::is_boolean(kind()); }
  bool is_true() const { return kind() == expr_kind::bool_const && value() != 0; }
  bool is_false() const { return kind() == expr_kind::bool_const && value() == 0; }

  friend bool operator==(const expr &a, const expr &b);
  friend bool operator!=(const expr &a, const expr &b) { return !(a == b); }

  static expr make(
    expr_kind kind,
    std::vector<expr> args,
    std::int64_t value = 0,
    std::string name = {});

private:
  struct node
  {
    expr_kind kind;
    std::int64_t value;
    std::string name;
    std::vector<expr> args;
  };

  explicit expr(std::shared_ptr<const node> n) : node_(std::move(n)) {}

  std::shared_ptr<const node> node_;
};

expr int_const(std::int64_t v);
expr var(std::string name);
expr bool_const(bool b);
expr nondet();
expr unary(expr_kind k, expr a);
expr binary(expr_kind k, expr a, expr b);
expr forall(std::string bound, expr body);

expr operator+(expr a, expr b);
expr operator-(expr a, expr b);
expr operator*(expr a, expr b);
expr operator!(expr a);
expr operator&&(expr a, expr b);
expr operator||(expr a, expr b);
expr implies(expr a, expr b);

/// Conjunction of a list; `true` when empty, the element itself when single.
expr conjunction(const std::vector<expr> &parts);
expr disjunction(const std::vector<expr> &parts);

/// Splits nested top-level `&&` into its conjuncts, left to right.
std::vector<expr> conjuncts(const expr &e);

using substitution = std::map<std::string, expr>;

/// Simultaneous substitution of free variables. Bound variables of `forall`
/// shadow the map entries with the same name.
expr substitute(const expr &e, const substitution &s);

std::set<std::string> free_vars(const expr &e);
bool contains_kind(const expr &e, expr_kind k);

/// Divisors of `/` and `%` that are not integer literals.
std::vector<expr> variable_divisors(const expr &e);

/// C/ACSL surface syntax with minimal parentheses and single spaces around
/// binary operators. Stable: used as the normalized key of candidates.
std::string to_string(const expr &e);

/// Interpretation of the `!`-suffixed auxiliary names introduced by symbolic
/// execution and weakest preconditions: `x!3` has the kind of `x`.
std::string base_name(const std::string &name);

using kind_map = std::map<std::string, int_kind>;

int_kind kind_of(const std::string &name, const kind_map &kinds);

/// C usual-arithmetic-conversion approximation: a term is unsigned when any
/// variable it mentions is unsigned.
bool is_unsigned_term(const expr &e, const kind_map &kinds);

} // namespace invsynth
