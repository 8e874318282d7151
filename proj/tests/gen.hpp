#pragma once

// Random single-loop programs and loop-free statements for property tests.

#include <invsynth/parser.hpp>
#include <invsynth/program.hpp>

#include <random>
#include <string>
#include <vector>

namespace gen {

using invsynth::expr;
using invsynth::expr_kind;
using invsynth::stmt;

class generator
{
public:
  explicit generator(std::uint64_t seed, std::vector<std::string> vars = {"a", "b", "c"})
    : rng_(seed), vars_(std::move(vars))
  {
  }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(int percent) { return uniform(0, 99) < percent; }
  const std::string &any_var() { return vars_[static_cast<std::size_t>(uniform(0, static_cast<int>(vars_.size()) - 1))]; }

  expr term()
  {
    switch(uniform(0, 5))
    {
    case 0:
      return invsynth::int_const(uniform(0, 3));
    case 1:
    case 2:
      return invsynth::var(any_var());
    case 3:
      return invsynth::var(any_var()) + invsynth::int_const(uniform(1, 2));
    case 4:
      return invsynth::var(any_var()) - invsynth::var(any_var());
    default:
      return invsynth::var(any_var()) - invsynth::int_const(uniform(1, 2));
    }
  }

  expr comparison()
  {
    static const expr_kind ops[] = {expr_kind::eq, expr_kind::ne, expr_kind::lt,
                                    expr_kind::le, expr_kind::gt, expr_kind::ge};
    return invsynth::binary(ops[uniform(0, 5)], invsynth::var(any_var()), term());
  }

  expr condition()
  {
    expr c = comparison();
    if(chance(20))
      c = c && comparison();
    else if(chance(15))
      c = c || comparison();
    else if(chance(10))
      c = !c;
    return c;
  }

  /// Right-hand side, with occasional division by a variable.
  expr rhs(bool allow_division)
  {
    if(allow_division && chance(10))
    {
      const expr_kind k = chance(50) ? expr_kind::div : expr_kind::mod;
      if(chance(50))
        return invsynth::binary(k, invsynth::var(any_var()), invsynth::int_const(uniform(2, 3)));
      return invsynth::binary(k, invsynth::var(any_var()), invsynth::var(any_var()));
    }
    if(chance(8))
      return invsynth::var(any_var()) * invsynth::int_const(2);
    return term();
  }

  struct stmt_options
  {
    bool jumps = false;   ///< break / continue / return
    bool asserts = false;
    bool division = false;
    bool nondet = true;
  };

  stmt statement(int depth, const stmt_options &o)
  {
    const int roll = uniform(0, 99);
    if(roll < 40)
      return stmt::assign(any_var(), rhs(o.division));
    if(roll < 50)
      return stmt::havoc(any_var());
    if(roll < 58)
      return stmt::assume(condition());
    if(roll < 64 && o.asserts)
      return stmt::assertion(condition());
    if(roll < 85 && depth > 0)
    {
      const expr c = o.nondet && chance(15) ? invsynth::nondet() : condition();
      return stmt::if_else(c, block(depth - 1, o, 1, 2), chance(50) ? block(depth - 1, o, 1, 2) : stmt::sequence({}));
    }
    if(o.jumps && roll >= 85)
    {
      const int j = uniform(0, 2);
      return j == 0 ? stmt::break_() : j == 1 ? stmt::continue_() : stmt::return_();
    }
    return stmt::assign(any_var(), term());
  }

  stmt block(int depth, const stmt_options &o, int lo, int hi)
  {
    std::vector<stmt> items;
    const int n = uniform(lo, hi);
    for(int i = 0; i < n; ++i)
      items.push_back(statement(depth, o));
    return stmt::sequence(std::move(items));
  }

  /// A parsed-back-able program: int variables at function scope, a prefix of
  /// initialisations, a guarded loop and a post assertion.
  invsynth::program program(const stmt_options &body_options)
  {
    invsynth::program p;
    for(const auto &v : vars_)
      p.decls.push_back({v, invsynth::int_kind::signed_int, invsynth::decl_scope::function});
    std::vector<stmt> prefix;
    for(const auto &v : vars_)
    {
      if(chance(60))
        prefix.push_back(stmt::assign(v, invsynth::int_const(uniform(0, 4))));
      else
        prefix.push_back(stmt::havoc(v));
    }
    if(chance(50))
      prefix.push_back(stmt::assume(condition()));
    p.prefix = stmt::sequence(std::move(prefix));
    p.loop_guard = chance(10) && body_options.nondet ? invsynth::nondet() : comparison();
    p.loop_body = block(1, body_options, 1, 3);
    p.suffix = stmt::sequence({stmt::assertion(condition())});
    invsynth::derive_obligations(p);
    return p;
  }

  std::mt19937_64 &rng() { return rng_; }

private:
  std::mt19937_64 rng_;
  std::vector<std::string> vars_;
};

} // namespace gen
