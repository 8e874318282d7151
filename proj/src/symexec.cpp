// Symbolic execution of the loop-free code before and after the loop. The
// prefix yields the loop-entry facts, the suffix yields the postconditions.
// Versions of a variable are named `v!k`; those names cannot clash with C
// identifiers.

#include <invsynth/parser.hpp>

#include <functional>

namespace invsynth {

namespace {

struct sym_state
{
  std::map<std::string, expr> values;
  std::vector<expr> facts;
  bool dead = false;
};

class symbolic_executor
{
public:
  explicit symbolic_executor(const kind_map &kinds) : kinds_(kinds) {}

  std::vector<assertion> obligations;

  std::string fresh(const std::string &v)
  {
    return v + "!" + std::to_string(++counter_);
  }

  expr apply(const sym_state &s, const expr &e) const
  {
    return substitute(e, s.values);
  }

  void add_division_guards(sym_state &s, const expr &e)
  {
    for(const auto &d : variable_divisors(e))
    {
      expr guard = binary(expr_kind::ne, apply(s, d), int_const(0));
      obligations.push_back({implies_facts(s, guard), {}});
      s.facts.push_back(guard);
    }
  }

  static expr implies_facts(const sym_state &s, const expr &goal)
  {
    if(s.facts.empty())
      return goal;
    return implies(conjunction(s.facts), goal);
  }

  void exec(const stmt &st, sym_state &s)
  {
    if(s.dead)
      return;
    switch(st.kind)
    {
    case stmt_kind::skip:
      return;
    case stmt_kind::assign:
      add_division_guards(s, st.value);
      s.values[st.target] = apply(s, st.value);
      return;
    case stmt_kind::havoc:
    {
      std::string name = fresh(st.target);
      s.values[st.target] = var(name);
      if(kind_of(st.target, kinds_) == int_kind::unsigned_int)
        s.facts.push_back(binary(expr_kind::ge, var(name), int_const(0)));
      return;
    }
    case stmt_kind::assume:
      add_division_guards(s, st.value);
      s.facts.push_back(apply(s, st.value));
      return;
    case stmt_kind::assert_:
    {
      add_division_guards(s, st.value);
      expr goal = apply(s, st.value);
      obligations.push_back({implies_facts(s, goal), st.location});
      s.facts.push_back(goal);
      return;
    }
    case stmt_kind::seq:
      for(const auto &c : st.children)
        exec(c, s);
      return;
    case stmt_kind::if_else:
      branch(st, s);
      return;
    case stmt_kind::return_:
      s.dead = true;
      return;
    case stmt_kind::break_:
    case stmt_kind::continue_:
      // the parser only allows these inside the loop body
      s.dead = true;
      return;
    }
  }

private:
  void branch(const stmt &st, sym_state &s)
  {
    expr cond;
    if(st.value.kind() == expr_kind::nondet)
      cond = binary(expr_kind::ne, var(fresh("nondet")), int_const(0));
    else
    {
      add_division_guards(s, st.value);
      cond = apply(s, st.value);
    }
    const std::size_t base = s.facts.size();

    sym_state t = s;
    t.facts.push_back(cond);
    exec(st.children[0], t);

    sym_state e = s;
    e.facts.push_back(!cond);
    exec(st.children[1], e);

    if(t.dead && e.dead)
    {
      s.dead = true;
      return;
    }
    if(t.dead)
    {
      s = std::move(e);
      return;
    }
    if(e.dead)
    {
      s = std::move(t);
      return;
    }

    std::vector<expr> then_part(t.facts.begin() + base, t.facts.end());
    std::vector<expr> else_part(e.facts.begin() + base, e.facts.end());
    std::map<std::string, expr> joined = s.values;
    for(const auto &[v, tv] : t.values)
    {
      const expr &ev = e.values.at(v);
      if(tv == ev)
      {
        joined[v] = tv;
        continue;
      }
      expr phi = var(fresh(v));
      then_part.push_back(binary(expr_kind::eq, phi, tv));
      else_part.push_back(binary(expr_kind::eq, phi, ev));
      joined[v] = phi;
    }
    s.values = std::move(joined);
    s.facts.resize(base);
    s.facts.push_back(conjunction(then_part) || conjunction(else_part));
  }

  const kind_map &kinds_;
  int counter_ = 0;
};

void collect_body_asserts(const stmt &st, std::vector<assertion> &out)
{
  if(st.kind == stmt_kind::assert_)
    out.push_back({st.value, st.location});
  for(const auto &c : st.children)
    collect_body_asserts(c, out);
}

} // namespace

void derive_obligations(program &p)
{
  const kind_map kinds = p.kinds();
  symbolic_executor exec(kinds);

  // prefix: start from unconstrained initial values
  sym_state entry;
  for(const auto &d : p.decls)
    entry.values[d.name] = var(d.name + "!0");
  exec.exec(p.prefix, entry);

  // name each loop-head variable after the version it holds, when that
  // version is a bare symbol not already claimed by an earlier variable
  substitution rename;
  std::set<std::string> claimed;
  for(const auto &v : p.loop_head_vars())
  {
    const expr &val = entry.values.at(v);
    if(val.kind() == expr_kind::var && claimed.insert(val.name()).second)
      rename[val.name()] = var(v);
  }

  p.pre.clear();
  if(entry.dead)
    p.pre.push_back(bool_const(false)); // the loop is unreachable
  for(const auto &f : entry.facts)
    p.pre.push_back(substitute(f, rename));
  for(const auto &v : p.loop_head_vars())
  {
    expr val = substitute(entry.values.at(v), rename);
    if(val != var(v))
      p.pre.push_back(binary(expr_kind::eq, var(v), val));
  }
  p.entry_asserts.clear();
  for(auto &o : exec.obligations)
    p.entry_asserts.push_back({substitute(o.formula, rename), o.location});

  // suffix: start from the loop-exit state
  symbolic_executor exit_exec(kinds);
  sym_state exit;
  for(const auto &d : p.decls)
    exit.values[d.name] = d.scope == decl_scope::function ? var(d.name) : var(d.name + "!0");
  exit_exec.exec(p.suffix, exit);
  p.post = std::move(exit_exec.obligations);

  p.body_asserts.clear();
  collect_body_asserts(p.loop_body, p.body_asserts);
}

} // namespace invsynth
