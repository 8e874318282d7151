#include <invsynth/vcgen.hpp>

#include <invsynth/errors.hpp>

#include <map>

namespace invsynth {

const char *to_string(vc_kind k)
{
  switch(k)
  {
  case vc_kind::establishment: return "establishment";
  case vc_kind::preservation: return "preservation";
  case vc_kind::sufficiency: return "sufficiency";
  case vc_kind::body_assertion: return "body-assertion";
  case vc_kind::entry_assertion: return "entry-assertion";
  case vc_kind::division_guard: return "division-guard";
  }
  return "?";
}

namespace {

expr guarded(const std::vector<expr> &guards, const expr &q, assert_mode mode)
{
  if(guards.empty())
    return q;
  return mode == assert_mode::check ? conjunction(guards) && q : implies(conjunction(guards), q);
}

std::vector<expr> divisor_guards(const expr &e)
{
  std::vector<expr> out;
  for(const auto &d : variable_divisors(e))
    out.push_back(binary(expr_kind::ne, d, int_const(0)));
  return out;
}

class wp_calculator
{
public:
  wp_calculator(const stmt &root, const wp_options &opt) : opt_(opt) { number(root); }

  expr run(const stmt &s, const continuations &k)
  {
    switch(s.kind)
    {
    case stmt_kind::skip:
      return k.normal;
    case stmt_kind::assign:
      return guarded(
        divisor_guards(s.value), substitute(k.normal, {{s.target, s.value}}), opt_.divisors);
    case stmt_kind::havoc:
    {
      std::string fresh = s.target + "!h" + std::to_string(++counter_);
      expr body = substitute(k.normal, {{s.target, var(fresh)}});
      if(kind_of(s.target, opt_.kinds) == int_kind::unsigned_int)
        body = implies(binary(expr_kind::ge, var(fresh), int_const(0)), body);
      return forall(fresh, body);
    }
    case stmt_kind::assume:
      return guarded(divisor_guards(s.value), implies(s.value, k.normal), opt_.divisors);
    case stmt_kind::assert_:
    {
      expr q = checked(s) ? s.value && k.normal : implies(s.value, k.normal);
      return guarded(divisor_guards(s.value), q, opt_.divisors);
    }
    case stmt_kind::seq:
    {
      continuations inner = k;
      for(auto it = s.children.rbegin(); it != s.children.rend(); ++it)
        inner.normal = run(*it, inner);
      return inner.normal;
    }
    case stmt_kind::if_else:
    {
      expr then_wp = run(s.children[0], k);
      expr else_wp = run(s.children[1], k);
      if(s.value.kind() == expr_kind::nondet)
        return then_wp && else_wp;
      return guarded(
        divisor_guards(s.value),
        implies(s.value, then_wp) && implies(!s.value, else_wp),
        opt_.divisors);
    }
    case stmt_kind::return_:
      return k.ret;
    case stmt_kind::break_:
      return k.brk;
    case stmt_kind::continue_:
      return k.cont;
    }
    return k.normal;
  }

private:
  void number(const stmt &s)
  {
    if(s.kind == stmt_kind::assert_)
      index_[&s] = index_.size();
    for(const auto &c : s.children)
      number(c);
  }

  bool checked(const stmt &s) const
  {
    if(opt_.only_assert)
      return index_.at(&s) == *opt_.only_assert;
    return opt_.asserts == assert_mode::check;
  }

  const wp_options &opt_;
  std::map<const stmt *, std::size_t> index_;
  int counter_ = 0;
};

bool has_break(const stmt &s)
{
  if(s.kind == stmt_kind::break_)
    return true;
  for(const auto &c : s.children)
    if(has_break(c))
      return true;
  return false;
}

bool has_variable_divisor(const stmt &s)
{
  if(!variable_divisors(s.value).empty())
    return true;
  for(const auto &c : s.children)
    if(has_variable_divisor(c))
      return true;
  return false;
}

const expr &parsed_or_throw(const candidate &c)
{
  if(!c.parsed)
    throw missing_expr("candidate " + std::to_string(c.id) + " has no expression: " + c.source);
  return *c.parsed;
}

struct hypothesis
{
  std::vector<expr> parts;
  std::vector<std::size_t> ids;
};

hypothesis candidate_hypothesis(const candidate_set &cs)
{
  hypothesis h;
  for(const auto &c : cs)
  {
    if(!c.parsed)
      continue;
    h.parts.push_back(*c.parsed);
    h.ids.push_back(c.id);
  }
  return h;
}

bool guard_is_nondet(const program &p)
{
  return p.loop_guard.kind() == expr_kind::nondet;
}

/// Hypothesis /\ (B or !B). A nondeterministic guard adds nothing.
expr with_guard(const program &p, std::vector<expr> parts, bool entering)
{
  if(!guard_is_nondet(p))
    parts.push_back(entering ? p.loop_guard : !p.loop_guard);
  return conjunction(parts);
}

expr implication(const expr &hyp, const expr &goal)
{
  if(hyp.is_true())
    return goal;
  return implies(hyp, goal);
}

} // namespace

expr wp(const stmt &s, const expr &post, const wp_options &opt)
{
  continuations k;
  k.normal = post;
  k.cont = post;
  return wp(s, k, opt);
}

expr wp(const stmt &s, const continuations &k, const wp_options &opt)
{
  return wp_calculator(s, opt).run(s, k);
}

verification_condition establishment_vc(const program &p, const candidate &c)
{
  verification_condition vc;
  vc.kind = vc_kind::establishment;
  vc.target = c.id;
  vc.formula = implication(conjunction(p.pre), parsed_or_throw(c));
  vc.kinds = p.kinds();
  return vc;
}

verification_condition preservation_vc(
  const program &p, const candidate_set &all, const candidate &target)
{
  const expr &goal = parsed_or_throw(target);
  hypothesis h = candidate_hypothesis(all);

  wp_options opt;
  opt.asserts = assert_mode::assume;
  opt.kinds = p.kinds();
  continuations k;
  k.normal = goal;
  k.cont = goal;

  // divisors in B are assumed nonzero here and checked by the division guard VC
  std::vector<expr> hyp = divisor_guards(p.loop_guard);
  hyp.insert(hyp.end(), h.parts.begin(), h.parts.end());

  verification_condition vc;
  vc.kind = vc_kind::preservation;
  vc.target = target.id;
  vc.formula = implication(with_guard(p, hyp, true), wp(p.loop_body, k, opt));
  vc.provenance = std::move(h.ids);
  vc.kinds = opt.kinds;
  return vc;
}

std::vector<verification_condition> sufficiency_vc(const program &p, const candidate_set &candidates)
{
  std::vector<verification_condition> out;
  hypothesis h = candidate_hypothesis(candidates);
  const kind_map kinds = p.kinds();
  const expr invariant = conjunction(h.parts);
  const bool breaks = has_break(p.loop_body);
  const std::vector<expr> guard_guards = divisor_guards(p.loop_guard);
  std::vector<expr> guarded_hyp = guard_guards;
  guarded_hyp.insert(guarded_hyp.end(), h.parts.begin(), h.parts.end());

  auto make = [&](vc_kind kind, std::size_t target, source_location at, expr formula) {
    verification_condition vc;
    vc.kind = kind;
    vc.target = target;
    vc.location = at;
    vc.formula = std::move(formula);
    vc.provenance = h.ids;
    vc.kinds = kinds;
    out.push_back(std::move(vc));
  };

  for(std::size_t i = 0; i < p.post.size(); ++i)
  {
    const expr &q = p.post[i].formula;
    expr formula;
    if(!breaks)
      formula = implication(with_guard(p, guarded_hyp, false), q);
    else
    {
      wp_options opt;
      opt.asserts = assert_mode::assume;
      opt.kinds = kinds;
      continuations k;
      k.normal = bool_const(true);
      k.cont = bool_const(true);
      k.brk = q;
      expr exit_normally = guard_is_nondet(p) ? q : implies(!p.loop_guard, q);
      expr exit_by_break = guard_is_nondet(p) ? wp(p.loop_body, k, opt)
                                              : implies(p.loop_guard, wp(p.loop_body, k, opt));
      formula = implication(conjunction(guarded_hyp), exit_normally && exit_by_break);
    }
    make(vc_kind::sufficiency, i, p.post[i].location, std::move(formula));
  }

  for(std::size_t i = 0; i < p.body_asserts.size(); ++i)
  {
    wp_options opt;
    opt.only_assert = i;
    opt.kinds = kinds;
    expr goal = wp(p.loop_body, bool_const(true), opt);
    make(
      vc_kind::body_assertion,
      i,
      p.body_asserts[i].location,
      implication(with_guard(p, guarded_hyp, true), goal));
  }

  if(!guard_guards.empty() || has_variable_divisor(p.loop_body))
  {
    wp_options opt;
    opt.asserts = assert_mode::assume;
    opt.divisors = assert_mode::check;
    opt.kinds = kinds;
    expr body = wp(p.loop_body, bool_const(true), opt);
    expr goal = guarded(
      guard_guards, guard_is_nondet(p) ? body : implies(p.loop_guard, body), assert_mode::check);
    make(vc_kind::division_guard, 0, {}, implication(invariant, goal));
  }
  return out;
}

std::vector<verification_condition> entry_vcs(const program &p)
{
  std::vector<verification_condition> out;
  const kind_map kinds = p.kinds();
  for(std::size_t i = 0; i < p.entry_asserts.size(); ++i)
  {
    verification_condition vc;
    vc.kind = vc_kind::entry_assertion;
    vc.target = i;
    vc.location = p.entry_asserts[i].location;
    vc.formula = p.entry_asserts[i].formula;
    vc.kinds = kinds;
    out.push_back(std::move(vc));
  }
  return out;
}

} // namespace invsynth
