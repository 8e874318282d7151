#include <invsynth/eval.hpp>

#include <algorithm>
#include <set>

namespace invsynth {

namespace {

constexpr __int128 limit = static_cast<__int128>(1) << 62;

std::int64_t to_type(std::int64_t v, bool is_unsigned)
{
  auto bits = static_cast<std::uint32_t>(static_cast<std::uint64_t>(v));
  if(is_unsigned)
    return static_cast<std::int64_t>(bits);
  return static_cast<std::int64_t>(static_cast<std::int32_t>(bits));
}

std::optional<std::int64_t> checked(__int128 v)
{
  if(v > limit || v < -limit)
    return std::nullopt;
  return static_cast<std::int64_t>(v);
}

std::pair<__int128, __int128> euclidean(__int128 a, __int128 b)
{
  __int128 r = a % b;
  if(r < 0)
    r += b < 0 ? -b : b;
  return {(a - r) / b, r};
}

class evaluator
{
public:
  evaluator(const valuation &env, const eval_options &opt) : env_(env), opt_(opt) {}

  std::optional<std::int64_t> integer(const expr &e)
  {
    return opt_.semantics == int_semantics::wrap32 ? wrapped(e) : unbounded(e);
  }

  std::optional<bool> boolean(const expr &e)
  {
    switch(e.kind())
    {
    case expr_kind::bool_const:
      return e.value() != 0;
    case expr_kind::nondet:
      return std::nullopt;
    case expr_kind::not_:
    {
      auto a = boolean(e.arg(0));
      if(!a)
        return std::nullopt;
      return !*a;
    }
    case expr_kind::and_:
    {
      auto a = boolean(e.arg(0));
      if(a && !*a)
        return false;
      auto b = boolean(e.arg(1));
      if(b && !*b)
        return false;
      if(!a || !b)
        return std::nullopt;
      return true;
    }
    case expr_kind::or_:
    {
      auto a = boolean(e.arg(0));
      if(a && *a)
        return true;
      auto b = boolean(e.arg(1));
      if(b && *b)
        return true;
      if(!a || !b)
        return std::nullopt;
      return false;
    }
    case expr_kind::implies:
    {
      auto a = boolean(e.arg(0));
      if(a && !*a)
        return true;
      auto b = boolean(e.arg(1));
      if(b && *b)
        return true;
      if(!a || !b)
        return std::nullopt;
      return false;
    }
    case expr_kind::iff:
    {
      auto a = boolean(e.arg(0));
      auto b = boolean(e.arg(1));
      if(!a || !b)
        return std::nullopt;
      return *a == *b;
    }
    case expr_kind::forall:
      return quantified(e);
    default:
      break;
    }
    if(!is_comparison(e.kind()))
      return std::nullopt;

    auto a = integer(e.arg(0));
    auto b = integer(e.arg(1));
    if(!a || !b)
      return std::nullopt;
    std::int64_t x = *a, y = *b;
    if(opt_.semantics == int_semantics::wrap32)
    {
      bool u = is_unsigned_term(e.arg(0), opt_.kinds) || is_unsigned_term(e.arg(1), opt_.kinds);
      x = to_type(x, u);
      y = to_type(y, u);
    }
    switch(e.kind())
    {
    case expr_kind::eq: return x == y;
    case expr_kind::ne: return x != y;
    case expr_kind::lt: return x < y;
    case expr_kind::le: return x <= y;
    case expr_kind::gt: return x > y;
    default: return x >= y;
    }
  }

private:
  std::optional<bool> quantified(const expr &e)
  {
    if(!opt_.quantifier_range)
      return std::nullopt;
    valuation inner = env_;
    bool undetermined = false;
    for(auto v = opt_.quantifier_range->first; v <= opt_.quantifier_range->second; ++v)
    {
      inner[e.name()] = normalize_value(v, kind_of(e.name(), opt_.kinds), opt_.semantics);
      auto r = evaluator(inner, opt_).boolean(e.arg(0));
      if(r && !*r)
        return false;
      undetermined = undetermined || !r;
    }
    if(undetermined)
      return std::nullopt;
    return true;
  }

  std::int64_t lookup(const std::string &name) const
  {
    auto it = env_.find(name);
    std::int64_t v = it == env_.end() ? 0 : it->second;
    return normalize_value(v, kind_of(name, opt_.kinds), opt_.semantics);
  }

  std::optional<std::int64_t> unbounded(const expr &e)
  {
    switch(e.kind())
    {
    case expr_kind::int_const:
      return e.value();
    case expr_kind::var:
      return lookup(e.name());
    case expr_kind::neg:
    {
      auto a = unbounded(e.arg(0));
      if(!a)
        return std::nullopt;
      return checked(-static_cast<__int128>(*a));
    }
    default:
      break;
    }
    auto a = unbounded(e.arg(0));
    auto b = unbounded(e.arg(1));
    if(!a || !b)
      return std::nullopt;
    __int128 x = *a, y = *b;
    switch(e.kind())
    {
    case expr_kind::add: return checked(x + y);
    case expr_kind::sub: return checked(x - y);
    case expr_kind::mul: return checked(x * y);
    case expr_kind::div:
      if(y == 0)
        return std::nullopt;
      return checked(euclidean(x, y).first);
    case expr_kind::mod:
      if(y == 0)
        return std::nullopt;
      return checked(euclidean(x, y).second);
    default:
      return std::nullopt;
    }
  }

  std::optional<std::int64_t> wrapped(const expr &e)
  {
    const bool u = is_unsigned_term(e, opt_.kinds);
    switch(e.kind())
    {
    case expr_kind::int_const:
      return to_type(e.value(), u);
    case expr_kind::var:
      return lookup(e.name());
    case expr_kind::neg:
    {
      auto a = wrapped(e.arg(0));
      if(!a)
        return std::nullopt;
      return to_type(-*a, u);
    }
    default:
      break;
    }
    auto a = wrapped(e.arg(0));
    auto b = wrapped(e.arg(1));
    if(!a || !b)
      return std::nullopt;
    std::int64_t x = to_type(*a, u), y = to_type(*b, u);
    switch(e.kind())
    {
    case expr_kind::add: return to_type(x + y, u);
    case expr_kind::sub: return to_type(x - y, u);
    case expr_kind::mul:
      return to_type(static_cast<std::int64_t>(
                       static_cast<std::uint64_t>(x) * static_cast<std::uint64_t>(y)),
                     u);
    case expr_kind::div:
      if(y == 0)
        return std::nullopt;
      return to_type(x / y, u); // C truncation; INT_MIN / -1 wraps
    case expr_kind::mod:
      if(y == 0)
        return std::nullopt;
      return to_type(x % y, u);
    default:
      return std::nullopt;
    }
  }

  const valuation &env_;
  const eval_options &opt_;
};

} // namespace

std::int64_t normalize_value(std::int64_t v, int_kind kind, int_semantics semantics)
{
  if(semantics == int_semantics::unbounded)
    return v;
  return to_type(v, kind == int_kind::unsigned_int);
}

std::optional<std::int64_t> evaluate_int(const expr &e, const valuation &env, const eval_options &opt)
{
  return evaluator(env, opt).integer(e);
}

std::optional<bool> evaluate_bool(const expr &e, const valuation &env, const eval_options &opt)
{
  return evaluator(env, opt).boolean(e);
}

// --- bounded exhaustive execution --------------------------------------------

namespace {

enum class exit_kind
{
  normal,
  brk,
  cont,
  ret
};

using state_vec = std::vector<std::int64_t>;

struct outcome
{
  exit_kind how;
  state_vec state;

  friend bool operator<(const outcome &a, const outcome &b)
  {
    return std::tie(a.how, a.state) < std::tie(b.how, b.state);
  }
};

class bounded_executor
{
public:
  bounded_executor(const program &p, const bounded_options &opt) : p_(p), opt_(opt)
  {
    for(std::size_t i = 0; i < p.decls.size(); ++i)
      index_[p.decls[i].name] = i;
    eval_.semantics = opt.semantics;
    eval_.kinds = p.kinds();
    eval_.quantifier_range = std::make_pair(opt.low, opt.high);
  }

  exploration_result run()
  {
    std::set<state_vec> entry;
    for(const auto &init : initial_states())
      for(const auto &o : exec(p_.prefix, init))
        if(o.how == exit_kind::normal)
          entry.insert(o.state);

    std::set<state_vec> seen;
    std::set<state_vec> frontier = entry;
    for(int iteration = 0; !frontier.empty(); ++iteration)
    {
      std::set<state_vec> next;
      for(const auto &s : frontier)
      {
        if(!seen.insert(s).second)
          continue;
        record_head(s);
        if(iteration >= opt_.max_iterations || budget_exceeded())
          continue;
        std::vector<bool> branches;
        if(p_.loop_guard.kind() == expr_kind::nondet)
          branches = {true, false};
        else
        {
          auto g = evaluate_bool(p_.loop_guard, to_valuation(s), eval_);
          if(!g)
          {
            ++result_.undefined_paths;
            continue;
          }
          branches = {*g};
        }
        for(bool enter : branches)
        {
          if(!enter)
          {
            exec(p_.suffix, s);
            continue;
          }
          for(const auto &o : exec(p_.loop_body, s))
          {
            if(o.how == exit_kind::normal || o.how == exit_kind::cont)
              next.insert(o.state);
            else if(o.how == exit_kind::brk)
              exec(p_.suffix, o.state);
          }
        }
      }
      frontier = std::move(next);
    }
    result_.truncated = result_.truncated || budget_exceeded();
    return std::move(result_);
  }

private:
  bool budget_exceeded() const { return steps_ > opt_.max_states; }

  valuation to_valuation(const state_vec &s) const
  {
    valuation v;
    for(std::size_t i = 0; i < s.size(); ++i)
      v[p_.decls[i].name] = s[i];
    return v;
  }

  void record_head(const state_vec &s)
  {
    valuation v;
    for(std::size_t i = 0; i < s.size(); ++i)
      if(p_.decls[i].scope == decl_scope::function)
        v[p_.decls[i].name] = s[i];
    result_.loop_head_states.push_back(std::move(v));
  }

  std::vector<std::int64_t> domain(std::size_t var) const
  {
    std::vector<std::int64_t> out;
    bool is_unsigned = p_.decls[var].kind == int_kind::unsigned_int;
    for(auto v = opt_.low; v <= opt_.high; ++v)
    {
      if(is_unsigned && opt_.semantics == int_semantics::unbounded && v < 0)
        continue;
      out.push_back(normalize_value(v, p_.decls[var].kind, opt_.semantics));
    }
    return out;
  }

  /// Variables whose initial value can be observed: read in the prefix before
  /// a top-level write, or never written by the prefix at all.
  std::vector<std::size_t> observable_initial_vars() const
  {
    std::set<std::string> written;
    std::set<std::string> observed;
    for(const auto &item : p_.prefix.children)
    {
      for(const auto &v : reads(item))
        if(written.count(v) == 0)
          observed.insert(v);
      if(item.kind == stmt_kind::assign || item.kind == stmt_kind::havoc)
        written.insert(item.target);
    }
    std::vector<std::size_t> out;
    for(std::size_t i = 0; i < p_.decls.size(); ++i)
    {
      const auto &d = p_.decls[i];
      if(d.scope != decl_scope::function)
        continue;
      if(observed.count(d.name) != 0 || written.count(d.name) == 0)
        out.push_back(i);
    }
    return out;
  }

  static std::set<std::string> reads(const stmt &s)
  {
    std::set<std::string> out;
    if(s.kind == stmt_kind::assign || s.kind == stmt_kind::assume ||
       s.kind == stmt_kind::assert_ || s.kind == stmt_kind::if_else)
      out = free_vars(s.value);
    for(const auto &c : s.children)
    {
      auto inner = reads(c);
      out.insert(inner.begin(), inner.end());
    }
    return out;
  }

  std::vector<state_vec> initial_states() const
  {
    std::vector<state_vec> states{state_vec(p_.decls.size(), 0)};
    for(std::size_t var : observable_initial_vars())
    {
      std::vector<state_vec> grown;
      for(const auto &s : states)
        for(auto v : domain(var))
        {
          state_vec t = s;
          t[var] = v;
          grown.push_back(std::move(t));
        }
      states = std::move(grown);
    }
    return states;
  }

  std::vector<outcome> exec(const stmt &st, const state_vec &s)
  {
    ++steps_;
    if(budget_exceeded())
      return {};
    switch(st.kind)
    {
    case stmt_kind::skip:
      return {{exit_kind::normal, s}};
    case stmt_kind::assign:
    {
      auto v = evaluate_int(st.value, to_valuation(s), eval_);
      if(!v)
      {
        ++result_.undefined_paths;
        return {};
      }
      std::size_t i = index_.at(st.target);
      state_vec t = s;
      t[i] = normalize_value(*v, p_.decls[i].kind, opt_.semantics);
      return {{exit_kind::normal, std::move(t)}};
    }
    case stmt_kind::havoc:
    {
      std::size_t i = index_.at(st.target);
      std::vector<outcome> out;
      for(auto v : domain(i))
      {
        state_vec t = s;
        t[i] = v;
        out.push_back({exit_kind::normal, std::move(t)});
      }
      return out;
    }
    case stmt_kind::assume:
    case stmt_kind::assert_:
    {
      auto c = evaluate_bool(st.value, to_valuation(s), eval_);
      if(!c)
      {
        ++result_.undefined_paths;
        return {};
      }
      if(*c)
        return {{exit_kind::normal, s}};
      if(st.kind == stmt_kind::assert_)
        result_.violations.push_back({st.location, to_valuation(s)});
      return {};
    }
    case stmt_kind::seq:
    {
      std::set<outcome> done;
      std::set<state_vec> current{s};
      for(const auto &child : st.children)
      {
        std::set<state_vec> next;
        for(const auto &c : current)
          for(auto &o : exec(child, c))
          {
            if(o.how == exit_kind::normal)
              next.insert(std::move(o.state));
            else
              done.insert(std::move(o));
          }
        current = std::move(next);
      }
      std::vector<outcome> out(done.begin(), done.end());
      for(const auto &c : current)
        out.push_back({exit_kind::normal, c});
      return out;
    }
    case stmt_kind::if_else:
    {
      std::vector<std::size_t> taken;
      if(st.value.kind() == expr_kind::nondet)
        taken = {0, 1};
      else
      {
        auto c = evaluate_bool(st.value, to_valuation(s), eval_);
        if(!c)
        {
          ++result_.undefined_paths;
          return {};
        }
        taken = {*c ? std::size_t{0} : std::size_t{1}};
      }
      std::vector<outcome> out;
      for(auto b : taken)
      {
        auto part = exec(st.children[b], s);
        out.insert(out.end(), part.begin(), part.end());
      }
      return out;
    }
    case stmt_kind::return_:
      return {{exit_kind::ret, s}};
    case stmt_kind::break_:
      return {{exit_kind::brk, s}};
    case stmt_kind::continue_:
      return {{exit_kind::cont, s}};
    }
    return {};
  }

  const program &p_;
  const bounded_options &opt_;
  std::map<std::string, std::size_t> index_;
  eval_options eval_;
  exploration_result result_;
  std::size_t steps_ = 0;
};

} // namespace

exploration_result explore_bounded(const program &p, const bounded_options &opt)
{
  return bounded_executor(p, opt).run();
}

} // namespace invsynth
