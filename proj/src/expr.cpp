#include <invsynth/expr.hpp>

#include <cassert>
#include <functional>

namespace invsynth {

bool is_boolean(expr_kind k)
{
  switch(k)
  {
  case expr_kind::int_const:
  case expr_kind::var:
  case expr_kind::neg:
  case expr_kind::add:
  case expr_kind::sub:
  case expr_kind::mul:
  case expr_kind::div:
  case expr_kind::mod:
    return false;
  default:
    return true;
  }
}

bool is_comparison(expr_kind k)
{
  switch(k)
  {
  case expr_kind::eq:
  case expr_kind::ne:
  case expr_kind::lt:
  case expr_kind::le:
  case expr_kind::gt:
  case expr_kind::ge:
    return true;
  default:
    return false;
  }
}

const char *op_symbol(expr_kind k)
{
  switch(k)
  {
  case expr_kind::neg: return "-";
  case expr_kind::add: return "+";
  case expr_kind::sub: return "-";
  case expr_kind::mul: return "*";
  case expr_kind::div: return "/";
  case expr_kind::mod: return "%";
  case expr_kind::eq: return "==";
  case expr_kind::ne: return "!=";
  case expr_kind::lt: return "<";
  case expr_kind::le: return "<=";
  case expr_kind::gt: return ">";
  case expr_kind::ge: return ">=";
  case expr_kind::not_: return "!";
  case expr_kind::and_: return "&&";
  case expr_kind::or_: return "||";
  case expr_kind::implies: return "==>";
  case expr_kind::iff: return "<==>";
  default: return "?";
  }
}

expr::expr() : expr(make(expr_kind::bool_const, {}, 1)) {}

expr expr::make(
  expr_kind kind,
  std::vector<expr> args,
  std::int64_t value,
  std::string name)
{
  return expr(std::make_shared<const node>(
    node{kind, value, std::move(name), std::move(args)}));
}

bool operator==(const expr &a, const expr &b)
{
  if(a.node_ == b.node_)
    return true;
  if(
    a.kind() != b.kind() || a.value() != b.value() || a.name() != b.name() ||
    a.args().size() != b.args().size())
    return false;
  for(std::size_t i = 0; i < a.args().size(); ++i)
    if(a.args()[i] != b.args()[i])
      return false;
  return true;
}

expr int_const(std::int64_t v) { return expr::make(expr_kind::int_const, {}, v); }
expr var(std::string name) { return expr::make(expr_kind::var, {}, 0, std::move(name)); }
expr bool_const(bool b) { return expr::make(expr_kind::bool_const, {}, b ? 1 : 0); }
expr nondet() { return expr::make(expr_kind::nondet, {}); }

expr unary(expr_kind k, expr a)
{
  assert(k == expr_kind::neg || k == expr_kind::not_);
  return expr::make(k, {std::move(a)});
}

expr binary(expr_kind k, expr a, expr b)
{
  return expr::make(k, {std::move(a), std::move(b)});
}

expr forall(std::string bound, expr body)
{
  return expr::make(expr_kind::forall, {std::move(body)}, 0, std::move(bound));
}

expr operator+(expr a, expr b) { return binary(expr_kind::add, std::move(a), std::move(b)); }
expr operator-(expr a, expr b) { return binary(expr_kind::sub, std::move(a), std::move(b)); }
expr operator*(expr a, expr b) { return binary(expr_kind::mul, std::move(a), std::move(b)); }
expr operator!(expr a) { return unary(expr_kind::not_, std::move(a)); }
expr operator&&(expr a, expr b) { return binary(expr_kind::and_, std::move(a), std::move(b)); }
expr operator||(expr a, expr b) { return binary(expr_kind::or_, std::move(a), std::move(b)); }
expr implies(expr a, expr b) { return binary(expr_kind::implies, std::move(a), std::move(b)); }

expr conjunction(const std::vector<expr> &parts)
{
  if(parts.empty())
    return bool_const(true);
  expr result = parts.front();
  for(std::size_t i = 1; i < parts.size(); ++i)
    result = result && parts[i];
  return result;
}

expr disjunction(const std::vector<expr> &parts)
{
  if(parts.empty())
    return bool_const(false);
  expr result = parts.front();
  for(std::size_t i = 1; i < parts.size(); ++i)
    result = result || parts[i];
  return result;
}

std::vector<expr> conjuncts(const expr &e)
{
  if(e.kind() != expr_kind::and_)
    return {e};
  auto left = conjuncts(e.arg(0));
  auto right = conjuncts(e.arg(1));
  left.insert(left.end(), right.begin(), right.end());
  return left;
}

expr substitute(const expr &e, const substitution &s)
{
  switch(e.kind())
  {
  case expr_kind::var:
  {
    auto it = s.find(e.name());
    return it == s.end() ? e : it->second;
  }
  case expr_kind::int_const:
  case expr_kind::bool_const:
  case expr_kind::nondet:
    return e;
  case expr_kind::forall:
  {
    if(s.count(e.name()) != 0)
    {
      substitution inner = s;
      inner.erase(e.name());
      return forall(e.name(), substitute(e.arg(0), inner));
    }
    return forall(e.name(), substitute(e.arg(0), s));
  }
  default:
  {
    std::vector<expr> args;
    args.reserve(e.args().size());
    bool changed = false;
    for(const auto &a : e.args())
    {
      args.push_back(substitute(a, s));
      changed = changed || args.back() != a;
    }
    if(!changed)
      return e;
    return expr::make(e.kind(), std::move(args), e.value(), e.name());
  }
  }
}

static void collect_free(
  const expr &e,
  std::set<std::string> &bound,
  std::set<std::string> &out)
{
  if(e.kind() == expr_kind::var)
  {
    if(bound.count(e.name()) == 0)
      out.insert(e.name());
    return;
  }
  if(e.kind() == expr_kind::forall)
  {
    bool fresh = bound.insert(e.name()).second;
    collect_free(e.arg(0), bound, out);
    if(fresh)
      bound.erase(e.name());
    return;
  }
  for(const auto &a : e.args())
    collect_free(a, bound, out);
}

std::set<std::string> free_vars(const expr &e)
{
  std::set<std::string> bound, out;
  collect_free(e, bound, out);
  return out;
}

bool contains_kind(const expr &e, expr_kind k)
{
  if(e.kind() == k)
    return true;
  for(const auto &a : e.args())
    if(contains_kind(a, k))
      return true;
  return false;
}

std::vector<expr> variable_divisors(const expr &e)
{
  std::vector<expr> out;
  std::function<void(const expr &)> walk = [&](const expr &x) {
    if(
      (x.kind() == expr_kind::div || x.kind() == expr_kind::mod) &&
      x.arg(1).kind() != expr_kind::int_const)
    {
      bool seen = false;
      for(const auto &d : out)
        seen = seen || d == x.arg(1);
      if(!seen)
        out.push_back(x.arg(1));
    }
    for(const auto &a : x.args())
      walk(a);
  };
  walk(e);
  return out;
}

namespace {

int precedence(const expr &e)
{
  switch(e.kind())
  {
  case expr_kind::forall:
    return 0;
  case expr_kind::implies:
  case expr_kind::iff:
    return 1;
  case expr_kind::or_:
    return 2;
  case expr_kind::and_:
    return 3;
  case expr_kind::eq:
  case expr_kind::ne:
  case expr_kind::lt:
  case expr_kind::le:
  case expr_kind::gt:
  case expr_kind::ge:
    return 4;
  case expr_kind::add:
  case expr_kind::sub:
    return 5;
  case expr_kind::mul:
  case expr_kind::div:
  case expr_kind::mod:
    return 6;
  case expr_kind::neg:
  case expr_kind::not_:
    return 7;
  default:
    return 8;
  }
}

void print(const expr &e, std::string &out);

void print_operand(const expr &e, bool parens, std::string &out)
{
  if(parens)
    out += '(';
  print(e, out);
  if(parens)
    out += ')';
}

void print(const expr &e, std::string &out)
{
  const int p = precedence(e);
  switch(e.kind())
  {
  case expr_kind::int_const:
    out += std::to_string(e.value());
    return;
  case expr_kind::var:
    out += e.name();
    return;
  case expr_kind::bool_const:
    out += e.value() ? "\\true" : "\\false";
    return;
  case expr_kind::nondet:
    out += "unknown_int()";
    return;
  case expr_kind::neg:
  case expr_kind::not_:
  {
    const expr &a = e.arg(0);
    bool parens = precedence(a) < p || a.kind() == expr_kind::neg ||
                  (a.kind() == expr_kind::int_const &&
                   (e.kind() == expr_kind::neg || a.value() < 0));
    out += op_symbol(e.kind());
    print_operand(a, parens, out);
    return;
  }
  case expr_kind::forall:
    out += "\\forall integer ";
    out += e.name();
    out += "; ";
    print(e.arg(0), out);
    return;
  default:
    break;
  }

  const expr &l = e.arg(0);
  const expr &r = e.arg(1);
  bool left_parens, right_parens;
  if(e.kind() == expr_kind::implies)
  {
    left_parens = precedence(l) <= p;
    right_parens = precedence(r) < p;
  }
  else if(e.kind() == expr_kind::iff || is_comparison(e.kind()))
  {
    left_parens = precedence(l) <= p;
    right_parens = precedence(r) <= p;
  }
  else
  {
    left_parens = precedence(l) < p;
    right_parens = precedence(r) <= p;
  }
  // a forall as operand always needs parens: its body extends to the right
  left_parens = left_parens || l.kind() == expr_kind::forall;
  right_parens = right_parens || r.kind() == expr_kind::forall;

  print_operand(l, left_parens, out);
  out += ' ';
  out += op_symbol(e.kind());
  out += ' ';
  print_operand(r, right_parens, out);
}

} // namespace

std::string to_string(const expr &e)
{
  std::string out;
  print(e, out);
  return out;
}

std::string base_name(const std::string &name)
{
  auto bang = name.find('!');
  return bang == std::string::npos ? name : name.substr(0, bang);
}

int_kind kind_of(const std::string &name, const kind_map &kinds)
{
  auto it = kinds.find(base_name(name));
  return it == kinds.end() ? int_kind::signed_int : it->second;
}

bool is_unsigned_term(const expr &e, const kind_map &kinds)
{
  if(e.kind() == expr_kind::var)
    return kind_of(e.name(), kinds) == int_kind::unsigned_int;
  for(const auto &a : e.args())
    if(!a.is_boolean() && is_unsigned_term(a, kinds))
      return true;
  return false;
}

} // namespace invsynth
