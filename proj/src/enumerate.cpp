#include <invsynth/proposer.hpp>

#include <algorithm>
#include <random>
#include <set>

namespace invsynth {

namespace {

void harvest_literals(const expr &e, std::set<std::int64_t> &out)
{
  if(e.kind() == expr_kind::int_const)
    out.insert(e.value());
  for(const auto &a : e.args())
    harvest_literals(a, out);
}

void harvest_literals(const stmt &s, std::set<std::int64_t> &out)
{
  harvest_literals(s.value, out);
  for(const auto &c : s.children)
    harvest_literals(c, out);
}

void comparison_atoms(const expr &e, std::vector<expr> &out)
{
  if(is_comparison(e.kind()))
  {
    out.push_back(e);
    return;
  }
  if(e.kind() == expr_kind::forall)
    return;
  for(const auto &a : e.args())
    if(a.is_boolean())
      comparison_atoms(a, out);
}

std::size_t size_of(const expr &e)
{
  std::size_t n = 1;
  for(const auto &a : e.args())
    n += size_of(a);
  return n;
}

bool over(const expr &e, const std::set<std::string> &vars)
{
  auto fv = free_vars(e);
  if(fv.empty())
    return false;
  return std::all_of(fv.begin(), fv.end(), [&](const std::string &v) { return vars.count(v) != 0; });
}

constexpr expr_kind relations[] = {
  expr_kind::eq, expr_kind::le, expr_kind::ge, expr_kind::lt, expr_kind::gt};

class grammar
{
public:
  void add(const expr &e)
  {
    std::string k = to_string(e);
    if(seen_.insert(k).second)
      items_.push_back(e);
  }

  std::vector<expr> items_;

private:
  std::set<std::string> seen_;
};

} // namespace

candidate_set enumerate_candidates(const program &p, std::uint64_t seed, std::size_t budget)
{
  candidate_set out;
  const std::vector<std::string> vars = p.loop_head_vars();
  if(vars.empty() || budget == 0)
    return out;
  const std::set<std::string> var_set(vars.begin(), vars.end());

  std::set<std::int64_t> literals{0};
  harvest_literals(p.prefix, literals);
  harvest_literals(p.loop_guard, literals);
  harvest_literals(p.loop_body, literals);
  harvest_literals(p.suffix, literals);
  std::set<std::int64_t> constants;
  for(auto l : literals)
    for(std::int64_t d : {-1, 0, 1})
      constants.insert(l + d);

  grammar g;
  // variable against constant, variable against variable
  for(const auto &v : vars)
    for(auto c : constants)
      for(auto r : relations)
        g.add(binary(r, var(v), int_const(c)));
  for(std::size_t i = 0; i < vars.size(); ++i)
    for(std::size_t j = i + 1; j < vars.size(); ++j)
      for(auto r : relations)
        g.add(binary(r, var(vars[i]), var(vars[j])));

  // guard and assertion atoms, and implications between them
  std::vector<expr> guard_atoms, post_atoms;
  if(p.loop_guard.kind() != expr_kind::nondet)
    comparison_atoms(p.loop_guard, guard_atoms);
  for(const auto &a : p.post)
    comparison_atoms(a.formula, post_atoms);
  for(const auto &a : p.body_asserts)
    comparison_atoms(a.formula, post_atoms);
  std::erase_if(guard_atoms, [&](const expr &e) { return !over(e, var_set); });
  std::erase_if(post_atoms, [&](const expr &e) { return !over(e, var_set); });
  for(const auto &a : guard_atoms)
    g.add(a);
  for(const auto &a : post_atoms)
    g.add(a);
  for(const auto &gd : guard_atoms)
    for(const auto &q : post_atoms)
    {
      g.add(implies(!gd, q));
      g.add(implies(gd, q));
    }

  // sums and differences of two variables
  for(std::size_t i = 0; i < vars.size(); ++i)
    for(std::size_t j = i + 1; j < vars.size(); ++j)
    {
      expr sum = var(vars[i]) + var(vars[j]);
      expr diff = var(vars[i]) - var(vars[j]);
      for(std::size_t k = 0; k < vars.size(); ++k)
        if(k != i && k != j)
          for(auto r : relations)
            g.add(binary(r, sum, var(vars[k])));
      for(auto c : constants)
        for(auto r : relations)
        {
          g.add(binary(r, sum, int_const(c)));
          g.add(binary(r, diff, int_const(c)));
        }
    }

  // smallest first; the seed only permutes within a size class
  std::vector<expr> items = std::move(g.items_);
  std::stable_sort(items.begin(), items.end(), [](const expr &a, const expr &b) {
    return size_of(a) < size_of(b);
  });
  std::mt19937_64 rng(seed);
  for(std::size_t from = 0; from < items.size();)
  {
    std::size_t to = from;
    while(to < items.size() && size_of(items[to]) == size_of(items[from]))
      ++to;
    // Fisher-Yates on raw engine output, independent of the standard
    // library's distribution implementations
    for(std::size_t i = to - from; i > 1; --i)
      std::swap(items[from + i - 1], items[from + rng() % i]);
    from = to;
  }

  for(std::size_t i = 0; i < items.size() && out.size() < budget; ++i)
  {
    candidate c;
    c.source = to_string(items[i]);
    c.parsed = items[i];
    c.id = out.size();
    out.insert(std::move(c));
  }
  return out;
}

} // namespace invsynth
