// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs against the real solver and the built command-line tool.

#include "corpus_gen.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <invsynth/eval.hpp>
#include <invsynth/harness.hpp>
#include <invsynth/houdini.hpp>
#include <invsynth/repair.hpp>
#include <invsynth/vcgen.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace invsynth;
namespace fs = std::filesystem;

namespace {

struct verified_set
{
  std::string origin;
  program prog;
  candidate_set invariants;
};

// every success verdict seen by the suite, for the soundness cross-check
std::vector<verified_set> successes;

void remember(const std::string &origin, const program &p, const candidate_set &invs)
{
  successes.push_back({origin, p, invs});
}

fs::path workdir()
{
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("invsynth-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string shell_arg(const fs::path &p) { return "'" + p.string() + "'"; }

int run_cli(const std::string &args)
{
  const std::string cmd = std::string(INVSYNTH_CLI) + " " + args + " >>" + shell_arg(workdir() / "cli.log") + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double seconds_since(std::chrono::steady_clock::time_point t)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

/// An empty string means the criterion holds.
using check_fn = std::function<std::string()>;

int failures = 0;

void criterion(const std::string &name, const check_fn &fn)
{
  const auto start = std::chrono::steady_clock::now();
  std::string problem;
  try
  {
    problem = fn();
  }
  catch(const std::exception &e)
  {
    problem = std::string("exception: ") + e.what();
  }
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.1fs", seconds_since(start));
  if(problem.empty())
    std::cout << "PASS " << name << " (" << timing << ")" << std::endl;
  else
  {
    ++failures;
    std::cout << "FAIL " << name << " (" << timing << "): " << problem << std::endl;
  }
}

bool implies_target(const program &p, const candidate_set &invs, const std::string &target)
{
  std::vector<expr> parts;
  for(const auto &c : invs)
    if(c.parsed)
      parts.push_back(*c.parsed);
  verification_condition vc;
  vc.formula = implies(conjunction(parts), parse_expression(target));
  vc.kinds = p.kinds();
  solver s;
  return s.check(vc).status == check_status::proved;
}

candidate_set read_inv_file(const fs::path &path)
{
  candidate_set out;
  std::istringstream in(support::read_file(path.string()));
  std::string line;
  std::size_t id = 0;
  const std::string lead = "loop invariant ";
  while(std::getline(in, line))
  {
    const auto at = line.find(lead);
    if(at == std::string::npos)
      continue;
    std::string text = line.substr(at + lead.size());
    if(const auto semi = text.rfind(';'); semi != std::string::npos)
      text.erase(semi);
    out.insert(parse_invariant(text, id++));
  }
  return out;
}

// --- criteria ---------------------------------------------------------------------

std::string oracle_ground_truth()
{
  const auto start = std::chrono::steady_clock::now();
  oracle o;
  const program p = support::count_down_unsigned();
  const auto good = o.check(p, support::cands({"x + y == n", "x >= 0"}));
  if(!good.success)
    return "{x+y==n, x>=0} did not verify";
  remember("ground truth", p, support::cands({"x + y == n", "x >= 0"}));
  if(o.check(p, support::cands({"x >= 0"})).success)
    return "{x>=0} verified";
  if(o.check(p, support::cands({"x + y == n"})).success)
    return "{x+y==n} verified";
  const auto extra = o.check(p, support::cands({"x + y == n", "x >= 0", "y > 0"}));
  if(extra.success || extra.blamed.sources() != std::vector<std::string>{"y > 0"})
    return "y > 0 was not the only blamed candidate";
  if(o.backend().config().solvers.size() != 1)
    return "expected one configured solver";
  if(const double t = seconds_since(start); t >= 5)
    return "took " + std::to_string(t) + " s";
  return {};
}

std::string exemplar(const std::string &file, const std::string &target)
{
  const fs::path inv = workdir() / (file + ".inv");
  const auto start = std::chrono::steady_clock::now();
  const int code = run_cli("prove " + shell_arg(support::exemplar_path(file)) +
                           " --seed 0 --budget 200 --completions 4 -o " + shell_arg(inv));
  const double t = seconds_since(start);
  if(code != 0)
    return "prove exited with " + std::to_string(code);
  if(t >= 60)
    return "took " + std::to_string(t) + " s";
  const program p = parse_program(support::exemplar(file));
  const candidate_set invs = read_inv_file(inv);
  if(invs.empty())
    return "no invariants written";
  oracle o;
  if(!o.check(p, invs).success)
    return "written invariants do not re-verify";
  remember(file, p, invs);
  if(!implies_target(p, invs, target))
    return "invariants do not imply " + target;
  return {};
}

std::string repair_fidelity()
{
  oracle o;
  const program p = support::garbage_y();
  const candidate_set before = fixtures::before_repair();
  const std::string unchanged = render_response(before.sources());
  scripted_provider prov({unchanged, unchanged, unchanged, fixtures::after_repair_response()});
  repair_config rc;
  rc.rounds = 7;
  const repair_outcome out = repair(o, p, before, prov, rc);
  if(!out.success)
    return "repair did not succeed";
  if(out.rounds_used != 4)
    return "rounds_used = " + std::to_string(out.rounds_used);
  oracle fresh;
  if(!fresh.check(p, out.invariants).success)
    return "final set does not re-verify";
  remember("repair", p, out.invariants);
  return {};
}

candidate_set pool_for(const program &p)
{
  return enumerate_candidates(p, 0, 100000);
}

candidate_set draw(const candidate_set &pool, std::size_t m, std::mt19937_64 &rng)
{
  std::vector<std::size_t> idx(pool.size());
  for(std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  candidate_set out;
  for(std::size_t i = 0; i < m && i < idx.size(); ++i)
  {
    candidate c = pool[idx[i]];
    c.id = out.size();
    out.insert(std::move(c));
  }
  return out;
}

std::string houdini_budget()
{
  const program p = support::count_down_unsigned();
  candidate_set pool = pool_for(p);
  // a few that never parse or mention unknown variables
  for(const char *junk : {"z >= 0", "x >=", "\\at(x, Pre) == n", "x + y == m"})
    pool.insert(parse_invariant(junk));
  oracle o;
  std::mt19937_64 rng(2024);
  std::size_t ok = 0, trials = 100;
  std::string first_problem;
  for(std::size_t t = 0; t < trials; ++t)
  {
    const std::size_t m = 1 + rng() % 50;
    candidate_set set = draw(pool, m, rng);
    if(t % 4 == 0)
    {
      // make sure some trials can succeed
      set.insert(parse_invariant("x + y == n", set.size()));
      set.insert(parse_invariant("x >= 0", set.size()));
    }
    const std::size_t before = o.calls();
    const houdini_outcome h = houdini(o, p, set);
    const std::size_t calls = o.calls() - before;
    if(calls <= set.size() + 1 && calls == h.oracle_calls)
      ++ok;
    else if(first_problem.empty())
      first_problem = "m=" + std::to_string(set.size()) + " took " + std::to_string(calls) + " calls";
    if(h.success)
      remember("houdini trial " + std::to_string(t), p, h.survivors);
  }
  if(ok != trials)
    return std::to_string(ok) + "/" + std::to_string(trials) + " within budget; " + first_problem;
  return {};
}

std::string houdini_exhaustive()
{
  std::mt19937_64 rng(99);
  std::size_t instances = 0;
  for(int t = 0; t < 500; ++t)
  {
    const std::size_t m = 1 + rng() % 12;
    const reference::model md = reference::model::random(m, rng);
    reference::model_oracle o(md);
    const houdini_outcome h = houdini(o, reference::model_program(m), md.all());
    const auto truth = reference::exhaustive_search(md);
    ++instances;
    if(h.success != truth.any_verifies)
      return "instance " + std::to_string(t) + ": houdini says " + (h.success ? "success" : "failure");
    if(h.oracle_calls > m + 1)
      return "instance " + std::to_string(t) + ": " + std::to_string(h.oracle_calls) + " calls";
  }
  return instances == 500 ? std::string() : "ran " + std::to_string(instances);
}

bool in_box(const program &p, const std::function<bool(const reference::state &)> &each)
{
  const auto vars = p.loop_head_vars();
  const kind_map kinds = p.kinds();
  reference::state st;
  std::function<bool(std::size_t)> rec = [&](std::size_t i) {
    if(i == vars.size())
      return each(st);
    const std::int64_t low = kind_of(vars[i], kinds) == int_kind::unsigned_int ? 0 : -6;
    for(std::int64_t v = low; v <= 6; ++v)
    {
      st[vars[i]] = v;
      if(!rec(i + 1))
        return false;
    }
    return true;
  };
  return rec(0);
}

std::string blame_property()
{
  const program p = support::count_down_unsigned();
  const candidate_set pool = pool_for(p);
  oracle o;
  solver independent;
  const reference::domain box{-6, 6};
  std::mt19937_64 rng(7);
  std::size_t blamed_total = 0, noninductive = 0;
  for(int t = 0; t < 100; ++t)
  {
    candidate_set set = draw(pool, 1 + rng() % 10, rng);
    if(t % 3 == 0)
      set.insert(parse_invariant("x + y == n", set.size()));
    const oracle_verdict v = o.check(p, set);
    if(v.syntax_error)
      return "unexpected syntax error in trial " + std::to_string(t);
    if(v.success)
      remember("blame trial " + std::to_string(t), p, set);
    bool inductive = true;
    for(const auto &c : set)
    {
      const bool e = independent.check(establishment_vc(p, c)).status == check_status::proved;
      const bool pr = independent.check(preservation_vc(p, set, c)).status == check_status::proved;
      inductive = inductive && e && pr;
      const bool blamed = v.blamed.contains(c);
      if(blamed && e && pr)
        return "trial " + std::to_string(t) + ": " + c.source + " blamed but passes both";
      if(!blamed && !(e && pr))
        return "trial " + std::to_string(t) + ": " + c.source + " not blamed but fails " + (e ? "preservation" : "establishment");
      if(!blamed)
      {
        // brute force in a small box must agree with the solver
        const bool est = in_box(p, [&](const reference::state &s) {
          for(const auto &pre : p.pre)
            if(reference::truth(pre, s, box) != true)
              return true;
          return reference::truth(*c.parsed, s, box) == true;
        });
        reference::exec_options eo;
        eo.dom = box;
        eo.asserts_checked = false;
        const bool pres = in_box(p, [&](const reference::state &s) {
          for(const auto &other : set)
            if(reference::truth(*other.parsed, s, box) != true)
              return true;
          if(reference::truth(p.loop_guard, s, box) != true)
            return true;
          return reference::all_runs_satisfy(p.loop_body, *c.parsed, s, eo);
        });
        if(!est || !pres)
          return "trial " + std::to_string(t) + ": " + c.source + " refuted by brute force";
      }
    }
    blamed_total += v.blamed.size();
    if(!inductive)
    {
      ++noninductive;
      if(v.blamed.empty())
        return "trial " + std::to_string(t) + ": non-inductive set with empty blame";
    }
  }
  if(noninductive == 0 || blamed_total == 0)
    return "the random sets never exercised blame";
  return {};
}

std::string soundness()
{
  bounded_options bo;
  bo.low = -6;
  bo.high = 6;
  bo.max_iterations = 64;
  std::size_t states = 0;
  for(const auto &s : successes)
  {
    const exploration_result r = explore_bounded(s.prog, bo);
    if(!r.violations.empty())
      return s.origin + ": reachable assertion violation";
    eval_options eo;
    eo.kinds = s.prog.kinds();
    for(const auto &st : r.loop_head_states)
      for(const auto &c : s.invariants)
      {
        if(!c.parsed)
          return s.origin + ": verified set holds an unparsed candidate";
        if(evaluate_bool(*c.parsed, st, eo) != true)
          return s.origin + ": " + c.source + " violated at a reachable loop head";
        ++states;
      }
  }
  if(successes.size() < 5 || states == 0)
    return "only " + std::to_string(successes.size()) + " verified sets to cross-check";
  return {};
}

std::string pass_at_k_exactness()
{
  for(std::size_t n = 1; n <= 10; ++n)
    for(std::size_t c = 0; c <= n; ++c)
      for(std::size_t k = 1; k <= n; ++k)
        if(std::abs(pass_at_k(n, c, k) - reference::pass_at_k(n, c, k)) > 1e-12)
          return "mismatch at n=" + std::to_string(n) + " c=" + std::to_string(c) + " k=" + std::to_string(k);
  if(pass_at_k(15, 15, 1) != 1.0 || pass_at_k(15, 0, 15) != 0.0 || std::abs(pass_at_k(4, 2, 2) - 5.0 / 6.0) > 1e-12)
    return "tagged examples differ";
  return {};
}

std::string normalization()
{
  if(normalize("x = __VERIFIER_nondet_int(); // pick") != "x = unknown_int();")
    return "nondet example";
  if(normalize("ERROR: reach_error();") != "//@ assert (\\false);")
    return "error label example";
  std::mt19937_64 rng(50);
  for(int i = 0; i < 50; ++i)
  {
    const std::string once = normalize(corpus_gen::sv_comp_style(rng));
    if(normalize(once) != once)
      return "not idempotent on fuzz file " + std::to_string(i);
  }
  return {};
}

std::string replay_determinism()
{
  const fs::path corpus = workdir() / "corpus";
  fs::create_directories(corpus);
  for(const char *f : {"count_down_signed.c", "garbage_y.c"})
    fs::copy_file(support::exemplar_path(f), corpus / f, fs::copy_options::overwrite_existing);
  const fs::path log = workdir() / "responses.jsonl";
  const std::string common = " --completions 3 --budget 60 --union-trials 3";
  if(run_cli("campaign " + shell_arg(corpus) + " --out " + shell_arg(workdir() / "recorded") + " --record " +
             shell_arg(log) + common) != 0)
    return "recording campaign failed";
  std::string reports[2];
  for(int i = 0; i < 2; ++i)
  {
    const fs::path out = workdir() / ("replay" + std::to_string(i));
    if(run_cli("campaign " + shell_arg(corpus) + " --out " + shell_arg(out) + " --replay " + shell_arg(log) + common) != 0)
      return "replay run " + std::to_string(i) + " failed";
    reports[i] = support::read_file((out / "report.csv").string());
  }
  if(reports[0] != reports[1])
    return "report.csv differs between replays";
  if(reports[0].find("count_down_signed,ran,") == std::string::npos)
    return "replayed report lacks the benchmark rows";
  return {};
}

} // namespace

int main()
{
  if(!support::have_z3())
  {
    std::cout << "FAIL setup: z3 not on PATH" << std::endl;
    return 1;
  }
  criterion("oracle ground truth on the count-down program", oracle_ground_truth);
  criterion("offline prove of the unsigned count-down implies x+y==n", [] {
    return exemplar("count_down.c", "x + y == n");
  });
  criterion("offline prove of bounded steps implies k<=1000000 && k<=i", [] {
    return exemplar("bounded_steps.c", "k <= 1000000 && k <= i");
  });
  criterion("repair succeeds in round 4 from the garbage-y set", repair_fidelity);
  criterion("houdini stays within m+1 oracle calls (100 random sets)", houdini_budget);
  criterion("houdini matches exhaustive subset search (<= 12 candidates)", houdini_exhaustive);
  criterion("blame property on 100 random sets", blame_property);
  criterion("pass@k matches k-subset enumeration", pass_at_k_exactness);
  criterion("normalization examples and idempotence", normalization);
  criterion("replay runs produce identical report.csv", replay_determinism);
  // last: it checks every verified set collected above
  criterion("bounded execution finds no counterexample to any verified set", soundness);

  std::error_code ec;
  fs::remove_all(workdir(), ec);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
