#include <invsynth/oracle.hpp>

#include <algorithm>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace invsynth {

std::optional<syntax_report> first_syntax_error(const program &p, const candidate_set &candidates)
{
  const auto visible = p.loop_head_vars();
  for(std::size_t i = 0; i < candidates.size(); ++i)
  {
    const candidate &c = candidates[i];
    if(!c.parsed)
      return syntax_report{
        c.id, c.source, candidates.key(i), c.parse_error.empty() ? "syntax error" : c.parse_error};
    for(const auto &v : free_vars(*c.parsed))
      if(std::find(visible.begin(), visible.end(), v) == visible.end())
        return syntax_report{c.id, c.source, candidates.key(i), "unbound logic variable " + v};
  }
  return std::nullopt;
}

oracle::oracle(solver_config config, oracle_options opt)
  : solver_(std::make_shared<solver>(std::move(config))), opt_(opt)
{
}

oracle::oracle(std::shared_ptr<solver> shared, oracle_options opt) : solver_(std::move(shared)), opt_(opt) {}

std::vector<check_result> oracle::discharge(const std::vector<verification_condition> &vcs)
{
  std::vector<check_result> results(vcs.size());
  const std::size_t workers = std::min(opt_.jobs, vcs.size());
  if(workers <= 1)
  {
    for(std::size_t i = 0; i < vcs.size(); ++i)
      results[i] = solver_->check(vcs[i]);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for(std::size_t i = next++; i < vcs.size(); i = next++)
    {
      try
      {
        results[i] = solver_->check(vcs[i]);
      }
      catch(...)
      {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if(!failure)
          failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for(std::size_t t = 0; t < workers; ++t)
    pool.emplace_back(work);
  for(auto &t : pool)
    t.join();
  if(failure)
    std::rethrow_exception(failure);
  return results;
}

oracle_verdict oracle::check(const program &p, const candidate_set &candidates)
{
  ++calls_;
  oracle_verdict v;
  v.syntax_error = first_syntax_error(p, candidates);
  if(v.syntax_error)
    return v;

  // A candidate preserved with only itself assumed is preserved under any
  // superset; that query does not depend on the rest of the set, so it is
  // shared across Houdini iterations through the solver cache.
  const bool self_first = opt_.self_inductive_first && candidates.size() > 1;
  std::vector<verification_condition> vcs;
  for(const auto &c : candidates)
  {
    vcs.push_back(establishment_vc(p, c));
    vcs.push_back(self_first ? preservation_vc(p, candidate_set{c}, c) : preservation_vc(p, candidates, c));
  }
  std::vector<check_result> results = discharge(vcs);
  if(self_first)
  {
    std::vector<std::size_t> redo;
    std::vector<verification_condition> full;
    for(std::size_t i = 0; i < candidates.size(); ++i)
      if(results[2 * i + 1].status != check_status::proved)
      {
        redo.push_back(i);
        full.push_back(preservation_vc(p, candidates, candidates[i]));
      }
    std::vector<check_result> again = discharge(full);
    for(std::size_t k = 0; k < redo.size(); ++k)
    {
      vcs[2 * redo[k] + 1] = std::move(full[k]);
      results[2 * redo[k] + 1] = std::move(again[k]);
    }
  }

  for(std::size_t i = 0; i < candidates.size(); ++i)
  {
    const candidate &c = candidates[i];
    candidate_status s{c.id, c.source, results[2 * i].status == check_status::proved,
                       results[2 * i + 1].status == check_status::proved};
    if(!s.established || !s.preserved)
      v.blamed.insert(c);
    v.statuses.push_back(s);
  }
  for(std::size_t i = 0; i < vcs.size(); ++i)
    v.obligations.push_back({vcs[i].kind, vcs[i].target, vcs[i].location, std::move(results[i])});
  if(!v.blamed.empty())
    return v;

  std::vector<verification_condition> rest = sufficiency_vc(p, candidates);
  for(auto &vc : entry_vcs(p))
    rest.push_back(std::move(vc));
  std::vector<check_result> rest_results = discharge(rest);
  v.success = true;
  for(std::size_t i = 0; i < rest.size(); ++i)
  {
    v.success = v.success && rest_results[i].status == check_status::proved;
    v.obligations.push_back({rest[i].kind, rest[i].target, rest[i].location, std::move(rest_results[i])});
  }
  return v;
}

namespace {

const char *yes_no(bool b)
{
  return b ? "yes" : "no";
}

std::string located(const source_location &at)
{
  if(at.line == 0)
    return "";
  return " at line " + std::to_string(at.line);
}

} // namespace

std::string render_feedback(const program &p, const oracle_verdict &v)
{
  std::ostringstream out;
  if(v.syntax_error)
  {
    out << "Syntax error in loop invariant " << v.syntax_error->source << ": " << v.syntax_error->message
        << "\n";
    return out.str();
  }
  if(v.success)
    return "All goals proved.\n";

  for(const auto &s : v.statuses)
  {
    out << "invariant " << s.source << ": established=" << yes_no(s.established)
        << ", preserved=" << yes_no(s.preserved);
    if(s.preserved && !v.blamed.empty())
      out << " (partially proven: relies on invariants that are not inductive)";
    out << "\n";
  }
  if(!v.blamed.empty())
  {
    for(const auto &a : p.post)
      out << "assertion" << located(a.location) << ": Unproven\n";
    return out.str();
  }
  for(const auto &o : v.obligations)
  {
    if(o.proved())
      continue;
    switch(o.kind)
    {
    case vc_kind::sufficiency:
      out << "assertion" << located(o.location) << ": Unproven\n";
      break;
    case vc_kind::body_assertion:
      out << "assertion in the loop body" << located(o.location) << ": Unproven\n";
      break;
    case vc_kind::entry_assertion:
      out << "assertion before the loop" << located(o.location) << ": Unproven\n";
      break;
    case vc_kind::division_guard:
      out << "division by zero in the loop: Unproven\n";
      break;
    default:
      break;
    }
  }
  return out.str();
}

} // namespace invsynth
