#include <invsynth/houdini.hpp>

namespace invsynth {

const char *to_string(prune_reason r)
{
  return r == prune_reason::syntax ? "syntax" : "blamed";
}

houdini_outcome houdini(oracle &o, const program &p, candidate_set candidates)
{
  houdini_outcome out;
  for(std::size_t iteration = 1; !candidates.empty(); ++iteration)
  {
    oracle_verdict v = o.check(p, candidates);
    ++out.oracle_calls;
    if(v.success)
    {
      out.success = true;
      out.survivors = std::move(candidates);
      return out;
    }
    prune_step step;
    step.iteration = iteration;
    if(v.syntax_error)
    {
      for(std::size_t i = 0; i < candidates.size(); ++i)
        if(candidates.key(i) == v.syntax_error->key)
        {
          step.pruned.insert(candidates[i]);
          break;
        }
      step.reason = prune_reason::syntax;
    }
    else if(v.blamed.empty())
      break; // inductive, but the assertions do not follow
    else
    {
      step.pruned = std::move(v.blamed);
      step.reason = prune_reason::blamed;
    }
    candidates.remove(step.pruned);
    out.trace.push_back(std::move(step));
  }
  return out;
}

} // namespace invsynth
