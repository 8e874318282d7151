#include <invsynth/repair.hpp>

#include <invsynth/errors.hpp>
#include <invsynth/printer.hpp>

namespace invsynth {

repair_outcome repair(
  oracle &o, const program &p, candidate_set candidates, provider &prov, const repair_config &config)
{
  repair_outcome out;
  oracle_verdict verdict = o.check(p, candidates);
  ++out.oracle_calls;
  if(verdict.success)
  {
    out.success = true;
    out.invariants = std::move(candidates);
    return out;
  }

  for(std::size_t round = 1; round <= config.rounds; ++round)
  {
    out.rounds_used = round;
    repair_round record;
    record.round = round;
    record.feedback = render_feedback(p, verdict);

    generation_request request;
    request.benchmark = config.benchmark.empty() ? p.name : config.benchmark;
    request.prompt = render_prompt(config.prompt, annotate(p, candidates), record.feedback);
    request.prog = &p;
    request.first_index = config.first_index + round - 1;
    request.count = 1;
    request.repair = true;
    request.config = config.generation;

    ++out.provider_calls;
    try
    {
      completion c = prov.generate(request).at(0);
      record.response = std::move(c.raw);
      record.candidates = std::move(c.extracted);
    }
    catch(const auth_error &)
    {
      throw;
    }
    catch(const provider_error &e)
    {
      record.provider_error = e.what();
      out.transcript.push_back(std::move(record));
      continue;
    }

    oracle_verdict direct = o.check(p, record.candidates);
    ++out.oracle_calls;
    if(direct.success)
    {
      record.direct_success = true;
      out.success = true;
      out.invariants = record.candidates;
      out.transcript.push_back(std::move(record));
      return out;
    }
    houdini_outcome h = houdini(o, p, record.candidates);
    out.oracle_calls += h.oracle_calls;
    record.houdini = h;
    if(h.success)
    {
      out.success = true;
      out.invariants = h.survivors;
      out.transcript.push_back(std::move(record));
      return out;
    }
    candidates = record.candidates;
    verdict = std::move(direct);
    out.transcript.push_back(std::move(record));
  }
  return out;
}

} // namespace invsynth
