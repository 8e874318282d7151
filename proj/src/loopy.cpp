#include <invsynth/loopy.hpp>

#include <invsynth/errors.hpp>
#include <invsynth/log.hpp>
#include <invsynth/parser.hpp>
#include <invsynth/printer.hpp>

#include <chrono>

namespace invsynth {

const char *to_string(solved_by s)
{
  switch(s)
  {
  case solved_by::none: return "none";
  case solved_by::completion: return "completion";
  case solved_by::houdini: return "houdini";
  case solved_by::repair: return "repair";
  }
  return "none";
}

session_record loopy(oracle &o, const program &p, provider &prov, const loopy_config &config)
{
  const auto started = std::chrono::steady_clock::now();
  const std::size_t oracle_before = o.calls();
  std::size_t sampled = 0; // the provider may be shared with other sessions

  session_record rec;
  rec.benchmark = config.benchmark.empty() ? p.name : config.benchmark;
  rec.provider = prov.name();
  rec.prompt = config.prompt.name;
  rec.n_samples = config.n_samples;
  rec.n_repair = config.enable_repair ? config.n_repair : 0;
  rec.houdini_enabled = config.enable_houdini;
  rec.repair_enabled = config.enable_repair;

  generation_request request;
  request.benchmark = rec.benchmark;
  request.prompt = render_prompt(config.prompt, p.source_text.empty() ? pretty_print(p) : p.source_text);
  request.prog = &p;
  request.count = 1;
  request.config = config.generation;
  request.config.completions = config.n_samples;

  const bool has_obligations = !p.post.empty() || !p.body_asserts.empty() || !p.entry_asserts.empty();

  auto sample = [&](std::size_t index) {
    completion_record c;
    c.index = index;
    request.first_index = index;
    ++sampled;
    try
    {
      completion got = prov.generate(request).at(0);
      c.response = std::move(got.raw);
      c.candidates = std::move(got.extracted);
      c.latency_ms = got.latency_ms;
    }
    catch(const auth_error &)
    {
      throw;
    }
    catch(const provider_error &e)
    {
      c.provider_error = e.what();
    }
    return c;
  };
  auto check = [&](completion_record &c) {
    if(!c.provider_error.empty() || (c.candidates.empty() && has_obligations))
    {
      log_debug(rec.benchmark + ": completion " + std::to_string(c.index) + " not checked (" +
                (c.provider_error.empty() ? "empty set" : "generation failed") + ")");
      return; // counts as failed
    }
    oracle_verdict v = o.check(p, c.candidates);
    c.checked = true;
    c.success = v.success;
    c.blamed = v.blamed.size();
    if(v.syntax_error)
      c.syntax_error = v.syntax_error->source + ": " + v.syntax_error->message;
  };
  auto finish = [&](bool success, solved_by how, candidate_set invariants) {
    rec.success = success;
    rec.how = how;
    rec.invariants = std::move(invariants);
    rec.oracle_calls = o.calls() - oracle_before;
    rec.provider_calls = sampled + (rec.repair ? rec.repair->provider_calls : 0);
    rec.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return rec;
  };

  if(config.eager)
  {
    for(std::size_t i = 0; i < config.n_samples; ++i)
      rec.completions.push_back(sample(i));
    for(auto &c : rec.completions)
    {
      check(c);
      if(c.success && !rec.first_success)
        rec.first_success = c.index;
    }
  }
  else
  {
    for(std::size_t i = 0; i < config.n_samples && !rec.first_success; ++i)
    {
      rec.completions.push_back(sample(i));
      check(rec.completions.back());
      if(rec.completions.back().success)
        rec.first_success = i;
    }
  }
  if(rec.first_success)
    return finish(true, solved_by::completion, rec.completions[*rec.first_success].candidates);

  for(const auto &c : rec.completions)
    rec.union_set.insert_all(c.candidates);

  if(config.enable_houdini)
  {
    rec.houdini = houdini(o, p, rec.union_set);
    if(rec.houdini->success)
      return finish(true, solved_by::houdini, rec.houdini->survivors);
  }
  if(config.enable_repair && config.n_repair > 0)
  {
    repair_config rc;
    rc.rounds = config.n_repair;
    rc.prompt = config.repair_prompt;
    rc.generation = config.generation;
    rc.benchmark = rec.benchmark;
    rc.first_index = config.n_samples;
    rec.repair = repair(o, p, rec.union_set, prov, rc);
    if(rec.repair->success)
      return finish(true, solved_by::repair, rec.repair->invariants);
  }
  return finish(false, solved_by::none, {});
}

// --- serialization ------------------------------------------------------------

namespace {

nlohmann::json sources(const candidate_set &cs)
{
  return cs.sources();
}

candidate_set candidates_from(const nlohmann::json &j)
{
  candidate_set out;
  std::size_t id = 0;
  for(const auto &s : j)
    if(out.insert(parse_invariant(s.get<std::string>(), id)))
      ++id;
  return out;
}

nlohmann::json houdini_json(const houdini_outcome &h)
{
  nlohmann::json trace = nlohmann::json::array();
  for(const auto &step : h.trace)
    trace.push_back({{"iteration", step.iteration},
                     {"reason", to_string(step.reason)},
                     {"pruned", sources(step.pruned)}});
  return {{"success", h.success},
          {"survivors", sources(h.survivors)},
          {"oracle_calls", h.oracle_calls},
          {"trace", trace}};
}

houdini_outcome houdini_from(const nlohmann::json &j)
{
  houdini_outcome h;
  h.success = j.at("success").get<bool>();
  h.survivors = candidates_from(j.at("survivors"));
  h.oracle_calls = j.at("oracle_calls").get<std::size_t>();
  for(const auto &t : j.at("trace"))
  {
    prune_step step;
    step.iteration = t.at("iteration").get<std::size_t>();
    step.reason = t.at("reason").get<std::string>() == "syntax" ? prune_reason::syntax : prune_reason::blamed;
    step.pruned = candidates_from(t.at("pruned"));
    h.trace.push_back(std::move(step));
  }
  return h;
}

nlohmann::json repair_json(const repair_outcome &r)
{
  nlohmann::json rounds = nlohmann::json::array();
  for(const auto &round : r.transcript)
  {
    nlohmann::json j = {{"round", round.round},
                        {"feedback", round.feedback},
                        {"response", round.response},
                        {"candidates", sources(round.candidates)},
                        {"direct_success", round.direct_success}};
    if(round.houdini)
      j["houdini"] = houdini_json(*round.houdini);
    if(!round.provider_error.empty())
      j["provider_error"] = round.provider_error;
    rounds.push_back(std::move(j));
  }
  return {{"success", r.success},
          {"invariants", sources(r.invariants)},
          {"rounds_used", r.rounds_used},
          {"oracle_calls", r.oracle_calls},
          {"provider_calls", r.provider_calls},
          {"transcript", rounds}};
}

repair_outcome repair_from(const nlohmann::json &j)
{
  repair_outcome r;
  r.success = j.at("success").get<bool>();
  r.invariants = candidates_from(j.at("invariants"));
  r.rounds_used = j.at("rounds_used").get<std::size_t>();
  r.oracle_calls = j.at("oracle_calls").get<std::size_t>();
  r.provider_calls = j.at("provider_calls").get<std::size_t>();
  for(const auto &t : j.at("transcript"))
  {
    repair_round round;
    round.round = t.at("round").get<std::size_t>();
    round.feedback = t.at("feedback").get<std::string>();
    round.response = t.at("response").get<std::string>();
    round.candidates = candidates_from(t.at("candidates"));
    round.direct_success = t.at("direct_success").get<bool>();
    if(t.contains("houdini"))
      round.houdini = houdini_from(t.at("houdini"));
    round.provider_error = t.value("provider_error", "");
    r.transcript.push_back(std::move(round));
  }
  return r;
}

solved_by solved_from(const std::string &s)
{
  if(s == "completion")
    return solved_by::completion;
  if(s == "houdini")
    return solved_by::houdini;
  if(s == "repair")
    return solved_by::repair;
  return solved_by::none;
}

} // namespace

nlohmann::json to_json(const session_record &s)
{
  nlohmann::json completions = nlohmann::json::array();
  for(const auto &c : s.completions)
  {
    nlohmann::json j = {{"index", c.index},
                        {"response", c.response},
                        {"candidates", sources(c.candidates)},
                        {"checked", c.checked},
                        {"success", c.success},
                        {"blamed", c.blamed},
                        {"latency_ms", c.latency_ms}};
    if(c.syntax_error)
      j["syntax_error"] = *c.syntax_error;
    if(!c.provider_error.empty())
      j["provider_error"] = c.provider_error;
    completions.push_back(std::move(j));
  }
  nlohmann::json j = {{"schema", "invsynth.session"},
                      {"schema_version", session_record::schema_version},
                      {"benchmark", s.benchmark},
                      {"provider", s.provider},
                      {"prompt", s.prompt},
                      {"n_samples", s.n_samples},
                      {"n_repair", s.n_repair},
                      {"houdini_enabled", s.houdini_enabled},
                      {"repair_enabled", s.repair_enabled},
                      {"completions", completions},
                      {"union", sources(s.union_set)},
                      {"success", s.success},
                      {"solved_by", to_string(s.how)},
                      {"invariants", sources(s.invariants)},
                      {"oracle_calls", s.oracle_calls},
                      {"provider_calls", s.provider_calls},
                      {"wall_ms", s.wall_ms}};
  j["first_success"] = s.first_success ? nlohmann::json(*s.first_success) : nlohmann::json(nullptr);
  j["houdini"] = s.houdini ? houdini_json(*s.houdini) : nlohmann::json(nullptr);
  j["repair"] = s.repair ? repair_json(*s.repair) : nlohmann::json(nullptr);
  if(!s.error.empty())
    j["error"] = s.error;
  return j;
}

session_record session_from_json(const nlohmann::json &j)
{
  if(j.value("schema", "") != "invsynth.session")
    throw error("not a session record");
  if(j.value("schema_version", 0) != session_record::schema_version)
    throw error("unsupported session schema version");
  session_record s;
  s.benchmark = j.at("benchmark").get<std::string>();
  s.provider = j.at("provider").get<std::string>();
  s.prompt = j.at("prompt").get<std::string>();
  s.n_samples = j.at("n_samples").get<std::size_t>();
  s.n_repair = j.at("n_repair").get<std::size_t>();
  s.houdini_enabled = j.at("houdini_enabled").get<bool>();
  s.repair_enabled = j.at("repair_enabled").get<bool>();
  for(const auto &c : j.at("completions"))
  {
    completion_record r;
    r.index = c.at("index").get<std::size_t>();
    r.response = c.at("response").get<std::string>();
    r.candidates = candidates_from(c.at("candidates"));
    r.checked = c.at("checked").get<bool>();
    r.success = c.at("success").get<bool>();
    r.blamed = c.at("blamed").get<std::size_t>();
    r.latency_ms = c.at("latency_ms").get<double>();
    if(c.contains("syntax_error"))
      r.syntax_error = c.at("syntax_error").get<std::string>();
    r.provider_error = c.value("provider_error", "");
    s.completions.push_back(std::move(r));
  }
  s.union_set = candidates_from(j.at("union"));
  s.success = j.at("success").get<bool>();
  s.how = solved_from(j.at("solved_by").get<std::string>());
  s.invariants = candidates_from(j.at("invariants"));
  s.oracle_calls = j.at("oracle_calls").get<std::size_t>();
  s.provider_calls = j.at("provider_calls").get<std::size_t>();
  s.wall_ms = j.at("wall_ms").get<double>();
  if(!j.at("first_success").is_null())
    s.first_success = j.at("first_success").get<std::size_t>();
  if(!j.at("houdini").is_null())
    s.houdini = houdini_from(j.at("houdini"));
  if(!j.at("repair").is_null())
    s.repair = repair_from(j.at("repair"));
  s.error = j.value("error", "");
  return s;
}

} // namespace invsynth
