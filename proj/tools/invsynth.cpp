#include <invsynth/errors.hpp>
#include <invsynth/harness.hpp>
#include <invsynth/log.hpp>
#include <invsynth/parser.hpp>
#include <invsynth/printer.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace invsynth;

namespace {

// exit codes
constexpr int verified = 0;
constexpr int not_verified = 1;
constexpr int failure = 2;

std::string read_text(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if(!in)
    throw error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct solver_flags
{
  std::vector<std::string> commands;
  std::string config_file;
  int timeout_ms = 0;
  bool wrap32 = false;
  bool no_cross_check = false;
  std::size_t jobs = 1;

  void add(CLI::App &app)
  {
    app.add_option("--solver", commands, "Solver command line, {file} for a script path (repeatable)");
    app.add_option("--solver-config", config_file, "JSON solver configuration");
    app.add_option("--timeout-ms", timeout_ms, "Per-query solver timeout");
    app.add_flag("--wrap32", wrap32, "32-bit wraparound integer semantics");
    app.add_flag("--no-cross-check", no_cross_check, "Trust the first solver's answer");
    app.add_option("--jobs", jobs, "Obligations discharged in parallel per check");
  }

  solver_config build() const
  {
    solver_config c = solver_config::from_environment();
    if(!config_file.empty())
      c = solver_config::from_json_file(config_file, c);
    if(!commands.empty())
    {
      c.solvers.clear();
      for(const auto &cmd : commands)
        c.solvers.push_back(parse_solver_command(cmd));
    }
    if(timeout_ms > 0)
      c.timeout_ms = timeout_ms;
    if(wrap32)
      c.semantics = int_semantics::wrap32;
    if(no_cross_check)
      c.cross_check = false;
    return c;
  }
};

struct generation_flags
{
  std::string prompt = "M2";
  std::string provider = "offline";
  std::string endpoint_config;
  std::size_t completions = 0;
  std::size_t repair_rounds = 0;
  bool houdini = true;
  bool eager = false;
  std::uint64_t seed = 0;
  std::size_t budget = 200;
  double temperature = 0.7;
  std::string record;

  void add(CLI::App &app)
  {
    app.add_option("--prompt", prompt, "M1, M2 or a template file")->capture_default_str();
    app.add_option("--provider", provider, "offline, http:<endpoint> or replay:<log>")->capture_default_str();
    app.add_option("--endpoint-config", endpoint_config, "JSON file with named HTTP endpoints");
    app.add_option("--completions", completions, "Sampled completions (default 15, or 8 with repair)");
    app.add_option("--repair-rounds", repair_rounds, "Repair rounds after sampling (0 disables repair)");
    app.add_flag("--houdini,!--no-houdini", houdini, "Run union + Houdini after sampling (default on)");
    app.add_flag("--eager", eager, "Check every completion even after a success");
    app.add_option("--seed", seed, "Sampling and enumeration seed")->capture_default_str();
    app.add_option("--budget", budget, "Offline provider candidate budget")->capture_default_str();
    app.add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
    app.add_option("--record", record, "Append every response to this JSONL log");
  }

  loopy_config build() const
  {
    loopy_config c;
    c.prompt = load_template(prompt);
    c.enable_houdini = houdini;
    c.enable_repair = repair_rounds > 0;
    c.n_repair = repair_rounds;
    c.n_samples = completions > 0 ? completions : (c.enable_repair ? 8 : 15);
    c.eager = eager;
    c.generation.seed = seed;
    c.generation.temperature = temperature;
    c.generation.completions = c.n_samples;
    return c;
  }

  std::shared_ptr<invsynth::provider> make() const
  {
    auto p = make_provider(provider, budget, endpoint_config);
    if(!record.empty())
      p = std::make_shared<recording_provider>(p, record);
    return p;
  }
};

candidate_set read_invariants(const std::string &path)
{
  const std::string text = read_text(path);
  if(text.find("loop invariant") != std::string::npos)
    return extract_invariants(text.find("```") != std::string::npos ? text : "```\n" + text + "\n```");
  candidate_set out;
  std::istringstream in(text);
  std::string line;
  std::size_t id = 0;
  while(std::getline(in, line))
  {
    while(!line.empty() && (std::isspace(static_cast<unsigned char>(line.back())) || line.back() == ';'))
      line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if(b == std::string::npos)
      continue;
    out.insert(parse_invariant(line.substr(b), id++));
  }
  return out;
}

nlohmann::json verdict_json(const oracle_verdict &v)
{
  nlohmann::json j;
  j["success"] = v.success;
  j["syntax_error"] = v.syntax_error ? nlohmann::json{{"invariant", v.syntax_error->source},
                                                      {"message", v.syntax_error->message}}
                                     : nlohmann::json(nullptr);
  j["blamed"] = v.blamed.sources();
  j["invariants"] = nlohmann::json::array();
  for(const auto &s : v.statuses)
    j["invariants"].push_back({{"invariant", s.source}, {"established", s.established}, {"preserved", s.preserved}});
  j["obligations"] = nlohmann::json::array();
  for(const auto &o : v.obligations)
    j["obligations"].push_back({{"kind", to_string(o.kind)},
                                {"target", o.target},
                                {"line", o.location.line},
                                {"status", to_string(o.result.status)},
                                {"solver", o.result.solver}});
  return j;
}

void print_config(const solver_config &sc, const generation_flags *gf)
{
  std::string solvers;
  for(const auto &c : sc.solvers)
    solvers += (solvers.empty() ? "" : "; ") + c.name;
  log_info("solvers: " + solvers + ", timeout " + std::to_string(sc.timeout_ms) + " ms, " +
           (sc.semantics == int_semantics::wrap32 ? "wrap32" : "unbounded") +
           (sc.cross_check ? ", cross-check" : ""));
  if(gf)
  {
    const loopy_config lc = gf->build();
    log_info("provider " + gf->provider + ", prompt " + lc.prompt.name + ", completions " +
             std::to_string(lc.n_samples) + ", repair rounds " + std::to_string(lc.n_repair) + ", houdini " +
             (lc.enable_houdini ? "on" : "off") + ", seed " + std::to_string(gf->seed) + ", budget " +
             std::to_string(gf->budget));
  }
}

int cmd_check(const std::string &file, const std::string &inv_file, const std::vector<std::string> &inline_invs,
              bool json, const solver_flags &sf)
{
  const annotated_program ap = parse_annotated(read_text(file));
  candidate_set cands = ap.candidates;
  if(!inv_file.empty())
    cands = read_invariants(inv_file);
  if(!inline_invs.empty())
  {
    cands = candidate_set{};
    for(std::size_t i = 0; i < inline_invs.size(); ++i)
      cands.insert(parse_invariant(inline_invs[i], i));
  }
  print_config(sf.build(), nullptr);
  oracle o(sf.build(), oracle_options{sf.jobs});
  const oracle_verdict v = o.check(ap.prog, cands);
  if(json)
    std::cout << verdict_json(v).dump(2) << "\n";
  else
    std::cout << render_feedback(ap.prog, v) << "\n" << (v.success ? "verified" : "not verified") << "\n";
  return v.success ? verified : not_verified;
}

int cmd_prove(const std::string &file, const std::string &out, bool json, const solver_flags &sf,
              const generation_flags &gf)
{
  const program p = parse_program(read_text(file));
  print_config(sf.build(), &gf);
  oracle o(sf.build(), oracle_options{sf.jobs});
  auto prov = gf.make();
  loopy_config lc = gf.build();
  lc.benchmark = std::filesystem::path(file).stem().string();
  const session_record s = loopy(o, p, *prov, lc);
  if(!s.error.empty())
    throw error(s.error);

  if(json)
    std::cout << to_json(s).dump(2) << "\n";
  if(!s.success)
  {
    if(!json)
      std::cout << "not verified (" << s.completions.size() << " completions, " << s.oracle_calls
                << " oracle calls)\n";
    return not_verified;
  }
  std::string text;
  for(const auto &c : s.invariants)
    text += "loop invariant " + c.source + ";\n";
  std::filesystem::path target = out;
  if(target.empty())
    target = std::filesystem::path(file).replace_extension(".inv");
  std::ofstream(target) << text;
  if(!json)
    std::cout << text << "verified (" << to_string(s.how) << ", " << s.oracle_calls << " oracle calls); wrote "
              << target.string() << "\n";
  return verified;
}

int cmd_campaign(const std::string &corpus, const std::string &provider_spec, const std::string &out,
                 std::size_t workers, std::size_t trials, const solver_flags &sf, const generation_flags &gf)
{
  {
    generation_flags shown = gf;
    shown.provider = provider_spec;
    print_config(sf.build(), &shown);
  }
  campaign_config cc;
  cc.loopy = gf.build();
  cc.solver = sf.build();
  cc.oracle_jobs = sf.jobs;
  cc.provider_spec = provider_spec;
  cc.offline_budget = gf.budget;
  cc.endpoint_config = gf.endpoint_config;
  cc.record_log = gf.record;
  cc.workers = workers;
  cc.union_trials = trials;
  cc.union_seed = gf.seed;
  cc.out_dir = out;
  const campaign_report r = run_campaign(corpus, cc);
  const auto &s = r.summary;
  std::cout << "benchmarks " << s.benchmarks << ", attempted " << s.attempted << ", solved: no-houdini "
            << s.solved_no_houdini << ", houdini " << s.solved_houdini << ", with repair " << s.solved_repair
            << "\nreport written to " << out << "\n";
  return verified;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Loop invariant synthesis and checking for single-loop C programs"};
  app.require_subcommand(1);
  app.fallthrough();
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More logging (repeatable)");

  solver_flags sf;
  generation_flags gf;
  bool json = false;

  auto *check = app.add_subcommand("check", "Check loop invariants for a program");
  check->alias("verify");
  std::string check_file, inv_file;
  std::vector<std::string> inline_invs;
  check->add_option("program", check_file, "C source")->required()->check(CLI::ExistingFile);
  check->add_option("--invariants", inv_file, "Invariant file (loop invariant clauses or one per line)")
    ->check(CLI::ExistingFile);
  check->add_option("-i,--invariant", inline_invs, "Invariant expression (repeatable)");
  check->add_flag("--json", json, "JSON output");
  sf.add(*check);

  auto *prove = app.add_subcommand("prove", "Synthesize invariants for a program");
  std::string prove_file, prove_out;
  prove->add_option("program", prove_file, "C source")->required()->check(CLI::ExistingFile);
  prove->add_option("-o,--out", prove_out, "Invariant file to write (default <program>.inv)");
  prove->add_flag("--json", json, "Print the session record as JSON");
  sf.add(*prove);
  gf.add(*prove);

  auto *campaign = app.add_subcommand("campaign", "Run a benchmark campaign over a corpus directory");
  campaign->alias("run-campaign");
  std::string corpus, out_dir = "out";
  std::size_t workers = 1, trials = 100;
  std::string campaign_replay;
  campaign->add_option("corpus", corpus, "Directory of .c benchmarks")->required()->check(CLI::ExistingDirectory);
  campaign->add_option("--replay", campaign_replay, "Replay responses from a recorded log (no network)")
    ->check(CLI::ExistingFile);
  campaign->add_option("--out", out_dir, "Output directory")->capture_default_str();
  campaign->add_option("--workers", workers, "Benchmarks processed in parallel")->capture_default_str();
  campaign->add_option("--union-trials", trials, "Monte Carlo trials per k for union + Houdini (0 skips)")
    ->capture_default_str();
  sf.add(*campaign);
  gf.add(*campaign);

  auto *replay = app.add_subcommand("replay", "Rerun a campaign from a recorded response log");
  std::string log_path, replay_corpus, replay_out = "out";
  std::size_t replay_workers = 1, replay_trials = 100;
  replay->add_option("log", log_path, "JSONL response log")->required()->check(CLI::ExistingFile);
  replay->add_option("corpus", replay_corpus, "Directory of .c benchmarks")->required()->check(CLI::ExistingDirectory);
  replay->add_option("--out", replay_out, "Output directory")->capture_default_str();
  replay->add_option("--workers", replay_workers, "Benchmarks processed in parallel")->capture_default_str();
  replay->add_option("--union-trials", replay_trials, "Monte Carlo trials per k (0 skips)")->capture_default_str();
  sf.add(*replay);
  gf.add(*replay);

  auto *norm = app.add_subcommand("normalize", "Print a benchmark in the normalized form");
  std::string norm_file;
  bool show_category = false;
  norm->add_option("file", norm_file, "C source")->required()->check(CLI::ExistingFile);
  norm->add_flag("--category", show_category, "Print the feature scan instead");

  try
  {
    app.parse(argc, argv);
  }
  catch(const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? verified : failure;
  }
  set_log_level(verbosity >= 2 ? log_level::debug : verbosity == 1 ? log_level::info : log_level::warning);

  try
  {
    if(*check)
      return cmd_check(check_file, inv_file, inline_invs, json, sf);
    if(*prove)
      return cmd_prove(prove_file, prove_out, json, sf, gf);
    if(*campaign)
    {
      generation_flags g = gf;
      g.eager = true; // pass@k needs a verdict for every completion
      if(!campaign_replay.empty())
        g.provider = "replay:" + campaign_replay;
      return cmd_campaign(corpus, g.provider, out_dir, workers, trials, sf, g);
    }
    if(*replay)
    {
      generation_flags g = gf;
      g.eager = true;
      return cmd_campaign(replay_corpus, "replay:" + log_path, replay_out, replay_workers, replay_trials, sf, g);
    }
    if(*norm)
    {
      const std::string src = read_text(norm_file);
      if(show_category)
      {
        const category c = categorize(src);
        std::cout << "loops " << c.loops << "\nmethods " << c.methods << "\narrays " << c.arrays << "\npointers "
                  << c.pointers << "\nlines " << c.lines << "\nincluded " << c.included;
        if(!c.included)
          std::cout << " (" << c.reason << ")";
        std::cout << "\n";
      }
      else
        std::cout << normalize(src);
      return verified;
    }
  }
  catch(const std::exception &e)
  {
    std::cerr << "invsynth: " << e.what() << "\n";
    return failure;
  }
  return failure;
}
