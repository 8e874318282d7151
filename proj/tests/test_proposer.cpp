#include "support.hpp"

#include <invsynth/printer.hpp>
#include <invsynth/proposer.hpp>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>
#include <unistd.h>

using namespace invsynth;

namespace {

std::string temp_path(const std::string &name)
{
  return (std::filesystem::temp_directory_path() / ("invsynth-test-" + std::to_string(::getpid()) + "-" + name)).string();
}

std::set<std::string> keys_of(const candidate_set &s)
{
  const auto k = s.keys();
  return {k.begin(), k.end()};
}

} // namespace

TEST(Prompt, FirstPromptInlinesTheProgram)
{
  const program p = support::count_down();
  const std::string text = render_prompt(builtin_template("M1"), p.source_text);
  EXPECT_EQ(text.find("{{"), std::string::npos);
  EXPECT_NE(text.find("```\n" + p.source_text), std::string::npos);
  EXPECT_EQ(text.rfind("Consider the following C program:", 0), 0u);
}

TEST(Prompt, RepairPromptFillsBothPlaceholders)
{
  const program p = support::count_down();
  const std::string annotated = annotate(p, support::cands({"y > 0"}));
  const std::string text = render_prompt(builtin_template("Mr"), annotated, std::string("invariant y > 0: established=no"));
  EXPECT_EQ(text.find("{{"), std::string::npos);
  EXPECT_NE(text.find("loop invariant y > 0;"), std::string::npos);
  EXPECT_NE(text.find("invariant y > 0: established=no"), std::string::npos);
  EXPECT_THROW(render_prompt(builtin_template("Mr"), annotated), missing_placeholder_value);
}

TEST(Prompt, ExtraneousErrorIsDropped)
{
  const std::string text = render_prompt(builtin_template("M2"), "int main(){}", std::string("ERRORTEXT"));
  EXPECT_EQ(text.find("ERRORTEXT"), std::string::npos);
  EXPECT_NE(text.find("int main(){}"), std::string::npos);
}

TEST(Prompt, TemplatesFromFiles)
{
  const std::string path = temp_path("tmpl.txt");
  std::ofstream(path) << "Program:\n{{ code }}\n";
  const prompt_template t = load_template(path);
  EXPECT_FALSE(t.needs_error());
  EXPECT_EQ(render_prompt(t, "X"), "Program:\nX\n");
  std::ofstream(path) << "no placeholder\n";
  EXPECT_THROW(load_template(path), error);
  std::remove(path.c_str());
  EXPECT_TRUE(builtin_template("Mr").needs_error());
  EXPECT_FALSE(builtin_template("M2").needs_error());
}

TEST(Prompt, HashIsFnv1a)
{
  EXPECT_EQ(prompt_hash(""), "cbf29ce484222325");
  EXPECT_EQ(prompt_hash("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(prompt_hash("foobar"), "85944171f73967e8");
}

TEST(Extract, AnnotationBlock)
{
  const candidate_set s = extract_invariants(
    "Here you go:\n```\n/*@\n    loop invariant x+y==n;\n    loop invariant x>=0;\n*/\n```\n");
  EXPECT_EQ(s.sources(), (std::vector<std::string>{"x+y==n", "x>=0"}));
}

TEST(Extract, NoBlockNoCandidates)
{
  EXPECT_TRUE(extract_invariants("I think... no invariants needed").empty());
  EXPECT_TRUE(extract_invariants("loop invariant x >= 0; but no fence").empty());
}

TEST(Extract, ConjunctionsAreSplit)
{
  const candidate_set s = extract_invariants("```\nloop invariant x>=0 && y>=0;\n```");
  EXPECT_EQ(s.sources(), (std::vector<std::string>{"x>=0", "y>=0"}));
  // a disjunction stays whole
  EXPECT_EQ(extract_invariants("```\nloop invariant x == 1 || y < 10;\n```").size(), 1u);
}

TEST(Extract, LastBlockWinsAndDecorationsAreIgnored)
{
  const std::string r = "First try:\n```\nloop invariant a >= 0;\n```\nBetter:\n```c\n//@ loop invariant x >= 0;\n"
                        "//@ loop invariant x <= n;\n```\n";
  EXPECT_EQ(extract_invariants(r).sources(), (std::vector<std::string>{"x >= 0", "x <= n"}));
}

TEST(Extract, KeepsUnparsableClauses)
{
  const candidate_set s = extract_invariants("```\nloop invariant \\at(x, Pre) == 0;\nloop invariant x >= 0;\n```");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_FALSE(s[0].parsed);
  EXPECT_TRUE(s[1].parsed);
}

TEST(Extract, QuantifierBinderSemicolon)
{
  const candidate_set s =
    extract_invariants("```\nloop invariant \\forall integer t; 0 <= t < x ==> t >= 0;\nloop invariant x >= 0;\n```");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].source.rfind("\\forall", 0), 0u);
}

TEST(Extract, RenderedResponsesRoundTrip)
{
  const std::vector<std::string> invs = {"x + y == n", "x >= 0", "i < 1000000 ==> k <= 1000000"};
  EXPECT_EQ(extract_invariants(render_response(invs)).sources(), invs);
}

TEST(Extract, NeverThrowsOnNoise)
{
  std::mt19937_64 rng(5);
  const std::string alphabet = "`loop invariant;&|=<>!()\\/*@ \nxyz0123forall";
  for(int i = 0; i < 2000; ++i)
  {
    std::string s;
    const int n = static_cast<int>(rng() % 120);
    for(int k = 0; k < n; ++k)
      s += alphabet[rng() % alphabet.size()];
    if(rng() % 2)
      s = "```\nloop invariant " + s + "\n```";
    EXPECT_NO_THROW(extract_invariants(s));
  }
}

TEST(Enumerate, CoversTheCountDownInvariants)
{
  const candidate_set all = enumerate_candidates(support::count_down(), 0, 100000);
  for(const char *want : {"x + y == n", "x >= 0", "y >= 0", "n >= y"})
    EXPECT_TRUE(all.contains(parse_invariant(want))) << want;
  for(const auto &c : all)
  {
    ASSERT_TRUE(c.parsed) << c.source;
    for(const auto &v : free_vars(*c.parsed))
      EXPECT_TRUE(v == "x" || v == "y" || v == "n") << c.source;
  }
}

TEST(Enumerate, BudgetSeedAndEdgeCases)
{
  const program p = support::count_down();
  EXPECT_EQ(enumerate_candidates(p, 0, 1).size(), 1u);
  EXPECT_EQ(enumerate_candidates(p, 0, 200).size(), 200u);
  EXPECT_EQ(enumerate_candidates(p, 9, 50).sources(), enumerate_candidates(p, 9, 50).sources());
  const candidate_set a = enumerate_candidates(p, 1, 100000), b = enumerate_candidates(p, 2, 100000);
  EXPECT_EQ(keys_of(a), keys_of(b));
  EXPECT_NE(a.sources(), b.sources());
  const program empty = parse_program("int main(){ while (unknown_int()) { } return 0; }");
  EXPECT_TRUE(enumerate_candidates(empty, 0, 200).empty());
}

TEST(Offline, CompletionsShareTheEnumeration)
{
  const program p = support::count_down();
  offline_provider prov(200);
  generation_config cfg;
  cfg.completions = 4;
  const auto got = generate(prov, builtin_template("M2"), p, cfg, "count_down");
  ASSERT_EQ(got.size(), 4u);
  candidate_set u;
  std::size_t total = 0;
  for(const auto &c : got)
  {
    total += c.extracted.size();
    u.insert_all(c.extracted);
  }
  EXPECT_EQ(total, 200u);
  EXPECT_EQ(u.size(), 200u);
  EXPECT_TRUE(u.contains(parse_invariant("x + y == n")));
  EXPECT_TRUE(u.contains(parse_invariant("x >= 0")));
  EXPECT_EQ(prov.calls(), 4u);
  EXPECT_EQ(prov.network_calls(), 0u);
}

TEST(Offline, FifteenCompletionsByDefault)
{
  offline_provider prov;
  const auto got = generate(prov, builtin_template("M1"), support::count_down(), generation_config{});
  ASSERT_EQ(got.size(), 15u);
  for(std::size_t i = 0; i < got.size(); ++i)
    EXPECT_EQ(got[i].index, i);
}

TEST(Scripted, ServesInOrderThenEmpty)
{
  scripted_provider prov({"```\nloop invariant x >= 0;\n```", "nothing"});
  generation_config cfg;
  cfg.completions = 3;
  const auto got = generate(prov, builtin_template("M2"), support::count_down(), cfg);
  EXPECT_EQ(got[0].extracted.size(), 1u);
  EXPECT_TRUE(got[1].extracted.empty());
  EXPECT_TRUE(got[2].raw.empty());
}

TEST(Replay, RecordedResponsesComeBack)
{
  const std::string log = temp_path("replay.jsonl");
  std::remove(log.c_str());
  const program p = support::count_down();
  generation_config cfg;
  cfg.completions = 3;
  std::vector<completion> first;
  {
    auto rec = std::make_shared<recording_provider>(std::make_shared<offline_provider>(60), log);
    first = generate(*rec, builtin_template("M2"), p, cfg, "cd");
  }
  replay_provider replay(log);
  const auto again = generate(replay, builtin_template("M2"), p, cfg, "cd");
  ASSERT_EQ(again.size(), first.size());
  for(std::size_t i = 0; i < first.size(); ++i)
    EXPECT_EQ(again[i].raw, first[i].raw);
  EXPECT_EQ(replay.network_calls(), 0u);

  // another prompt, another key
  EXPECT_THROW(generate(replay, builtin_template("M1"), p, cfg, "cd"), provider_error);

  std::ifstream in(log);
  std::string line;
  std::getline(in, line);
  const auto j = nlohmann::json::parse(line);
  for(const char *field : {"benchmark", "prompt_hash", "index", "response", "prompt", "requested_at_ms"})
    EXPECT_TRUE(j.contains(field)) << field;
  std::remove(log.c_str());
}

TEST(Http, MissingKeyIsAnAuthError)
{
  ::unsetenv("OPENAI_API_KEY");
  EXPECT_THROW(make_provider("http:openai"), auth_error);
  EXPECT_THROW(make_provider("carrier-pigeon"), error);
}

TEST(Http, TalksToAChatCompletionsEndpoint)
{
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth, seen_model;
  server.Post("/v1/chat/completions", [&](const httplib::Request &req, httplib::Response &res) {
    const int n = ++hits;
    seen_auth = req.get_header_value("Authorization");
    const auto body = nlohmann::json::parse(req.body);
    seen_model = body.at("model").get<std::string>();
    if(n == 1)
    {
      res.status = 503;
      return;
    }
    nlohmann::json out = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "```\nloop invariant x >= 0;\n```"}}}}}}};
    res.set_content(out.dump(), "application/json");
  });
  server.Post("/deny/chat/completions", [](const httplib::Request &, httplib::Response &res) { res.status = 401; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("INVSYNTH_TEST_KEY", "sekret", 1);
  http_endpoint ep;
  ep.name = "local";
  ep.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  ep.api_key_env = "INVSYNTH_TEST_KEY";
  ep.model = "test-model";
  ep.backoff_ms = 1;
  http_provider prov(ep);
  generation_config cfg;
  cfg.completions = 1;
  const auto got = generate(prov, builtin_template("M2"), support::count_down(), cfg);
  EXPECT_EQ(got.at(0).extracted.sources(), (std::vector<std::string>{"x >= 0"}));
  EXPECT_EQ(prov.network_calls(), 2u); // one transient failure, one retry
  EXPECT_EQ(seen_auth, "Bearer sekret");
  EXPECT_EQ(seen_model, "test-model");

  ep.base_url = "http://127.0.0.1:" + std::to_string(port) + "/deny";
  http_provider denied(ep);
  EXPECT_THROW(generate(denied, builtin_template("M2"), support::count_down(), cfg), auth_error);

  server.stop();
  t.join();
  ::unsetenv("INVSYNTH_TEST_KEY");
}
