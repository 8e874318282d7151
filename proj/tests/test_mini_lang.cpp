#include "gen.hpp"
#include "support.hpp"

#include <invsynth/eval.hpp>
#include <invsynth/printer.hpp>

#include <gtest/gtest.h>

using namespace invsynth;

namespace {

std::vector<std::string> printed(const std::vector<expr> &es)
{
  std::vector<std::string> out;
  for(const auto &e : es)
    out.push_back(to_string(e));
  return out;
}

} // namespace

TEST(Parse, CountDownProgram)
{
  const program p = support::count_down();
  EXPECT_EQ(printed(p.pre), (std::vector<std::string>{"n >= 0", "x == n", "y == 0"}));
  EXPECT_EQ(to_string(p.loop_guard), "x > 0");
  ASSERT_EQ(p.post.size(), 1u);
  EXPECT_EQ(to_string(p.post[0].formula), "y == n");
  EXPECT_EQ(p.loop_head_vars(), (std::vector<std::string>{"n", "x", "y"}));
}

TEST(Parse, NoLoopIsUnsupported)
{
  try
  {
    parse_program("int main(){ return 0; }");
    FAIL() << "expected unsupported_feature";
  }
  catch(const unsupported_feature &e)
  {
    EXPECT_EQ(e.construct(), "no loop");
  }
}

TEST(Parse, OtherUnsupportedConstructs)
{
  EXPECT_THROW(parse_program("int main(){ int a[3]; while(1){} }"), unsupported_feature);
  EXPECT_THROW(parse_program("int main(){ int x=0; while(x<3){x++;} while(x>0){x--;} }"), unsupported_feature);
  EXPECT_THROW(parse_program("int main(){ int *p; while(1){} }"), unsupported_feature);
  EXPECT_THROW(parse_program("int main(){ int x = 0; while(x < 3 { x++; } }"), syntax_error);
}

TEST(Parse, BoundedStepsHasHavocAndGuardedReturn)
{
  const program p = support::bounded_steps();
  ASSERT_EQ(p.post.size(), 1u);
  EXPECT_EQ(to_string(p.post[0].formula), "k <= 1000000");
  ASSERT_FALSE(p.loop_body.children.empty());
  EXPECT_EQ(p.loop_body.children[0].kind, stmt_kind::havoc);
  EXPECT_EQ(p.loop_body.children[0].target, "j");
  bool guarded_return = false;
  for(const auto &s : p.loop_body.children)
    if(s.kind == stmt_kind::if_else && !s.children[0].children.empty() &&
       s.children[0].children[0].kind == stmt_kind::return_)
      guarded_return = true;
  EXPECT_TRUE(guarded_return);
  // j is declared in the body and is not visible at the loop head
  EXPECT_EQ(p.loop_head_vars(), (std::vector<std::string>{"i", "k"}));
}

TEST(Parse, Invariants)
{
  const candidate sum = parse_invariant("x + y == n");
  ASSERT_TRUE(sum.parsed);
  EXPECT_EQ(*sum.parsed, binary(expr_kind::eq, var("x") + var("y"), var("n")));

  const candidate imp = parse_invariant("x >= 0 ==> y <= n");
  ASSERT_TRUE(imp.parsed);
  EXPECT_EQ(imp.parsed->kind(), expr_kind::implies);

  const candidate at = parse_invariant("\\at(x, Pre) == 0");
  EXPECT_FALSE(at.parsed);
  EXPECT_EQ(at.source, "\\at(x, Pre) == 0");
  EXPECT_FALSE(at.parse_error.empty());

  // quantifiers only ever come from havoc, never from invariant text
  const candidate q = parse_invariant("\\forall integer t; 0 <= t ==> t + x >= x");
  EXPECT_FALSE(q.parsed);
}

TEST(Parse, ExpressionSyntax)
{
  EXPECT_EQ(to_string(parse_expression("(x+1)*2 - y % 3 > 0")), "(x + 1) * 2 - y % 3 > 0");
  EXPECT_EQ(to_string(parse_expression("x - y")), "x - y != 0");
  EXPECT_EQ(to_string(parse_expression("0 <= y && y <= 9")), "0 <= y && y <= 9");
  EXPECT_EQ(to_string(parse_expression("\\true")), "\\true");
  EXPECT_THROW(parse_expression("x ++ y == n"), syntax_error);
}

TEST(CandidateSet, DeduplicatesOnNormalizedText)
{
  candidate_set s;
  EXPECT_TRUE(s.insert(parse_invariant("x+y==n", 0)));
  EXPECT_FALSE(s.insert(parse_invariant("x + y  ==  n", 1)));
  EXPECT_TRUE(s.insert(parse_invariant("x >= 0", 2)));
  EXPECT_TRUE(s.insert(parse_invariant("x ++ y", 3)));
  EXPECT_FALSE(s.insert(parse_invariant("x  ++ y", 4)));
  EXPECT_EQ(s.size(), 3u);
  s.remove(support::cands({"x >= 0"}));
  EXPECT_EQ(s.sources(), (std::vector<std::string>{"x+y==n", "x ++ y"}));
}

TEST(Annotate, ListsCandidatesInOrderBeforeTheLoop)
{
  const program p = support::count_down();
  const std::string text = annotate(p, support::cands({"x + y == n", "x >= 0"}));
  const auto a = text.find("loop invariant x + y == n;");
  const auto b = text.find("loop invariant x >= 0;");
  const auto loop = text.find("while");
  ASSERT_NE(a, std::string::npos);
  ASSERT_NE(b, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_LT(b, loop);
}

TEST(Annotate, EmptySetKeepsTheProgram)
{
  const program p = support::count_down();
  const std::string text = annotate(p, {});
  EXPECT_NE(text.find("/*@"), std::string::npos);
  EXPECT_EQ(text.find("loop invariant"), std::string::npos);
  const annotated_program back = parse_annotated(text);
  EXPECT_EQ(back.prog, p);
  EXPECT_TRUE(back.candidates.empty());
}

TEST(Annotate, RoundTrip)
{
  for(const char *name : {"count_down_signed.c", "count_down.c", "bounded_steps.c",
                          "garbage_y.c", "two_phases.c"})
  {
    const program p = parse_program(support::exemplar(name));
    const candidate_set cs = support::cands({"x + y == n", "x >= 0 ==> y <= n", "\\at(x, Pre) == 0"});
    const annotated_program back = parse_annotated(annotate(p, cs));
    EXPECT_EQ(back.prog, p) << name;
    EXPECT_EQ(back.candidates.sources(), cs.sources()) << name;
    // annotating again replaces the block instead of adding one
    const std::string twice = annotate(back.prog, support::cands({"x >= 0"}));
    EXPECT_EQ(parse_annotated(twice).candidates.sources(), (std::vector<std::string>{"x >= 0"})) << name;
  }
}

TEST(PrettyPrint, RandomProgramsRoundTrip)
{
  gen::generator g(7);
  gen::generator::stmt_options o;
  o.jumps = true;
  o.asserts = true;
  o.division = true;
  for(int i = 0; i < 200; ++i)
  {
    const program p = g.program(o);
    const std::string text = pretty_print(p);
    program back;
    ASSERT_NO_THROW(back = parse_program(text)) << text;
    EXPECT_EQ(back, p) << text;
    EXPECT_EQ(pretty_print(back), text);
  }
}

TEST(Eval, EuclideanAndWrapping)
{
  eval_options unbounded;
  const expr minus7 = int_const(-7), two = int_const(2);
  EXPECT_EQ(evaluate_int(binary(expr_kind::div, minus7, two), {}, unbounded), -4);
  EXPECT_EQ(evaluate_int(binary(expr_kind::mod, minus7, two), {}, unbounded), 1);
  EXPECT_EQ(evaluate_bool(parse_expression("-7 / 2 == -4 && -7 % 2 == 1"), {}, unbounded), true);
  EXPECT_EQ(evaluate_int(binary(expr_kind::div, var("x"), var("y")), {{"x", 1}, {"y", 0}}, unbounded), std::nullopt);
  EXPECT_THROW(parse_expression("x / 0 == 1"), syntax_error);
  eval_options wrap;
  wrap.semantics = int_semantics::wrap32;
  EXPECT_EQ(evaluate_int(binary(expr_kind::div, minus7, two), {}, wrap), -3);
  EXPECT_EQ(evaluate_int(var("x") + int_const(1), {{"x", 2147483647}}, wrap), -2147483648LL);
}

TEST(Explore, CountDownReachesOnlyConsistentStates)
{
  bounded_options o;
  o.low = -6;
  o.high = 6;
  const exploration_result r = explore_bounded(support::count_down(), o);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_FALSE(r.loop_head_states.empty());
  for(const auto &s : r.loop_head_states)
  {
    EXPECT_EQ(s.at("x") + s.at("y"), s.at("n"));
    EXPECT_GE(s.at("x"), 0);
  }
}

TEST(Explore, FindsAssertionViolation)
{
  const program p = parse_program("int main(){ int x = 0; while (x < 3) { x++; } assert(x == 4); return 0; }");
  const exploration_result r = explore_bounded(p, {});
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].state.at("x"), 3);
}
