#include "graphk0/graph_io.hpp"
#include "graphk0/traces.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace graphk0;

namespace {

Graph parse(const char* text) { return parse_graph_or_throw(text).graph; }

const char* o2 = "vertex v\nedge v v 2\n";
const char* toeplitz = "vertex v\nvertex w\nedge v v\nedge v w\n";
const char* oinf = "vertex v\nedge v v inf\n";
const char* m2 = "vertex v\nvertex w\nedge v w\n";

}  // namespace

TEST(TraceConstraints, M2) {
  auto p = trace_constraints(parse(m2));
  ASSERT_EQ(p.equalities.size(), 2u);
  EXPECT_EQ(p.equalities[0], (RatVec{1, -1}));
  EXPECT_EQ(p.equalities[1], (RatVec{1, 1}));
  EXPECT_EQ(p.equality_rhs, (RatVec{0, 1}));
  EXPECT_TRUE(p.inequalities.empty());
}

TEST(TraceConstraints, InfiniteLoopForcesZero) {
  auto p = trace_constraints(parse(oinf));
  EXPECT_EQ(p.forced_zero, std::vector<std::size_t>{0});
  EXPECT_TRUE(std::holds_alternative<NoTrace>(find_graph_trace(parse(oinf))));
}

TEST(TraceConstraints, SingleSink) {
  auto p = trace_constraints(parse("vertex w\n"));
  ASSERT_EQ(p.equalities.size(), 1u);
  EXPECT_EQ(p.equalities[0], RatVec{1});
}

TEST(FindGraphTrace, Examples) {
  auto none = find_graph_trace(parse(o2));
  ASSERT_TRUE(std::holds_alternative<NoTrace>(none));
  const auto& nt = std::get<NoTrace>(none);
  EXPECT_TRUE(verify_farkas(nt.problem, nt.certificate));
  auto m = find_graph_trace(parse(m2));
  ASSERT_TRUE(std::holds_alternative<GraphTrace>(m));
  EXPECT_EQ(std::get<GraphTrace>(m).values, (RatVec{Rat(1, 2), Rat(1, 2)}));
  auto t = find_graph_trace(parse(toeplitz));
  ASSERT_TRUE(std::holds_alternative<GraphTrace>(t));
  EXPECT_EQ(std::get<GraphTrace>(t).values, (RatVec{1, 0}));
}

TEST(ExtremeTraces, Examples) {
  auto two = extreme_traces(parse("vertex a\nvertex b\n"));
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].values, (RatVec{1, 0}));
  EXPECT_EQ(two[1].values, (RatVec{0, 1}));
  auto m = extreme_traces(parse(m2));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].values, (RatVec{Rat(1, 2), Rat(1, 2)}));
  auto loop = extreme_traces(parse("vertex v\nedge v v\n"));
  ASSERT_EQ(loop.size(), 1u);
  EXPECT_EQ(loop[0].values, RatVec{1});
  EXPECT_TRUE(extreme_traces(parse(o2)).empty());
}

TEST(ExtremeTraces, EmitterInequality) {
  // u -> a twice (finite), u -> b infinitely: g(b) = 0, g(u) >= 2 g(a).
  auto t = extreme_traces(parse("vertex u\nvertex a\nvertex b\nedge u a 2\nedge u b inf\n"));
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].values, (RatVec{1, 0, 0}));
  EXPECT_EQ(t[1].values, (RatVec{Rat(2, 3), Rat(1, 3), 0}));
}

TEST(ExtremeTraces, RandomGraphsVerifyAndMatchFeasibility) {
  std::mt19937 rng(61);
  oracle::RandomGraphOptions opt;
  opt.infinite_probability = 0.2;
  for (int i = 0; i < 100; ++i) {
    auto g = oracle::random_graph(rng, opt);
    auto extremes = extreme_traces(g);
    auto any = find_graph_trace(g);
    EXPECT_EQ(extremes.empty(), std::holds_alternative<NoTrace>(any));
    if (auto* nt = std::get_if<NoTrace>(&any)) EXPECT_TRUE(verify_farkas(nt->problem, nt->certificate));
    auto p = trace_constraints(g);
    for (const auto& t : extremes) {
      EXPECT_TRUE(is_graph_trace(g, t));
      EXPECT_EQ(t.norm, 1);
      std::size_t tight = p.equalities.size();
      for (const auto& x : t.values) tight += sgn(x) == 0;
      for (const auto& row : p.inequalities) {
        Rat s = 0;
        for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * t.values[j];
        tight += sgn(s) == 0;
      }
      EXPECT_GE(tight, g.size());
    }
    for (std::size_t j = 1; j < extremes.size(); ++j) EXPECT_GT(extremes[j - 1].values, extremes[j].values);
  }
}

TEST(TraceState, NamedExamples) {
  auto g = parse(m2);
  auto k = compute_k0(g);
  auto s = trace_to_state(g, k, GraphTrace{{Rat(1, 2), Rat(1, 2)}, 1});
  EXPECT_EQ(evaluate(s, k.delta[0]), Rat(1, 2));
  EXPECT_EQ(evaluate(s, k.order_unit), 1);
  EXPECT_EQ(state_to_trace(g, k, s).values, (RatVec{Rat(1, 2), Rat(1, 2)}));

  auto t = parse(toeplitz);
  auto kt = compute_k0(t);
  auto st = trace_to_state(t, kt, GraphTrace{{1, 0}, 1});
  EXPECT_EQ(st.values_on_delta, (RatVec{1, 0}));
  EXPECT_EQ(state_to_trace(t, kt, st).values, (RatVec{1, 0}));
}

TEST(TraceState, RejectsInvalidInput) {
  auto g = parse(m2);
  auto k = compute_k0(g);
  EXPECT_THROW(trace_to_state(g, k, GraphTrace{{1, 0}, 1}), std::invalid_argument);
  EXPECT_THROW(trace_to_state(g, k, GraphTrace{{1, 1}, 2}), std::invalid_argument);
  StateOnK0 bad{{Rat(1)}, {Rat(1), Rat(1)}};
  EXPECT_THROW(state_to_trace(g, k, bad), std::invalid_argument);
}

TEST(TraceState, RoundTripAndPositivityOnRandomGraphs) {
  std::mt19937 rng(67);
  oracle::RandomGraphOptions opt;
  opt.infinite_probability = 0.25;
  for (int i = 0; i < 100; ++i) {
    auto g = oracle::random_graph(rng, opt);
    auto k = compute_k0(g);
    for (const auto& t : extreme_traces(g)) {
      auto s = trace_to_state(g, k, t);
      EXPECT_TRUE(is_state(k, s));
      for (const auto& d : k.cone.base) EXPECT_GE(evaluate(s, d), 0);
      for (const auto& fam : k.cone.families) {
        Rat slack = s.values_on_delta[fam.emitter];
        for (const auto& target : fam.targets) {
          if (target.capacity) slack -= Rat(*target.capacity) * s.values_on_delta[target.vertex];
          else EXPECT_EQ(s.values_on_delta[target.vertex], 0);
        }
        EXPECT_GE(slack, 0);
      }
      auto back = state_to_trace(g, k, s);
      EXPECT_EQ(back.values, t.values);
      EXPECT_EQ(trace_to_state(g, k, back).functional, s.functional);
    }
  }
}

TEST(TracialStateReport, Examples) {
  auto o = tracial_state_report(parse(o2));
  EXPECT_TRUE(o.condition_k);
  EXPECT_EQ(o.identification, "canonical");
  EXPECT_EQ(o.trace_count, TraceCount::None);
  auto t = tracial_state_report(parse(toeplitz));
  EXPECT_FALSE(t.condition_k);
  EXPECT_EQ(t.identification, "states-only");
  EXPECT_EQ(t.trace_count, TraceCount::Finite);
  EXPECT_EQ(t.finite_count, 1u);
  auto two = tracial_state_report(parse("vertex a\nvertex b\n"));
  EXPECT_TRUE(two.condition_k);
  EXPECT_EQ(two.trace_count, TraceCount::Infinite);
}
