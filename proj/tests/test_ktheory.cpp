#include "graphk0/graph_io.hpp"
#include "graphk0/ktheory.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace graphk0;

namespace {

Graph parse(const char* text) { return parse_graph_or_throw(text).graph; }

const char* o2 = "vertex v\nedge v v 2\n";
const char* o3 = "vertex v\nedge v v 3\n";
const char* toeplitz = "vertex v\nvertex w\nedge v v\nedge v w\n";
const char* oinf = "vertex v\nedge v v inf\n";
const char* m2 = "vertex v\nvertex w\nedge v w\n";
const char* m3 = "vertex a\nvertex b\nvertex c\nedge a b\nedge b c\n";

Element ints(const K0Presentation& k, long v) {
  Element e = k.coker.zero();
  e.free[0] = v;
  return e;
}

template <class T>
bool is(const MembershipVerdict& v) {
  return std::holds_alternative<T>(v);
}

}  // namespace

TEST(ComputeK0, O2IsTrivial) {
  auto k = compute_k0(parse(o2));
  EXPECT_EQ(k.coker.free_rank(), 0u);
  EXPECT_TRUE(k.coker.torsion_moduli().empty());
  EXPECT_TRUE(is<Member>(cone_membership(k, k.coker.zero(), 10)));
}

TEST(ComputeK0, O3IsZModTwo) {
  auto k = compute_k0(parse(o3));
  EXPECT_EQ(k.coker.torsion_moduli(), IntVec{2});
  EXPECT_EQ(k.delta[0].torsion, IntVec{1});
  Element one = k.coker.zero();
  one.torsion[0] = 1;
  EXPECT_TRUE(is<Member>(cone_membership(k, one, 100)));
  EXPECT_TRUE(is<Member>(cone_membership(k, k.coker.zero(), 100)));
}

TEST(ComputeK0, Toeplitz) {
  auto k = compute_k0(parse(toeplitz));
  ASSERT_EQ(k.coker.free_rank(), 1u);
  EXPECT_EQ(k.delta[0].free, IntVec{1});
  EXPECT_EQ(k.delta[1].free, IntVec{0});
  EXPECT_EQ(k.order_unit.free, IntVec{1});
  EXPECT_TRUE(k.cone.families.empty());
  EXPECT_TRUE(k.row_finite_orthant);
}

TEST(ComputeK0, InfiniteLoop) {
  auto k = compute_k0(parse(oinf));
  ASSERT_EQ(k.coker.free_rank(), 1u);
  EXPECT_EQ(abs(k.delta[0].free[0]), 1);
  ASSERT_EQ(k.cone.families.size(), 1u);
  ASSERT_EQ(k.cone.families[0].targets.size(), 1u);
  EXPECT_FALSE(k.cone.families[0].targets[0].capacity.has_value());
  EXPECT_FALSE(k.row_finite_orthant);
}

TEST(ComputeK0, CapacitiesFollowMultiplicities) {
  auto k = compute_k0(parse("vertex u\nvertex v\nvertex w\nedge u v 2\nedge u w inf\nedge u u 1\n"));
  ASSERT_EQ(k.cone.families.size(), 1u);
  const auto& t = k.cone.families[0].targets;
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(*t[0].capacity, 1);
  EXPECT_EQ(*t[1].capacity, 2);
  EXPECT_FALSE(t[2].capacity.has_value());
}

TEST(ComputeK0RowFinite, LineGraphs) {
  auto k = compute_k0_row_finite(parse(m3));
  ASSERT_EQ(k.coker.free_rank(), 1u);
  for (const auto& d : k.delta) EXPECT_EQ(d, k.delta[0]);
  EXPECT_EQ(k.order_unit, k.coker.scale(k.delta[0], 3));
  auto k2 = compute_k0_row_finite(parse(m2));
  EXPECT_EQ(k2.order_unit, k2.coker.scale(k2.delta[0], 2));
  EXPECT_THROW(compute_k0_row_finite(parse(oinf)), std::invalid_argument);
}

TEST(ComputeK0, RegularVertexRelationsHold) {
  std::mt19937 rng(13);
  oracle::RandomGraphOptions opt;
  opt.infinite_probability = 0.2;
  for (int i = 0; i < 150; ++i) {
    auto g = oracle::random_graph(rng, opt);
    auto k = compute_k0(g);
    Element unit = k.coker.zero();
    for (std::size_t v = 0; v < g.size(); ++v) {
      unit = k.coker.add(unit, k.delta[v]);
      if (classify_vertex(g, v) != VertexClass::Regular) continue;
      Element sum = k.coker.zero();
      for (const auto& [w, m] : g.out_edges(v)) sum = k.coker.add(sum, k.coker.scale(k.delta[w], m.count()));
      EXPECT_EQ(sum, k.delta[v]);
    }
    EXPECT_EQ(unit, k.order_unit);
    std::size_t emitters = 0;
    for (std::size_t v = 0; v < g.size(); ++v) emitters += classify_vertex(g, v) == VertexClass::InfiniteEmitter;
    EXPECT_EQ(k.cone.families.size(), emitters);
    if (predicates(g).row_finite) {
      auto r = compute_k0_row_finite(g);
      EXPECT_EQ(r.coker.free_rank(), k.coker.free_rank());
      EXPECT_EQ(r.coker.torsion_moduli(), k.coker.torsion_moduli());
      EXPECT_EQ(r.delta, k.delta);
    }
  }
}

TEST(ConeMembership, ToeplitzExamples) {
  auto k = compute_k0(parse(toeplitz));
  auto zero = cone_membership(k, k.coker.zero(), 10);
  ASSERT_TRUE(is<Member>(zero));
  auto neg = cone_membership(k, ints(k, -1), 100);
  ASSERT_TRUE(is<NotMember>(neg));
  const auto& f = std::get<NotMember>(neg).functional;
  ASSERT_TRUE(f.has_value());
  EXPECT_EQ(f->values, (RatVec{Rat(1), Rat(0)}));
  EXPECT_TRUE(verify_membership(k, ints(k, -1), neg));
  EXPECT_TRUE(is<Member>(cone_membership(k, ints(k, 4), 100)));
}

TEST(ConeMembership, InfiniteLoopNegativeElement) {
  auto k = compute_k0(parse(oinf));
  Element x = k.coker.scale(k.delta[0], -5);
  auto v = cone_membership(k, x, 1000);
  ASSERT_TRUE(is<Member>(v));
  const auto& w = std::get<Member>(v).witness;
  ASSERT_EQ(w.family_uses.size(), 1u);
  EXPECT_EQ(w.family_uses[0].count - w.family_uses[0].removed[0] + w.base_uses[0], -5);
  EXPECT_TRUE(verify_membership(k, x, v));
}

TEST(ConeMembership, M2One) {
  auto k = compute_k0(parse(m2));
  auto v = cone_membership(k, k.delta[1], 100);
  ASSERT_TRUE(is<Member>(v));
  EXPECT_TRUE(verify_membership(k, k.delta[1], v));
}

TEST(ConeMembership, Errors) {
  auto k = compute_k0(parse(toeplitz));
  EXPECT_THROW(cone_membership(k, Element{}, 10), std::invalid_argument);
  EXPECT_THROW(cone_membership(k, ints(k, 1), 0), std::invalid_argument);
}

TEST(ConeMembership, EmitterWithSinkTarget) {
  // v -> w infinitely often: the cone is {a[v] + b[w] : a >= 1 or (a = 0, b >= 0)}.
  auto k = compute_k0(parse("vertex v\nvertex w\nedge v w inf\n"));
  auto elem = [&](long a, long b) {
    return k.coker.add(k.coker.scale(k.delta[0], a), k.coker.scale(k.delta[1], b));
  };
  EXPECT_TRUE(is<Member>(cone_membership(k, elem(1, -7), 1000)));
  EXPECT_TRUE(is<Member>(cone_membership(k, elem(0, 3), 1000)));
  auto neg = cone_membership(k, elem(0, -1), 1000);
  EXPECT_TRUE(is<NotMember>(neg));
  EXPECT_TRUE(verify_membership(k, elem(0, -1), neg));
  EXPECT_TRUE(is<NotMember>(cone_membership(k, elem(-1, 5), 1000)));
}

TEST(ConeMembership, FiniteCapacityFamily) {
  // u emits infinitely to itself is avoided; u -> a (2 edges), u -> b (inf), b sink, a sink.
  auto k = compute_k0(parse("vertex u\nvertex a\nvertex b\nedge u a 2\nedge u b inf\n"));
  auto elem = [&](long x, long y, long z) {
    return k.coker.project(k.ambient_from_vertices(IntVec{x, y, z}));
  };
  EXPECT_TRUE(is<Member>(cone_membership(k, elem(1, -2, -9), 1000)));
  EXPECT_TRUE(is<Member>(cone_membership(k, elem(2, -4, 0), 1000)));
  auto over = cone_membership(k, elem(1, -3, 0), 1000);
  EXPECT_TRUE(is<NotMember>(over));
  EXPECT_TRUE(verify_membership(k, elem(1, -3, 0), over));
}

TEST(ConeMembership, TamperedCertificatesAreRejected) {
  auto k = compute_k0(parse(toeplitz));
  MembershipWitness w;
  w.base_uses = {Int(2), Int(0)};
  EXPECT_TRUE(verify_membership(k, ints(k, 2), Member{w}));
  EXPECT_FALSE(verify_membership(k, ints(k, 3), Member{w}));
  w.base_uses = {Int(-1), Int(0)};
  EXPECT_FALSE(verify_membership(k, ints(k, -1), Member{w}));
  SeparatingFunctional bad{{Rat(-1), Rat(0)}};
  EXPECT_FALSE(verify_membership(k, ints(k, 1), NotMember{bad, "tampered"}));
  SeparatingFunctional not_invariant{{Rat(1), Rat(1)}};
  EXPECT_FALSE(verify_membership(k, ints(k, -1), NotMember{not_invariant, "tampered"}));
}

// Membership against exhaustive enumeration of sums of vertex classes.
TEST(ConeMembership, AgreesWithSemigroupEnumeration) {
  std::mt19937 rng(19);
  oracle::RandomGraphOptions opt;
  opt.max_vertices = 3;
  for (int i = 0; i < 30; ++i) {
    auto g = oracle::random_graph(rng, opt);
    auto k = compute_k0(g);
    auto reachable = oracle::semigroup_elements(k, 10);
    const std::size_t n = g.size();
    IntVec x(n, Int(-3));
    for (;;) {
      auto e = k.coker.project(k.ambient_from_vertices(x));
      auto v = cone_membership(k, e, 100000);
      EXPECT_TRUE(verify_membership(k, e, v));
      if (reachable.count(e)) EXPECT_TRUE(is<Member>(v)) << serialize_graph(g);
      std::size_t c = 0;
      while (c < n && x[c] == 3) x[c++] = -3;
      if (c == n) break;
      x[c] += 1;
    }
  }
}

TEST(ConeMembership, ZeroIsAlwaysMember) {
  std::mt19937 rng(29);
  oracle::RandomGraphOptions opt;
  opt.infinite_probability = 0.3;
  for (int i = 0; i < 50; ++i) {
    auto k = compute_k0(oracle::random_graph(rng, opt));
    auto v = cone_membership(k, k.coker.zero(), 1);
    ASSERT_TRUE(is<Member>(v));
    EXPECT_TRUE(std::get<Member>(v).witness.family_uses.empty());
  }
}

TEST(OrderProperties, Examples) {
  auto inf = order_properties(compute_k0(parse(oinf)), 1000);
  EXPECT_EQ(inf.cone_is_everything, Tristate::Yes);
  EXPECT_EQ(inf.cone_pointed, Tristate::No);
  auto t = order_properties(compute_k0(parse(toeplitz)), 1000);
  EXPECT_EQ(t.cone_is_everything, Tristate::No);
  EXPECT_EQ(t.cone_pointed, Tristate::Yes);
  ASSERT_TRUE(t.pointed_functional.has_value());
  auto o2p = order_properties(compute_k0(parse(o2)), 1000);
  EXPECT_EQ(o2p.cone_is_everything, Tristate::Yes);
  EXPECT_EQ(o2p.cone_pointed, Tristate::Yes);
  auto o3p = order_properties(compute_k0(parse(o3)), 1000);
  EXPECT_EQ(o3p.cone_is_everything, Tristate::Yes);
  EXPECT_EQ(o3p.cone_pointed, Tristate::No);
}

TEST(OrderProperties, LineWithMultipleEdges) {
  auto k = compute_k0(parse("vertex a\nvertex b\nvertex c\nedge a c 2\nedge b c 3\n"));
  ASSERT_EQ(k.coker.free_rank(), 1u);
  auto p = order_properties(k, 1000);
  EXPECT_EQ(p.cone_is_everything, Tristate::No);
}

TEST(CompareK0, Examples) {
  CompareOptions plain, unit;
  unit.use_order_unit = true;
  auto a = compute_k0(parse(o2)), b = compute_k0(parse(o3));
  EXPECT_TRUE(std::holds_alternative<NotIsomorphic>(compare_k0(a, b, plain, 1000)));
  auto c = compute_k0(parse(m2)), d = compute_k0(parse(m3));
  EXPECT_TRUE(std::holds_alternative<NotIsomorphic>(compare_k0(c, d, unit, 1000)));
  auto v = compare_k0(c, d, plain, 1000);
  ASSERT_TRUE(std::holds_alternative<IsomorphicCandidate>(v));
  const auto& map = std::get<IsomorphicCandidate>(v).map;
  EXPECT_EQ(apply_map(d.coker, map, c.delta[0]), d.delta[0]);
}

TEST(CompareK0, DistinguishesConesOnSameGroup) {
  CompareOptions plain;
  auto toe = compute_k0(parse(toeplitz));
  auto inf = compute_k0(parse(oinf));
  EXPECT_TRUE(std::holds_alternative<NotIsomorphic>(compare_k0(toe, inf, plain, 1000)));
}

TEST(CompareK0, TorsionAutomorphismsAreFound) {
  // Z/4 with order units 1 and 3 respectively.
  auto a = compute_k0(parse("vertex v\nedge v v 5\n"));
  auto b = compute_k0(parse("vertex v\nvertex u\nedge v v 5\nedge u v 2\n"));
  ASSERT_TRUE(a.coker.same_group(b.coker));
  CompareOptions unit;
  unit.use_order_unit = true;
  auto v = compare_k0(a, b, unit, 10000);
  ASSERT_TRUE(std::holds_alternative<IsomorphicCandidate>(v));
  const auto& c = std::get<IsomorphicCandidate>(v);
  EXPECT_EQ(apply_map(b.coker, c.map, a.order_unit), b.order_unit);
  EXPECT_EQ(apply_map(a.coker, c.inverse, b.order_unit), a.order_unit);
}

TEST(CompareK0, SymmetricVerdictClass) {
  std::mt19937 rng(37);
  oracle::RandomGraphOptions opt;
  opt.max_vertices = 3;
  opt.infinite_probability = 0.15;
  CompareOptions plain;
  for (int i = 0; i < 40; ++i) {
    auto a = compute_k0(oracle::random_graph(rng, opt));
    auto b = compute_k0(oracle::random_graph(rng, opt));
    auto ab = compare_k0(a, b, plain, 2000);
    auto ba = compare_k0(b, a, plain, 2000);
    EXPECT_EQ(std::holds_alternative<NotIsomorphic>(ab), std::holds_alternative<NotIsomorphic>(ba));
    if (auto* c = std::get_if<IsomorphicCandidate>(&ab)) {
      for (const auto& d : a.delta) EXPECT_EQ(apply_map(a.coker, c->inverse, apply_map(b.coker, c->map, d)), d);
    }
  }
}

TEST(Consistency, Examples) {
  auto r = verify_desingularization_consistency(parse("vertex v\nvertex a\nvertex b\nedge v a\nedge v b inf\n"), 2);
  EXPECT_TRUE(r.groups_match);
  EXPECT_TRUE(r.generator_correspondence_ok);
  EXPECT_TRUE(r.cone_prefix_ok);
  auto k = compute_k0(parse("vertex v\nvertex a\nvertex b\nedge v a\nedge v b inf\n"));
  EXPECT_EQ(k.coker.free_rank(), 3u);
  auto s = verify_desingularization_consistency(parse(oinf), 3);
  EXPECT_TRUE(s.groups_match && s.generator_correspondence_ok && s.cone_prefix_ok);
  EXPECT_EQ(s.tail_classes_checked, 3u);
  auto t = verify_desingularization_consistency(parse(o2), 4);
  EXPECT_TRUE(t.groups_match && t.generator_correspondence_ok && t.cone_prefix_ok);
  EXPECT_THROW(verify_desingularization_consistency(parse(o2), 0), std::invalid_argument);
}

TEST(Consistency, InvariantUnderVertexPermutation) {
  std::mt19937 rng(43);
  oracle::RandomGraphOptions opt;
  opt.max_vertices = 4;
  opt.infinite_probability = 0.3;
  opt.require_infinite = true;
  for (int i = 0; i < 25; ++i) {
    auto g = oracle::random_graph(rng, opt);
    std::vector<std::size_t> perm(g.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto h = oracle::permuted(g, perm);
    auto kg = compute_k0(g), kh = compute_k0(h);
    EXPECT_TRUE(kg.coker.same_group(kh.coker));
    for (std::size_t depth = 1; depth <= 3; ++depth) {
      auto rg = verify_desingularization_consistency(g, depth);
      auto rh = verify_desingularization_consistency(h, depth);
      EXPECT_TRUE(rg.groups_match && rg.generator_correspondence_ok && rg.cone_prefix_ok);
      EXPECT_EQ(rg.groups_match, rh.groups_match);
      EXPECT_EQ(rg.generator_correspondence_ok, rh.generator_correspondence_ok);
      EXPECT_EQ(rg.cone_prefix_ok, rh.cone_prefix_ok);
    }
  }
}
