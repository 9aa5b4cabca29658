#include "graphk0/polyhedra.hpp"
#include "graphk0/rational_lp.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace graphk0;

TEST(EnumerateVertices, ProbabilitySimplex) {
  NonnegPolyhedron p;
  p.dim = 3;
  p.eq_lhs = {{1, 1, 1}};
  p.eq_rhs = {1};
  auto rep = enumerate_vertices(p);
  ASSERT_TRUE(rep.has_value());
  EXPECT_EQ(rep->vertices, (std::vector<RatVec>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  EXPECT_TRUE(rep->rays.empty());
}

TEST(EnumerateVertices, UnboundedRegion) {
  // x - y <= 1 in the orthant: vertices (0,0), (1,0); rays (1,1), (0,1).
  NonnegPolyhedron p;
  p.dim = 2;
  p.ineq_lhs = {{1, -1}};
  p.ineq_rhs = {1};
  auto rep = enumerate_vertices(p);
  ASSERT_TRUE(rep.has_value());
  EXPECT_EQ(rep->vertices, (std::vector<RatVec>{{1, 0}, {0, 0}}));
  EXPECT_EQ(rep->rays, (std::vector<IntVec>{{1, 1}, {0, 1}}));
}

TEST(EnumerateVertices, EmptyPolyhedron) {
  NonnegPolyhedron p;
  p.dim = 1;
  p.eq_lhs = {{1}};
  p.eq_rhs = {-1};
  auto rep = enumerate_vertices(p);
  ASSERT_TRUE(rep.has_value());
  EXPECT_TRUE(rep->vertices.empty());
}

TEST(EnumerateVertices, RationalVertex) {
  NonnegPolyhedron p;
  p.dim = 2;
  p.eq_lhs = {{2, 1}, {1, 3}};
  p.eq_rhs = {1, 1};
  auto rep = enumerate_vertices(p);
  ASSERT_TRUE(rep.has_value());
  EXPECT_EQ(rep->vertices, (std::vector<RatVec>{{Rat(2, 5), Rat(1, 5)}}));
}

// Every vertex is feasible and has at least dim tight constraints; every
// LP optimum in random directions is attained at a listed vertex.
TEST(EnumerateVertices, RandomBoundedPolytopes) {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> coef(-3, 3), dim(1, 4), rows(0, 3);
  for (int i = 0; i < 150; ++i) {
    NonnegPolyhedron p;
    p.dim = dim(rng);
    p.eq_lhs.push_back(RatVec(p.dim, Rat(1)));
    p.eq_rhs.push_back(1);
    for (int r = rows(rng); r > 0; --r) {
      RatVec row(p.dim);
      for (auto& x : row) x = coef(rng);
      p.ineq_lhs.push_back(row);
      p.ineq_rhs.push_back(coef(rng) + 1);
    }
    auto rep = enumerate_vertices(p);
    ASSERT_TRUE(rep.has_value());
    LpProblem lp;
    lp.num_vars = p.dim;
    lp.nonnegative.assign(p.dim, true);
    for (std::size_t r = 0; r < p.eq_lhs.size(); ++r) lp.add(p.eq_lhs[r], Relation::Equal, p.eq_rhs[r]);
    for (std::size_t r = 0; r < p.ineq_lhs.size(); ++r) lp.add(p.ineq_lhs[r], Relation::LessEqual, p.ineq_rhs[r]);
    for (const auto& v : rep->vertices) {
      EXPECT_TRUE(satisfies(lp, v));
      std::size_t tight = p.eq_lhs.size();
      for (const auto& x : v) tight += sgn(x) == 0;
      for (std::size_t r = 0; r < p.ineq_lhs.size(); ++r) tight += dot(p.ineq_lhs[r], v) == p.ineq_rhs[r];
      EXPECT_GE(tight, p.dim);
    }
    RatVec c(p.dim);
    for (auto& x : c) x = coef(rng);
    lp.objective = c;
    auto r = rational_lp(lp);
    if (auto* f = std::get_if<LpFeasible>(&r)) {
      ASSERT_FALSE(rep->vertices.empty());
      Rat best = dot(c, rep->vertices[0]);
      for (const auto& v : rep->vertices) best = std::max(best, dot(c, v));
      EXPECT_EQ(best, *f->objective_value);
    } else {
      EXPECT_TRUE(rep->vertices.empty());
    }
  }
}
