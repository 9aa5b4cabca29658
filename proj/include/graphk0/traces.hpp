#pragma once

#include "graphk0/graph.hpp"
#include "graphk0/ktheory.hpp"
#include "graphk0/polyhedra.hpp"
#include "graphk0/rational_lp.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace graphk0 {

struct GraphTrace {
  RatVec values;  // per vertex
  Rat norm = 0;
};

/// Norm-one graph traces over the vertex variables, x >= 0 implicit.
/// Inequalities read lhs . x >= 0.
struct TracePolytope {
  std::vector<std::string> variables;
  std::vector<RatVec> equalities;
  RatVec equality_rhs;
  std::vector<RatVec> inequalities;
  std::vector<std::size_t> forced_zero;
};

inline TracePolytope trace_constraints(const Graph& g) {
  const std::size_t n = g.size();
  TracePolytope p;
  p.variables = g.vertices();
  std::vector<bool> zero(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    auto cls = classify_vertex(g, v);
    if (cls == VertexClass::Regular) {
      RatVec row(n, Rat(0));
      row[v] += 1;
      for (const auto& [w, m] : g.out_edges(v)) row[w] -= Rat(m.count());
      p.equalities.push_back(std::move(row));
      p.equality_rhs.push_back(0);
    } else if (cls == VertexClass::InfiniteEmitter) {
      RatVec row(n, Rat(0));
      row[v] += 1;
      for (const auto& [w, m] : g.out_edges(v)) {
        if (m.is_infinite()) zero[w] = true;
        else row[w] -= Rat(m.count());
      }
      p.inequalities.push_back(std::move(row));
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (zero[v]) {
      p.forced_zero.push_back(v);
      RatVec row(n, Rat(0));
      row[v] = 1;
      p.equalities.push_back(std::move(row));
      p.equality_rhs.push_back(0);
    }
  p.equalities.push_back(RatVec(n, Rat(1)));
  p.equality_rhs.push_back(1);
  return p;
}

/// Conditions (1) and (2) of a graph trace plus the norm bookkeeping.
inline bool is_graph_trace(const Graph& g, const GraphTrace& t) {
  const std::size_t n = g.size();
  if (t.values.size() != n) return false;
  Rat sum = 0;
  for (const auto& v : t.values) {
    if (sgn(v) < 0) return false;
    sum += v;
  }
  if (sum != t.norm) return false;
  for (std::size_t v = 0; v < n; ++v) {
    auto cls = classify_vertex(g, v);
    if (cls == VertexClass::Sink) continue;
    Rat s = 0;
    for (const auto& [w, m] : g.out_edges(v)) {
      if (m.is_infinite()) {
        if (sgn(t.values[w]) != 0) return false;
      } else {
        s += Rat(m.count()) * t.values[w];
      }
    }
    if (cls == VertexClass::Regular ? t.values[v] != s : t.values[v] < s) return false;
  }
  return true;
}

struct NoTrace {
  LpProblem problem;
  RatVec certificate;  // Farkas multipliers for `problem`
};

using TraceResult = std::variant<GraphTrace, NoTrace>;

inline LpProblem trace_lp(const TracePolytope& p) {
  LpProblem lp;
  lp.num_vars = p.variables.size();
  lp.nonnegative.assign(lp.num_vars, true);
  for (std::size_t i = 0; i < p.equalities.size(); ++i) lp.add(p.equalities[i], Relation::Equal, p.equality_rhs[i]);
  for (const auto& row : p.inequalities) lp.add(row, Relation::GreaterEqual, 0);
  return lp;
}

inline TraceResult find_graph_trace(const Graph& g) {
  auto lp = trace_lp(trace_constraints(g));
  auto result = rational_lp(lp);
  if (auto* inf = std::get_if<LpInfeasible>(&result)) return NoTrace{std::move(lp), std::move(inf->multipliers)};
  const auto& point = std::get<LpFeasible>(result).point;
  GraphTrace t{point, 1};
  if (!is_graph_trace(g, t)) throw std::logic_error("find_graph_trace: trace failed verification");
  return t;
}

/// Vertices of the trace polytope, sorted lexicographically descending.
inline std::vector<GraphTrace> extreme_traces(const Graph& g) {
  const auto tp = trace_constraints(g);
  NonnegPolyhedron p;
  p.dim = g.size();
  p.eq_lhs = tp.equalities;
  p.eq_rhs = tp.equality_rhs;
  for (const auto& row : tp.inequalities) {
    RatVec neg(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) neg[j] = -row[j];
    p.ineq_lhs.push_back(std::move(neg));
    p.ineq_rhs.push_back(0);
  }
  auto rep = enumerate_vertices(p, 200000);
  if (!rep) throw std::runtime_error("extreme_traces: vertex enumeration exceeded its size limit");
  std::vector<GraphTrace> out;
  for (auto& v : rep->vertices) {
    GraphTrace t{std::move(v), 1};
    if (!is_graph_trace(g, t)) throw std::logic_error("extreme_traces: vertex failed verification");
    out.push_back(std::move(t));
  }
  return out;
}

/// Positive normalized homomorphism K0 -> Q, stored as a functional on the
/// free coordinates (torsion is necessarily sent to zero).
struct StateOnK0 {
  RatVec functional;
  RatVec values_on_delta;  // per vertex
};

inline Rat evaluate(const StateOnK0& s, const Element& x) {
  Rat v = 0;
  for (std::size_t j = 0; j < s.functional.size(); ++j) v += s.functional[j] * x.free[j];
  return v;
}

inline bool is_state(const K0Presentation& k, const StateOnK0& s) {
  if (s.functional.size() != k.coker.free_rank() || s.values_on_delta.size() != k.vertex_count()) return false;
  for (std::size_t v = 0; v < k.vertex_count(); ++v)
    if (evaluate(s, k.delta[v]) != s.values_on_delta[v]) return false;
  if (!functional_nonnegative_on_cone(k, SeparatingFunctional{s.values_on_delta})) return false;
  return evaluate(s, k.order_unit) == 1;
}

inline StateOnK0 trace_to_state(const Graph& g, const K0Presentation& k, const GraphTrace& t) {
  if (!is_graph_trace(g, t)) throw std::invalid_argument("trace_to_state: not a graph trace");
  if (t.norm != 1) throw std::invalid_argument("trace_to_state: trace norm must be 1");
  if (k.vertex_count() != g.size()) throw std::invalid_argument("trace_to_state: presentation does not match graph");
  const std::size_t nf = k.coker.free_rank();
  LpProblem lp;
  lp.num_vars = nf;
  for (std::size_t v = 0; v < g.size(); ++v) {
    RatVec row(nf);
    for (std::size_t j = 0; j < nf; ++j) row[j] = k.delta[v].free[j];
    lp.add(std::move(row), Relation::Equal, t.values[v]);
  }
  auto result = rational_lp(lp);
  const auto* sol = std::get_if<LpFeasible>(&result);
  if (!sol) throw std::logic_error("trace_to_state: trace does not factor through K0");
  StateOnK0 s{sol->point, t.values};
  if (!is_state(k, s)) throw std::logic_error("trace_to_state: state failed verification");
  return s;
}

inline GraphTrace state_to_trace(const Graph& g, const K0Presentation& k, const StateOnK0& s) {
  if (!is_state(k, s)) throw std::invalid_argument("state_to_trace: not a state on K0");
  GraphTrace t;
  for (std::size_t v = 0; v < g.size(); ++v) {
    t.values.push_back(evaluate(s, k.delta[v]));
    t.norm += t.values.back();
  }
  if (!is_graph_trace(g, t)) throw std::logic_error("state_to_trace: trace failed verification");
  return t;
}

enum class TraceCount { None, Finite, Infinite };

struct TracialStateReport {
  bool condition_k = false;
  std::string identification;  // "canonical" or "states-only"
  TraceCount trace_count = TraceCount::None;
  std::size_t finite_count = 0;
};

inline TracialStateReport tracial_state_report(const Graph& g) {
  TracialStateReport r;
  r.condition_k = satisfies_condition_K(g);
  r.identification = r.condition_k ? "canonical" : "states-only";
  auto extremes = extreme_traces(g);
  if (extremes.empty()) {
    r.trace_count = TraceCount::None;
  } else if (extremes.size() == 1) {
    r.trace_count = TraceCount::Finite;
    r.finite_count = 1;
  } else {
    r.trace_count = TraceCount::Infinite;
  }
  return r;
}

}  // namespace graphk0
