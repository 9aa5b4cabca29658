#pragma once

#include "graphk0/int_matrix.hpp"
#include "graphk0/polyhedra.hpp"
#include "graphk0/rational_lp.hpp"
#include "graphk0/smith.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphk0 {

/// Upper bound for a variable; nullopt means unbounded.
using VarCap = std::optional<Int>;

enum class FeasibilityStatus { Witness, Infeasible, Unknown };

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::Unknown;
  IntVec witness;            // set when status == Witness
  std::size_t nodes = 0;     // branch-and-bound nodes explored
  std::string reason;        // how Infeasible was established
};

namespace detail {

struct BranchBounds {
  IntVec lower;
  std::vector<VarCap> upper;
};

inline LpProblem relaxation(const IntMatrix& a, const IntVec& b, const BranchBounds& bounds) {
  const std::size_t n = a.cols();
  LpProblem lp;
  lp.num_vars = n;
  lp.nonnegative.assign(n, true);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    RatVec row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = a(i, j);
    lp.add(std::move(row), Relation::Equal, b[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (sgn(bounds.lower[j]) > 0) {
      RatVec e(n, Rat(0));
      e[j] = 1;
      lp.add(std::move(e), Relation::GreaterEqual, bounds.lower[j]);
    }
    if (bounds.upper[j]) {
      RatVec e(n, Rat(0));
      e[j] = 1;
      lp.add(std::move(e), Relation::LessEqual, *bounds.upper[j]);
    }
  }
  return lp;
}

enum class SearchOutcome { Found, Exhausted, OutOfBudget };

// Depth-first branch-and-bound on the exact relaxation, most-fractional
// branching, nearer child first.
inline SearchOutcome branch_and_bound(const IntMatrix& a, const IntVec& b, const BranchBounds& root,
                                      std::size_t budget, std::size_t& nodes, IntVec& witness) {
  std::vector<BranchBounds> stack{root};
  while (!stack.empty()) {
    if (nodes >= budget) return SearchOutcome::OutOfBudget;
    BranchBounds node = std::move(stack.back());
    stack.pop_back();
    ++nodes;
    bool empty_box = false;
    for (std::size_t j = 0; j < node.lower.size(); ++j)
      if (node.upper[j] && *node.upper[j] < node.lower[j]) empty_box = true;
    if (empty_box) continue;
    auto result = rational_lp(relaxation(a, b, node));
    const auto* feasible = std::get_if<LpFeasible>(&result);
    if (!feasible) continue;
    const RatVec& x = feasible->point;
    std::optional<std::size_t> branch;
    Rat best_gap;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (is_integer(x[j])) continue;
      Rat frac = x[j] - Rat(floor_of(x[j]));
      Rat gap = abs(frac - Rat(1, 2));
      if (!branch || gap < best_gap) {
        branch = j;
        best_gap = gap;
      }
    }
    if (!branch) {
      witness.clear();
      for (const auto& v : x) witness.push_back(v.get_num());
      return SearchOutcome::Found;
    }
    std::size_t j = *branch;
    Int lo = floor_of(x[j]);
    BranchBounds down = node, up = node;
    down.upper[j] = lo;
    up.lower[j] = lo + 1;
    Rat frac = x[j] - Rat(lo);
    // The child pushed last is explored first.
    if (frac < Rat(1, 2)) {
      stack.push_back(std::move(up));
      stack.push_back(std::move(down));
    } else {
      stack.push_back(std::move(down));
      stack.push_back(std::move(up));
    }
  }
  return SearchOutcome::Exhausted;
}

// Coordinate bounds of conv(vertices) + [0,1]-combinations of extreme rays:
// every integer point of the polyhedron can be translated into this box by
// subtracting integer multiples of rays.
inline std::optional<std::vector<VarCap>> implied_box(const IntMatrix& a, const IntVec& b, const std::vector<VarCap>& caps) {
  NonnegPolyhedron p;
  p.dim = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    RatVec row(p.dim);
    for (std::size_t j = 0; j < p.dim; ++j) row[j] = a(i, j);
    p.eq_lhs.push_back(std::move(row));
    p.eq_rhs.push_back(b[i]);
  }
  for (std::size_t j = 0; j < p.dim; ++j)
    if (caps[j]) {
      RatVec e(p.dim, Rat(0));
      e[j] = 1;
      p.ineq_lhs.push_back(std::move(e));
      p.ineq_rhs.push_back(*caps[j]);
    }
  auto rep = enumerate_vertices(p);
  if (!rep) return std::nullopt;
  std::vector<VarCap> box(p.dim);
  for (std::size_t j = 0; j < p.dim; ++j) {
    Rat hi = 0;
    for (const auto& v : rep->vertices) hi = std::max(hi, v[j]);
    for (const auto& r : rep->rays) hi += r[j];
    Int bound = floor_of(hi);
    if (caps[j] && *caps[j] < bound) bound = *caps[j];
    box[j] = bound;
  }
  return box;
}

}  // namespace detail

/// Searches integer x >= 0 with a x = b and x_i <= caps_i. Infeasible is only
/// reported with a proof: no integer solution at all, an infeasible rational
/// relaxation, or a completed branch-and-bound tree. `budget` bounds the
/// number of explored nodes; running out yields Unknown.
inline FeasibilityResult bounded_nonneg_feasibility(const IntMatrix& a, const IntVec& b, const std::vector<VarCap>& caps,
                                                    std::size_t budget) {
  if (b.size() != a.rows() || caps.size() != a.cols())
    throw std::invalid_argument("bounded_nonneg_feasibility: dimension mismatch");
  for (const auto& c : caps)
    if (c && sgn(*c) < 0) throw std::invalid_argument("bounded_nonneg_feasibility: negative cap");

  FeasibilityResult result;
  if (!solve_diophantine(a, b)) {
    result.status = FeasibilityStatus::Infeasible;
    result.reason = "no integer solution";
    return result;
  }
  detail::BranchBounds root{IntVec(a.cols(), Int(0)), caps};
  if (std::holds_alternative<LpInfeasible>(rational_lp(detail::relaxation(a, b, root)))) {
    result.status = FeasibilityStatus::Infeasible;
    result.reason = "rational relaxation infeasible";
    result.nodes = 1;
    return result;
  }

  auto finish = [&](detail::SearchOutcome outcome, const char* exhausted_reason) {
    if (outcome == detail::SearchOutcome::Found) {
      if (a * result.witness != b) throw std::logic_error("bounded_nonneg_feasibility: witness failed verification");
      for (std::size_t j = 0; j < caps.size(); ++j)
        if (sgn(result.witness[j]) < 0 || (caps[j] && result.witness[j] > *caps[j]))
          throw std::logic_error("bounded_nonneg_feasibility: witness violates bounds");
      result.status = FeasibilityStatus::Witness;
    } else if (outcome == detail::SearchOutcome::Exhausted) {
      result.status = FeasibilityStatus::Infeasible;
      result.reason = exhausted_reason;
    }
    return outcome != detail::SearchOutcome::OutOfBudget;
  };

  // Cheap first pass without box bounds; most instances resolve here.
  constexpr std::size_t first_pass = 200;
  auto outcome = detail::branch_and_bound(a, b, root, std::min(budget, first_pass), result.nodes, result.witness);
  if (finish(outcome, "branch-and-bound tree exhausted")) return result;
  if (result.nodes >= budget) return result;

  auto box = detail::implied_box(a, b, caps);
  if (!box) {
    outcome = detail::branch_and_bound(a, b, root, budget, result.nodes, result.witness);
    finish(outcome, "branch-and-bound tree exhausted");
    return result;
  }
  detail::BranchBounds boxed{IntVec(a.cols(), Int(0)), *box};
  outcome = detail::branch_and_bound(a, b, boxed, budget, result.nodes, result.witness);
  finish(outcome, "exhaustive search within implied bounds");
  return result;
}

}  // namespace graphk0
