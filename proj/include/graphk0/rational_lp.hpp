#pragma once

#include "graphk0/numeric.hpp"

#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace graphk0 {

enum class Relation { LessEqual, GreaterEqual, Equal };

struct LinearConstraint {
  RatVec coeffs;
  Relation relation = Relation::LessEqual;
  Rat rhs = 0;
};

/// Variables are free unless marked nonnegative. The objective, when
/// present, is maximized.
struct LpProblem {
  std::size_t num_vars = 0;
  std::vector<LinearConstraint> constraints;
  std::vector<bool> nonnegative;  // empty: all free
  std::optional<RatVec> objective;

  bool is_nonnegative(std::size_t j) const { return !nonnegative.empty() && nonnegative[j]; }

  void add(RatVec coeffs, Relation rel, Rat rhs) {
    constraints.push_back({std::move(coeffs), rel, std::move(rhs)});
  }
};

struct LpFeasible {
  RatVec point;
  std::optional<Rat> objective_value;
};

/// Farkas certificate: one multiplier per constraint, >= 0 on `<=` rows,
/// <= 0 on `>=` rows, free on equalities. The combination sum(y_i a_i) is zero
/// on free variables and >= 0 on nonnegative ones while sum(y_i b_i) < 0.
struct LpInfeasible {
  RatVec multipliers;
};

struct LpUnbounded {
  RatVec point;
  RatVec direction;
};

using LpResult = std::variant<LpFeasible, LpInfeasible, LpUnbounded>;

inline Rat dot(const RatVec& a, const RatVec& b) {
  Rat s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void check_problem(const LpProblem& p) {
  if (!p.nonnegative.empty() && p.nonnegative.size() != p.num_vars)
    throw std::invalid_argument("rational_lp: nonnegativity flags dimension mismatch");
  for (const auto& c : p.constraints)
    if (c.coeffs.size() != p.num_vars) throw std::invalid_argument("rational_lp: constraint dimension mismatch");
  if (p.objective && p.objective->size() != p.num_vars) throw std::invalid_argument("rational_lp: objective dimension mismatch");
}

inline bool satisfies(const LpProblem& p, const RatVec& x) {
  if (x.size() != p.num_vars) return false;
  for (std::size_t j = 0; j < p.num_vars; ++j)
    if (p.is_nonnegative(j) && sgn(x[j]) < 0) return false;
  for (const auto& c : p.constraints) {
    Rat lhs = dot(c.coeffs, x);
    switch (c.relation) {
      case Relation::LessEqual:
        if (lhs > c.rhs) return false;
        break;
      case Relation::GreaterEqual:
        if (lhs < c.rhs) return false;
        break;
      case Relation::Equal:
        if (lhs != c.rhs) return false;
        break;
    }
  }
  return true;
}

inline bool verify_farkas(const LpProblem& p, const RatVec& y) {
  if (y.size() != p.constraints.size()) return false;
  RatVec combo(p.num_vars, Rat(0));
  Rat rhs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto& c = p.constraints[i];
    if (c.relation == Relation::LessEqual && sgn(y[i]) < 0) return false;
    if (c.relation == Relation::GreaterEqual && sgn(y[i]) > 0) return false;
    for (std::size_t j = 0; j < p.num_vars; ++j) combo[j] += y[i] * c.coeffs[j];
    rhs += y[i] * c.rhs;
  }
  for (std::size_t j = 0; j < p.num_vars; ++j) {
    if (p.is_nonnegative(j) ? sgn(combo[j]) < 0 : sgn(combo[j]) != 0) return false;
  }
  return sgn(rhs) < 0;
}

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : t_(rows, RatVec(cols + 1, Rat(0))), basis_(rows, 0), cols_(cols) {}

  Rat& at(std::size_t r, std::size_t c) { return t_[r][c]; }
  const Rat& at(std::size_t r, std::size_t c) const { return t_[r][c]; }
  Rat& rhs(std::size_t r) { return t_[r][cols_]; }
  const Rat& rhs(std::size_t r) const { return t_[r][cols_]; }
  std::size_t rows() const { return t_.size(); }
  std::size_t cols() const { return cols_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c) {
    Rat inv = 1 / t_[r][c];
    for (auto& v : t_[r])
      if (sgn(v) != 0) v *= inv;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i == r || sgn(t_[i][c]) == 0) continue;
      Rat f = t_[i][c];
      for (std::size_t j = 0; j <= cols_; ++j)
        if (sgn(t_[r][j]) != 0) t_[i][j] -= f * t_[r][j];
    }
    basis_[r] = c;
  }

  // Bland's rule minimization of cost over columns not in `forbidden`.
  // Returns the unbounded entering column, or nullopt at optimality.
  std::optional<std::size_t> minimize(const RatVec& cost, const std::vector<bool>& forbidden) {
    for (;;) {
      std::optional<std::size_t> entering;
      for (std::size_t j = 0; j < cols_ && !entering; ++j) {
        if (forbidden[j] || is_basic(j)) continue;
        Rat reduced = cost[j];
        for (std::size_t r = 0; r < t_.size(); ++r)
          if (sgn(t_[r][j]) != 0) reduced -= cost[basis_[r]] * t_[r][j];
        if (sgn(reduced) < 0) entering = j;
      }
      if (!entering) return std::nullopt;
      std::size_t j = *entering;
      std::optional<std::size_t> leave;
      Rat best;
      for (std::size_t r = 0; r < t_.size(); ++r) {
        if (sgn(t_[r][j]) <= 0) continue;
        Rat ratio = t_[r][cols_] / t_[r][j];
        if (!leave || ratio < best || (ratio == best && basis_[r] < basis_[*leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (!leave) return j;
      pivot(*leave, j);
    }
  }

  bool is_basic(std::size_t j) const {
    for (auto b : basis_)
      if (b == j) return true;
    return false;
  }

  Rat value(const RatVec& cost) const {
    Rat v = 0;
    for (std::size_t r = 0; r < t_.size(); ++r) v += cost[basis_[r]] * t_[r][cols_];
    return v;
  }

  Rat column_value(std::size_t j) const {
    for (std::size_t r = 0; r < t_.size(); ++r)
      if (basis_[r] == j) return t_[r][cols_];
    return 0;
  }

 private:
  std::vector<RatVec> t_;
  std::vector<std::size_t> basis_;
  std::size_t cols_;
};

}  // namespace detail

/// Two-phase exact simplex with Bland's rule. Infeasibility comes with a
/// Farkas certificate that is re-verified before returning.
inline LpResult rational_lp(const LpProblem& p) {
  check_problem(p);
  const std::size_t n = p.num_vars;
  const std::size_t m = p.constraints.size();

  // Column layout: x_j^+ for every variable, x_j^- for free ones, one slack
  // per inequality, one artificial per row.
  std::vector<std::size_t> pos_col(n), neg_col(n, SIZE_MAX);
  std::size_t cols = 0;
  for (std::size_t j = 0; j < n; ++j) {
    pos_col[j] = cols++;
    if (!p.is_nonnegative(j)) neg_col[j] = cols++;
  }
  std::vector<std::size_t> slack_col(m, SIZE_MAX);
  for (std::size_t i = 0; i < m; ++i)
    if (p.constraints[i].relation != Relation::Equal) slack_col[i] = cols++;
  const std::size_t first_artificial = cols;
  cols += m;

  detail::Tableau tab(m, cols);
  std::vector<int> row_sign(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = p.constraints[i];
    int sign = sgn(c.rhs) < 0 ? -1 : 1;
    row_sign[i] = sign;
    for (std::size_t j = 0; j < n; ++j) {
      if (sgn(c.coeffs[j]) == 0) continue;
      tab.at(i, pos_col[j]) = sign * c.coeffs[j];
      if (neg_col[j] != SIZE_MAX) tab.at(i, neg_col[j]) = -sign * c.coeffs[j];
    }
    if (slack_col[i] != SIZE_MAX) tab.at(i, slack_col[i]) = c.relation == Relation::LessEqual ? sign : -sign;
    tab.at(i, first_artificial + i) = 1;
    tab.rhs(i) = sign * c.rhs;
    tab.basis()[i] = first_artificial + i;
  }

  RatVec phase1_cost(cols, Rat(0));
  for (std::size_t i = 0; i < m; ++i) phase1_cost[first_artificial + i] = 1;
  std::vector<bool> none_forbidden(cols, false);
  tab.minimize(phase1_cost, none_forbidden);

  if (sgn(tab.value(phase1_cost)) > 0) {
    // Phase-1 duals w = c_B^T B^{-1}; B^{-1} sits in the artificial columns.
    RatVec y(m, Rat(0));
    for (std::size_t i = 0; i < m; ++i) {
      Rat w = 0;
      for (std::size_t r = 0; r < m; ++r) w += phase1_cost[tab.basis()[r]] * tab.at(r, first_artificial + i);
      y[i] = -row_sign[i] * w;
    }
    if (!verify_farkas(p, y)) throw std::logic_error("rational_lp: Farkas certificate failed verification");
    return LpInfeasible{std::move(y)};
  }

  std::vector<bool> forbidden(cols, false);
  for (std::size_t i = 0; i < m; ++i) forbidden[first_artificial + i] = true;
  for (std::size_t r = 0; r < m; ++r) {
    if (tab.basis()[r] < first_artificial) continue;
    for (std::size_t j = 0; j < first_artificial; ++j)
      if (sgn(tab.at(r, j)) != 0) {
        tab.pivot(r, j);
        break;
      }
  }

  auto extract = [&](const detail::Tableau& t) {
    RatVec x(n, Rat(0));
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = t.column_value(pos_col[j]);
      if (neg_col[j] != SIZE_MAX) x[j] -= t.column_value(neg_col[j]);
    }
    return x;
  };

  if (!p.objective) {
    RatVec x = extract(tab);
    if (!satisfies(p, x)) throw std::logic_error("rational_lp: feasible point failed verification");
    return LpFeasible{std::move(x), std::nullopt};
  }

  RatVec cost(cols, Rat(0));
  for (std::size_t j = 0; j < n; ++j) {
    cost[pos_col[j]] = -(*p.objective)[j];
    if (neg_col[j] != SIZE_MAX) cost[neg_col[j]] = (*p.objective)[j];
  }
  auto unbounded_col = tab.minimize(cost, forbidden);
  RatVec x = extract(tab);
  if (!satisfies(p, x)) throw std::logic_error("rational_lp: optimal point failed verification");
  if (unbounded_col) {
    std::size_t e = *unbounded_col;
    RatVec dir_cols(cols, Rat(0));
    dir_cols[e] = 1;
    for (std::size_t r = 0; r < m; ++r) dir_cols[tab.basis()[r]] -= tab.at(r, e);
    RatVec dir(n, Rat(0));
    for (std::size_t j = 0; j < n; ++j) {
      dir[j] = dir_cols[pos_col[j]];
      if (neg_col[j] != SIZE_MAX) dir[j] -= dir_cols[neg_col[j]];
    }
    return LpUnbounded{std::move(x), std::move(dir)};
  }
  return LpFeasible{x, dot(*p.objective, x)};
}

}  // namespace graphk0
