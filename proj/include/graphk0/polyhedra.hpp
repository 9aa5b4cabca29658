#pragma once

#include "graphk0/numeric.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace graphk0 {

/// {x >= 0 : eq_lhs x = eq_rhs, ineq_lhs x <= ineq_rhs} over the rationals.
struct NonnegPolyhedron {
  std::size_t dim = 0;
  std::vector<RatVec> eq_lhs;
  RatVec eq_rhs;
  std::vector<RatVec> ineq_lhs;
  RatVec ineq_rhs;
};

struct VertexRepresentation {
  std::vector<RatVec> vertices;  // sorted lexicographically, descending
  std::vector<IntVec> rays;      // primitive integer extreme rays
};

namespace detail {

inline IntVec primitive(const RatVec& v) {
  Int den = 1;
  for (const auto& x : v) den = lcm_of(den, x.get_den());
  IntVec out;
  out.reserve(v.size());
  Int g = 0;
  for (const auto& x : v) {
    Int e = x.get_num() * (den / x.get_den());
    g = gcd_of(g, e);
    out.push_back(e);
  }
  if (g > 1)
    for (auto& e : out) e /= g;
  return out;
}

struct DdRay {
  IntVec y;                 // homogenized (x, t)
  std::vector<bool> tight;  // per processed constraint
};

}  // namespace detail

/// Double-description enumeration of vertices and extreme rays. Starts from
/// the orthant of the homogenized cone {(x, t) >= 0} and intersects one
/// constraint at a time, using the combinatorial adjacency test.
/// Returns nullopt if the intermediate ray count exceeds `ray_limit`.
inline std::optional<VertexRepresentation> enumerate_vertices(const NonnegPolyhedron& p,
                                                              std::size_t ray_limit = 20000) {
  const std::size_t d = p.dim + 1;
  if (p.eq_lhs.size() != p.eq_rhs.size() || p.ineq_lhs.size() != p.ineq_rhs.size())
    throw std::invalid_argument("enumerate_vertices: dimension mismatch");

  // Homogenized rows a.x - b t, with `equality` flag.
  struct Row {
    IntVec a;
    bool equality;
  };
  std::vector<Row> rows;
  auto homogenize = [&](const RatVec& lhs, const Rat& rhs, bool eq) {
    if (lhs.size() != p.dim) throw std::invalid_argument("enumerate_vertices: row length mismatch");
    RatVec r(lhs);
    r.push_back(-rhs);
    rows.push_back({detail::primitive(r), eq});
  };
  for (std::size_t i = 0; i < p.eq_lhs.size(); ++i) homogenize(p.eq_lhs[i], p.eq_rhs[i], true);
  for (std::size_t i = 0; i < p.ineq_lhs.size(); ++i) homogenize(p.ineq_lhs[i], p.ineq_rhs[i], false);

  std::vector<detail::DdRay> rays;
  for (std::size_t i = 0; i < d; ++i) {
    detail::DdRay r;
    r.y.assign(d, Int(0));
    r.y[i] = 1;
    r.tight.assign(d, true);
    r.tight[i] = false;
    rays.push_back(std::move(r));
  }

  for (const auto& row : rows) {
    std::vector<Int> value(rays.size());
    for (std::size_t k = 0; k < rays.size(); ++k) {
      Int s = 0;
      for (std::size_t j = 0; j < d; ++j) s += row.a[j] * rays[k].y[j];
      value[k] = s;
    }
    std::vector<std::size_t> plus, minus, zero;
    for (std::size_t k = 0; k < rays.size(); ++k) {
      int sg = sgn(value[k]);
      (sg > 0 ? plus : sg < 0 ? minus : zero).push_back(k);
    }

    std::vector<detail::DdRay> next;
    auto keep = [&](std::size_t k, bool is_tight) {
      detail::DdRay r = rays[k];
      r.tight.push_back(is_tight);
      next.push_back(std::move(r));
    };
    for (std::size_t k : zero) keep(k, true);
    if (!row.equality)
      for (std::size_t k : minus) keep(k, false);

    for (std::size_t pi : plus)
      for (std::size_t ni : minus) {
        const auto& tp = rays[pi].tight;
        const auto& tn = rays[ni].tight;
        std::vector<bool> common(tp.size());
        for (std::size_t c = 0; c < tp.size(); ++c) common[c] = tp[c] && tn[c];
        bool adjacent = true;
        for (std::size_t k = 0; k < rays.size() && adjacent; ++k) {
          if (k == pi || k == ni) continue;
          bool superset = true;
          for (std::size_t c = 0; c < common.size(); ++c)
            if (common[c] && !rays[k].tight[c]) {
              superset = false;
              break;
            }
          if (superset) adjacent = false;
        }
        if (!adjacent) continue;
        // value[pi] > 0 > value[ni]: combine to land on the hyperplane.
        detail::DdRay r;
        r.y.resize(d);
        Int g = 0;
        for (std::size_t j = 0; j < d; ++j) {
          r.y[j] = value[pi] * rays[ni].y[j] - value[ni] * rays[pi].y[j];
          g = gcd_of(g, r.y[j]);
        }
        if (g > 1)
          for (auto& e : r.y) e /= g;
        r.tight = common;
        r.tight.push_back(true);
        next.push_back(std::move(r));
      }
    rays = std::move(next);
    if (rays.size() > ray_limit) return std::nullopt;
  }

  VertexRepresentation out;
  for (const auto& r : rays) {
    const Int& t = r.y[d - 1];
    if (sgn(t) > 0) {
      RatVec v(p.dim);
      for (std::size_t j = 0; j < p.dim; ++j) v[j] = make_rat(r.y[j], t);
      out.vertices.push_back(std::move(v));
    } else {
      out.rays.emplace_back(r.y.begin(), r.y.end() - 1);
    }
  }
  std::sort(out.vertices.begin(), out.vertices.end(), std::greater<>());
  out.vertices.erase(std::unique(out.vertices.begin(), out.vertices.end()), out.vertices.end());
  std::sort(out.rays.begin(), out.rays.end(), std::greater<>());
  out.rays.erase(std::unique(out.rays.begin(), out.rays.end()), out.rays.end());
  return out;
}

}  // namespace graphk0
