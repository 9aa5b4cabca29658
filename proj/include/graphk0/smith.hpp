#pragma once

#include "graphk0/int_matrix.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace graphk0 {

/// U * A * V = S with U, V unimodular and S diagonal, d_1 | d_2 | ... | d_rank.
/// u_inv is carried along so cokernel classes can be lifted back.
struct SmithForm {
  IntMatrix u;
  IntMatrix s;
  IntMatrix v;
  IntMatrix u_inv;
  std::size_t rank = 0;
  IntVec invariant_factors;
};

namespace detail {

// Row operations are mirrored on U (left) and, inverted, on u_inv (right).
struct SmithState {
  IntMatrix s, u, u_inv, v;

  void swap_rows(std::size_t a, std::size_t b) {
    s.swap_rows(a, b);
    u.swap_rows(a, b);
    u_inv.swap_cols(a, b);
  }
  void add_row(std::size_t target, std::size_t source, const Int& f) {
    s.add_row(target, source, f);
    u.add_row(target, source, f);
    u_inv.add_col(source, target, -f);
  }
  void negate_row(std::size_t i) {
    s.negate_row(i);
    u.negate_row(i);
    u_inv.negate_col(i);
  }
  void swap_cols(std::size_t a, std::size_t b) {
    s.swap_cols(a, b);
    v.swap_cols(a, b);
  }
  void add_col(std::size_t target, std::size_t source, const Int& f) {
    s.add_col(target, source, f);
    v.add_col(target, source, f);
  }
};

}  // namespace detail

/// Smallest-|entry| pivoting with immediate reduction of the pivot row and
/// column. Deterministic for a fixed input.
inline SmithForm smith_normal_form(const IntMatrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  detail::SmithState st{a, IntMatrix::identity(m), IntMatrix::identity(m), IntMatrix::identity(n)};
  std::size_t t = 0;
  for (; t < std::min(m, n); ++t) {
    bool found_any = true;
    for (;;) {
      std::size_t pi = m, pj = n;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j) {
          const Int& e = st.s(i, j);
          if (sgn(e) != 0 && (pi == m || abs(e) < abs(st.s(pi, pj)))) {
            pi = i;
            pj = j;
          }
        }
      if (pi == m) {
        found_any = false;
        break;
      }
      st.swap_rows(t, pi);
      st.swap_cols(t, pj);

      bool clean = true;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (sgn(st.s(i, t)) == 0) continue;
        Int q;
        mpz_tdiv_q(q.get_mpz_t(), st.s(i, t).get_mpz_t(), st.s(t, t).get_mpz_t());
        st.add_row(i, t, -q);
        if (sgn(st.s(i, t)) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (sgn(st.s(t, j)) == 0) continue;
        Int q;
        mpz_tdiv_q(q.get_mpz_t(), st.s(t, j).get_mpz_t(), st.s(t, t).get_mpz_t());
        st.add_col(j, t, -q);
        if (sgn(st.s(t, j)) != 0) clean = false;
      }
      if (!clean) continue;

      // Divisibility: fold an offending row into the pivot row and retry.
      std::size_t bad_row = m;
      for (std::size_t i = t + 1; i < m && bad_row == m; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (!mpz_divisible_p(st.s(i, j).get_mpz_t(), st.s(t, t).get_mpz_t())) {
            bad_row = i;
            break;
          }
      if (bad_row == m) break;
      st.add_row(t, bad_row, 1);
    }
    if (!found_any) break;
    if (sgn(st.s(t, t)) < 0) st.negate_row(t);
  }

  SmithForm f;
  f.rank = t;
  for (std::size_t i = 0; i < t; ++i) f.invariant_factors.push_back(st.s(i, i));
  f.s = std::move(st.s);
  f.u = std::move(st.u);
  f.u_inv = std::move(st.u_inv);
  f.v = std::move(st.v);
  return f;
}

/// An element of Z/d_1 + ... + Z/d_k + Z^f in canonical coordinates.
struct Element {
  IntVec torsion;
  IntVec free;

  friend bool operator==(const Element& a, const Element& b) { return a.torsion == b.torsion && a.free == b.free; }
  friend bool operator<(const Element& a, const Element& b) {
    if (a.torsion != b.torsion) return a.torsion < b.torsion;
    return a.free < b.free;
  }
};

/// Presentation of Z^m / im(M) as torsion cyclic factors (moduli >= 2) plus a
/// free part, with explicit projection and lifting maps.
class CokerPresentation {
 public:
  CokerPresentation() = default;

  std::size_t ambient_dim() const { return ambient_dim_; }
  const IntVec& torsion_moduli() const { return moduli_; }
  std::size_t free_rank() const { return free_rows_.rows(); }
  const IntMatrix& relations() const { return relations_; }
  // Rows map ambient vectors to torsion residues (before reduction) and to
  // free coordinates.
  const IntMatrix& torsion_rows() const { return torsion_rows_; }
  const IntMatrix& free_rows() const { return free_rows_; }

  Element zero() const {
    return Element{IntVec(moduli_.size(), Int(0)), IntVec(free_rank(), Int(0))};
  }

  bool conforms(const Element& e) const {
    if (e.torsion.size() != moduli_.size() || e.free.size() != free_rank()) return false;
    for (std::size_t i = 0; i < moduli_.size(); ++i)
      if (sgn(e.torsion[i]) < 0 || e.torsion[i] >= moduli_[i]) return false;
    return true;
  }

  Element project(const IntVec& x) const {
    if (x.size() != ambient_dim_) throw std::invalid_argument("project: dimension mismatch");
    Element e;
    e.torsion = torsion_rows_ * x;
    for (std::size_t i = 0; i < moduli_.size(); ++i) e.torsion[i] = mod_floor(e.torsion[i], moduli_[i]);
    e.free = free_rows_ * x;
    return e;
  }

  // Ambient representative with torsion residues taken as given (least
  // nonnegative when e conforms).
  IntVec lift(const Element& e) const {
    if (!conforms(e)) throw std::invalid_argument("lift: element does not conform to presentation");
    IntVec x(ambient_dim_, Int(0));
    for (std::size_t i = 0; i < moduli_.size(); ++i)
      for (std::size_t r = 0; r < ambient_dim_; ++r) x[r] += e.torsion[i] * torsion_lifts_(r, i);
    for (std::size_t j = 0; j < free_rank(); ++j)
      for (std::size_t r = 0; r < ambient_dim_; ++r) x[r] += e.free[j] * free_lifts_(r, j);
    return x;
  }

  Element add(const Element& a, const Element& b) const {
    check(a);
    check(b);
    Element c;
    for (std::size_t i = 0; i < moduli_.size(); ++i) c.torsion.push_back(mod_floor(a.torsion[i] + b.torsion[i], moduli_[i]));
    for (std::size_t j = 0; j < free_rank(); ++j) c.free.push_back(a.free[j] + b.free[j]);
    return c;
  }

  Element scale(const Element& a, const Int& k) const {
    check(a);
    Element c;
    for (std::size_t i = 0; i < moduli_.size(); ++i) c.torsion.push_back(mod_floor(a.torsion[i] * k, moduli_[i]));
    for (std::size_t j = 0; j < free_rank(); ++j) c.free.push_back(a.free[j] * k);
    return c;
  }

  Element negate(const Element& a) const { return scale(a, -1); }
  Element subtract(const Element& a, const Element& b) const { return add(a, negate(b)); }

  bool is_zero(const Element& a) const { return a == zero(); }

  // Additive order of an element; 0 when it has infinite order.
  Int order(const Element& a) const {
    check(a);
    for (const auto& f : a.free)
      if (sgn(f) != 0) return 0;
    Int ord = 1;
    for (std::size_t i = 0; i < moduli_.size(); ++i) {
      Int g = gcd_of(a.torsion[i], moduli_[i]);
      ord = lcm_of(ord, moduli_[i] / g);
    }
    return ord;
  }

  bool same_group(const CokerPresentation& other) const {
    return moduli_ == other.moduli_ && free_rank() == other.free_rank();
  }

  friend CokerPresentation cokernel(const IntMatrix& relations);

 private:
  void check(const Element& e) const {
    if (!conforms(e)) throw std::invalid_argument("element does not conform to presentation");
  }

  std::size_t ambient_dim_ = 0;
  IntMatrix relations_;
  IntVec moduli_;
  IntMatrix torsion_rows_;
  IntMatrix free_rows_;
  IntMatrix torsion_lifts_;  // ambient x torsion count
  IntMatrix free_lifts_;     // ambient x free rank
};

namespace detail {

// Row-style Hermite normal form of `rows` in place; returns (H, H^-1) with
// H * original = result.
inline std::pair<IntMatrix, IntMatrix> hermite_rows(IntMatrix& rows) {
  const std::size_t k = rows.rows(), m = rows.cols();
  IntMatrix h = IntMatrix::identity(k), h_inv = IntMatrix::identity(k);
  auto swap_r = [&](std::size_t a, std::size_t b) {
    rows.swap_rows(a, b);
    h.swap_rows(a, b);
    h_inv.swap_cols(a, b);
  };
  auto add_r = [&](std::size_t target, std::size_t source, const Int& f) {
    rows.add_row(target, source, f);
    h.add_row(target, source, f);
    h_inv.add_col(source, target, -f);
  };
  auto neg_r = [&](std::size_t i) {
    rows.negate_row(i);
    h.negate_row(i);
    h_inv.negate_col(i);
  };
  std::size_t r = 0;
  for (std::size_t c = 0; c < m && r < k; ++c) {
    for (;;) {
      std::size_t p = k;
      for (std::size_t i = r; i < k; ++i)
        if (sgn(rows(i, c)) != 0 && (p == k || abs(rows(i, c)) < abs(rows(p, c)))) p = i;
      if (p == k) break;
      swap_r(r, p);
      bool done = true;
      for (std::size_t i = r + 1; i < k; ++i) {
        if (sgn(rows(i, c)) == 0) continue;
        Int q;
        mpz_fdiv_q(q.get_mpz_t(), rows(i, c).get_mpz_t(), rows(r, c).get_mpz_t());
        add_r(i, r, -q);
        if (sgn(rows(i, c)) != 0) done = false;
      }
      if (done) break;
    }
    if (sgn(rows(r, c)) == 0) continue;
    if (sgn(rows(r, c)) < 0) neg_r(r);
    for (std::size_t i = 0; i < r; ++i) {
      Int q;
      mpz_fdiv_q(q.get_mpz_t(), rows(i, c).get_mpz_t(), rows(r, c).get_mpz_t());
      add_r(i, r, -q);
    }
    ++r;
  }
  return {std::move(h), std::move(h_inv)};
}

}  // namespace detail

/// Cokernel of M : Z^n -> Z^m (columns are the relations). Free coordinates
/// are normalized so the free projection rows are in Hermite normal form,
/// which makes them independent of the elimination path.
inline CokerPresentation cokernel(const IntMatrix& relations) {
  const std::size_t m = relations.rows();
  SmithForm snf = smith_normal_form(relations);
  CokerPresentation p;
  p.ambient_dim_ = m;
  p.relations_ = relations;

  std::vector<std::size_t> torsion_idx;
  for (std::size_t i = 0; i < snf.rank; ++i)
    if (snf.invariant_factors[i] > 1) {
      torsion_idx.push_back(i);
      p.moduli_.push_back(snf.invariant_factors[i]);
    }
  const std::size_t f = m - snf.rank;

  p.torsion_rows_ = IntMatrix(torsion_idx.size(), m);
  p.torsion_lifts_ = IntMatrix(m, torsion_idx.size());
  for (std::size_t k = 0; k < torsion_idx.size(); ++k)
    for (std::size_t c = 0; c < m; ++c) {
      p.torsion_rows_(k, c) = snf.u(torsion_idx[k], c);
      p.torsion_lifts_(c, k) = snf.u_inv(c, torsion_idx[k]);
    }

  IntMatrix free_rows(f, m), free_lifts(m, f);
  for (std::size_t k = 0; k < f; ++k)
    for (std::size_t c = 0; c < m; ++c) {
      free_rows(k, c) = snf.u(snf.rank + k, c);
      free_lifts(c, k) = snf.u_inv(c, snf.rank + k);
    }
  auto [h, h_inv] = detail::hermite_rows(free_rows);
  p.free_rows_ = std::move(free_rows);
  p.free_lifts_ = free_lifts * h_inv;
  return p;
}

/// Integer solution of a * x = b, or nullopt when none exists over Z.
inline std::optional<IntVec> solve_diophantine(const IntMatrix& a, const IntVec& b) {
  if (b.size() != a.rows()) throw std::invalid_argument("solve_diophantine: dimension mismatch");
  SmithForm snf = smith_normal_form(a);
  IntVec ub = snf.u * b;
  IntVec y(a.cols(), Int(0));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (i < snf.rank) {
      if (!mpz_divisible_p(ub[i].get_mpz_t(), snf.invariant_factors[i].get_mpz_t())) return std::nullopt;
      y[i] = ub[i] / snf.invariant_factors[i];
    } else if (sgn(ub[i]) != 0) {
      return std::nullopt;
    }
  }
  IntVec x = snf.v * y;
  if (a * x != b) throw std::logic_error("solve_diophantine: solution failed verification");
  return x;
}

}  // namespace graphk0
