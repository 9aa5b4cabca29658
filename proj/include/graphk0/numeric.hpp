#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace graphk0 {

using Int = mpz_class;
using Rat = mpq_class;
using IntVec = std::vector<Int>;
using RatVec = std::vector<Rat>;

inline Rat make_rat(const Int& num, const Int& den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline Int floor_of(const Rat& r) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline Int ceil_of(const Rat& r) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return q;
}

inline bool is_integer(const Rat& r) { return r.get_den() == 1; }

// Least nonnegative residue of a modulo m (m > 0).
inline Int mod_floor(const Int& a, const Int& m) {
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

inline Int gcd_of(const Int& a, const Int& b) {
  Int g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

inline Int lcm_of(const Int& a, const Int& b) {
  Int l;
  mpz_lcm(l.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return l;
}

inline std::string to_string(const Int& v) { return v.get_str(); }

inline std::string to_string(const Rat& v) {
  if (v.get_den() == 1) return v.get_num().get_str();
  return v.get_num().get_str() + "/" + v.get_den().get_str();
}

inline Rat parse_rational(const std::string& text) {
  Rat r;
  if (text.empty() || r.set_str(text, 10) != 0 || r.get_den() == 0)
    throw std::invalid_argument("not a rational number: '" + text + "'");
  r.canonicalize();
  return r;
}

inline Int parse_integer(const std::string& text) {
  Int v;
  if (text.empty() || v.set_str(text, 10) != 0)
    throw std::invalid_argument("not an integer: '" + text + "'");
  return v;
}

inline bool fits_long(const Int& v) { return v.fits_slong_p(); }

inline std::size_t to_size(const Int& v) {
  if (sgn(v) < 0 || !v.fits_ulong_p()) throw std::overflow_error("value does not fit a size: " + v.get_str());
  return static_cast<std::size_t>(v.get_ui());
}

}  // namespace graphk0
