#pragma once

#include "graphk0/feasibility.hpp"
#include "graphk0/graph.hpp"
#include "graphk0/rational_lp.hpp"
#include "graphk0/smith.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace graphk0 {

struct FamilyTarget {
  std::size_t vertex = 0;
  VarCap capacity;  // nullopt: unbounded (infinitely many parallel edges)
};

/// Elements [delta_v] - sum_w n_w [delta_w], 0 <= n_w <= capacity(w), for an
/// infinite emitter v. Never enumerated.
struct EmitterFamily {
  std::size_t emitter = 0;
  std::vector<FamilyTarget> targets;

  bool has_unbounded() const {
    for (const auto& t : targets)
      if (!t.capacity) return true;
    return false;
  }
};

struct ConeSpec {
  std::vector<Element> base;  // indexed by vertex
  std::vector<EmitterFamily> families;
};

/// Ordered K0 of C*(E) as coker(B^t - I; C^t) with generator classes, cone
/// data and order unit. Ambient coordinates list regular vertices first, then
/// singular ones, each in declaration order.
struct K0Presentation {
  std::vector<std::string> vertex_names;
  std::vector<std::size_t> ambient_vertex;  // ambient coordinate -> vertex
  std::vector<std::size_t> ambient_index;   // vertex -> ambient coordinate
  CokerPresentation coker;
  std::vector<Element> delta;  // indexed by vertex
  ConeSpec cone;
  Element order_unit;
  bool row_finite_orthant = false;

  std::size_t vertex_count() const { return vertex_names.size(); }

  IntVec ambient_unit(std::size_t vertex) const { return unit_vector(ambient_vertex.size(), ambient_index.at(vertex)); }

  // Ambient vector from per-vertex coefficients.
  IntVec ambient_from_vertices(const IntVec& per_vertex) const {
    if (per_vertex.size() != vertex_count()) throw std::invalid_argument("per-vertex vector has wrong length");
    IntVec x(ambient_vertex.size(), Int(0));
    for (std::size_t v = 0; v < per_vertex.size(); ++v) x[ambient_index[v]] = per_vertex[v];
    return x;
  }

  IntVec vertices_from_ambient(const IntVec& ambient) const {
    IntVec per_vertex(vertex_count(), Int(0));
    for (std::size_t c = 0; c < ambient.size(); ++c) per_vertex[ambient_vertex[c]] = ambient[c];
    return per_vertex;
  }

  Element project_vertices(const IntVec& per_vertex) const { return coker.project(ambient_from_vertices(per_vertex)); }
};

namespace detail {

inline K0Presentation assemble_presentation(const Graph& g, const std::vector<std::size_t>& v_part,
                                            const std::vector<std::size_t>& w_part, const IntMatrix& relations,
                                            bool orthant) {
  K0Presentation k;
  k.vertex_names = g.vertices();
  k.ambient_vertex = v_part;
  k.ambient_vertex.insert(k.ambient_vertex.end(), w_part.begin(), w_part.end());
  k.ambient_index.assign(g.size(), 0);
  for (std::size_t c = 0; c < k.ambient_vertex.size(); ++c) k.ambient_index[k.ambient_vertex[c]] = c;
  k.coker = cokernel(relations);
  k.order_unit = k.coker.zero();
  for (std::size_t v = 0; v < g.size(); ++v) {
    k.delta.push_back(k.coker.project(k.ambient_unit(v)));
    k.order_unit = k.coker.add(k.order_unit, k.delta.back());
  }
  k.cone.base = k.delta;
  k.row_finite_orthant = orthant;
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (classify_vertex(g, v) != VertexClass::InfiniteEmitter) continue;
    EmitterFamily fam;
    fam.emitter = v;
    for (const auto& [w, m] : g.out_edges(v))
      fam.targets.push_back({w, m.is_infinite() ? VarCap{} : VarCap{m.count()}});
    k.cone.families.push_back(std::move(fam));
  }
  return k;
}

}  // namespace detail

/// General graphs: the cone is the monoid generated by the vertex classes and
/// the infinite-emitter families.
inline K0Presentation compute_k0(const Graph& g) {
  auto blocks = block_decomposition(g);
  const std::size_t nv = blocks.regular.size(), nw = blocks.singular.size();
  IntMatrix m(nv + nw, nv);
  for (std::size_t c = 0; c < nv; ++c) {
    for (std::size_t r = 0; r < nv; ++r) m(r, c) = blocks.b[c][r] - (r == c ? 1 : 0);
    for (std::size_t r = 0; r < nw; ++r) m(nv + r, c) = blocks.c[c][r];
  }
  return detail::assemble_presentation(g, blocks.regular, blocks.singular, m, predicates(g).row_finite);
}

/// Row-finite graphs only: builds (A^t - I) restricted to the non-sink
/// columns straight from the vertex matrix. The cone is the image of the
/// orthant, so no families appear.
inline K0Presentation compute_k0_row_finite(const Graph& g) {
  std::vector<std::size_t> nonsinks, sinks;
  for (std::size_t v = 0; v < g.size(); ++v) {
    auto out = g.out_edges(v);
    for (const auto& [w, mult] : out)
      if (mult.is_infinite())
        throw std::invalid_argument("compute_k0_row_finite: vertex '" + g.name(v) + "' is an infinite emitter");
    (out.empty() ? sinks : nonsinks).push_back(v);
  }
  std::vector<std::size_t> order = nonsinks;
  order.insert(order.end(), sinks.begin(), sinks.end());
  std::vector<std::size_t> position(g.size());
  for (std::size_t c = 0; c < order.size(); ++c) position[order[c]] = c;

  std::vector<IntVec> columns;
  for (std::size_t v : nonsinks) {
    IntVec col(g.size(), Int(0));
    for (const auto& [w, mult] : g.out_edges(v)) col[position[w]] += mult.count();
    col[position[v]] -= 1;
    columns.push_back(std::move(col));
  }
  return detail::assemble_presentation(g, nonsinks, sinks, IntMatrix::from_columns(columns, g.size()), true);
}

// ---------------------------------------------------------------------------
// Cone membership

struct FamilyUse {
  std::size_t emitter = 0;
  Int count = 0;          // number of family elements used (t_v)
  IntVec removed;         // per family target: total n_w over those elements
};

/// x = sum_v base_uses[v] [delta_v] + sum over families of
/// count * [delta_emitter] - sum_w removed[w] [delta_w].
struct MembershipWitness {
  IntVec base_uses;  // per vertex
  std::vector<FamilyUse> family_uses;
};

/// Rational functional given by its values on the vertex classes.
struct SeparatingFunctional {
  RatVec values;  // per vertex
};

struct Member {
  MembershipWitness witness;
};

struct NotMember {
  std::optional<SeparatingFunctional> functional;
  std::string reason;
};

struct Unknown {
  std::size_t budget_spent = 0;
  std::size_t budget = 0;
};

using MembershipVerdict = std::variant<Member, NotMember, Unknown>;

inline Rat evaluate(const K0Presentation& k, const SeparatingFunctional& f, const IntVec& ambient) {
  Rat s = 0;
  for (std::size_t c = 0; c < ambient.size(); ++c) s += f.values[k.ambient_vertex[c]] * ambient[c];
  return s;
}

inline Element evaluate_witness(const K0Presentation& k, const MembershipWitness& w) {
  Element x = k.coker.zero();
  for (std::size_t v = 0; v < w.base_uses.size(); ++v) x = k.coker.add(x, k.coker.scale(k.delta[v], w.base_uses[v]));
  for (const auto& use : w.family_uses) {
    x = k.coker.add(x, k.coker.scale(k.delta[use.emitter], use.count));
    const EmitterFamily* fam = nullptr;
    for (const auto& f : k.cone.families)
      if (f.emitter == use.emitter) fam = &f;
    if (!fam || use.removed.size() != fam->targets.size()) throw std::invalid_argument("witness refers to an unknown family");
    for (std::size_t i = 0; i < fam->targets.size(); ++i)
      x = k.coker.subtract(x, k.coker.scale(k.delta[fam->targets[i].vertex], use.removed[i]));
  }
  return x;
}

inline bool witness_well_formed(const K0Presentation& k, const MembershipWitness& w) {
  if (w.base_uses.size() != k.vertex_count()) return false;
  for (const auto& a : w.base_uses)
    if (sgn(a) < 0) return false;
  for (const auto& use : w.family_uses) {
    if (sgn(use.count) < 0) return false;
    const EmitterFamily* fam = nullptr;
    for (const auto& f : k.cone.families)
      if (f.emitter == use.emitter) fam = &f;
    if (!fam || use.removed.size() != fam->targets.size()) return false;
    for (std::size_t i = 0; i < fam->targets.size(); ++i) {
      const Int& m = use.removed[i];
      if (sgn(m) < 0) return false;
      const auto& cap = fam->targets[i].capacity;
      if (cap ? m > use.count * *cap : (sgn(m) > 0 && sgn(use.count) == 0)) return false;
    }
  }
  return true;
}

/// Functional checks: vanishes on the relations, nonnegative on every base
/// generator, nonnegative on every family element (symbolically through the
/// capacities; unbounded targets must have value 0).
inline bool functional_nonnegative_on_cone(const K0Presentation& k, const SeparatingFunctional& f) {
  if (f.values.size() != k.vertex_count()) return false;
  const IntMatrix& rel = k.coker.relations();
  for (std::size_t c = 0; c < rel.cols(); ++c)
    if (sgn(evaluate(k, f, rel.column(c))) != 0) return false;
  for (const auto& v : f.values)
    if (sgn(v) < 0) return false;
  for (const auto& fam : k.cone.families) {
    Rat slack = f.values[fam.emitter];
    for (const auto& t : fam.targets) {
      if (!t.capacity) {
        if (sgn(f.values[t.vertex]) != 0) return false;
      } else {
        slack -= Rat(*t.capacity) * f.values[t.vertex];
      }
    }
    if (sgn(slack) < 0) return false;
  }
  return true;
}

inline bool verify_membership(const K0Presentation& k, const Element& x, const MembershipVerdict& verdict) {
  if (const auto* m = std::get_if<Member>(&verdict))
    return witness_well_formed(k, m->witness) && evaluate_witness(k, m->witness) == x;
  if (const auto* n = std::get_if<NotMember>(&verdict)) {
    if (!n->functional) return true;  // exhaustive-search proof, nothing to re-check here
    return functional_nonnegative_on_cone(k, *n->functional) && sgn(evaluate(k, *n->functional, k.coker.lift(x))) < 0;
  }
  return true;
}

namespace detail {

// Integer program for x in the cone, in canonical coordinates:
//   sum a_u d_u + sum_v (t_v d_v - sum_w m_vw d_w) - sum_i d_i (k+_i - k-_i) e_i = x
//   m_vw - cap_vw t_v + s_vw = 0          (finite capacities)
struct MembershipProgram {
  IntMatrix a;
  IntVec b;
  std::vector<VarCap> caps;
  struct FamilyVars {
    std::size_t t;
    std::vector<std::size_t> m;
  };
  std::vector<FamilyVars> family_vars;
};

inline MembershipProgram membership_program(const K0Presentation& k, const Element& x) {
  const auto& moduli = k.coker.torsion_moduli();
  const std::size_t nf = k.coker.free_rank(), nt = moduli.size();
  std::size_t cap_rows = 0;
  for (const auto& fam : k.cone.families)
    for (const auto& t : fam.targets)
      if (t.capacity) ++cap_rows;

  std::vector<IntVec> columns;
  std::vector<VarCap> caps;
  const std::size_t rows = nf + nt + cap_rows;
  auto class_column = [&](const Element& e, const Int& sign) {
    IntVec col(rows, Int(0));
    for (std::size_t j = 0; j < nf; ++j) col[j] = sign * e.free[j];
    for (std::size_t i = 0; i < nt; ++i) col[nf + i] = sign * e.torsion[i];
    return col;
  };

  for (std::size_t v = 0; v < k.vertex_count(); ++v) {
    columns.push_back(class_column(k.delta[v], 1));
    caps.emplace_back();
  }
  MembershipProgram prog;
  std::size_t cap_row = nf + nt;
  std::vector<std::pair<std::size_t, std::size_t>> slack_rows;  // (row, unused)
  for (const auto& fam : k.cone.families) {
    MembershipProgram::FamilyVars vars;
    vars.t = columns.size();
    columns.push_back(class_column(k.delta[fam.emitter], 1));
    caps.emplace_back();
    for (const auto& t : fam.targets) {
      IntVec col = class_column(k.delta[t.vertex], -1);
      if (t.capacity) {
        col[cap_row] = 1;
        columns[vars.t][cap_row] = -*t.capacity;
        slack_rows.emplace_back(cap_row, 0);
        ++cap_row;
      }
      vars.m.push_back(columns.size());
      columns.push_back(std::move(col));
      caps.emplace_back();
    }
    prog.family_vars.push_back(std::move(vars));
  }
  for (const auto& [row, unused] : slack_rows) {
    IntVec col(rows, Int(0));
    col[row] = 1;
    columns.push_back(std::move(col));
    caps.emplace_back();
  }
  for (std::size_t i = 0; i < nt; ++i)
    for (int sign : {-1, 1}) {
      IntVec col(rows, Int(0));
      col[nf + i] = sign * moduli[i];
      columns.push_back(std::move(col));
      caps.emplace_back();
    }

  prog.a = IntMatrix::from_columns(columns, rows);
  prog.caps = std::move(caps);
  prog.b.assign(rows, Int(0));
  for (std::size_t j = 0; j < nf; ++j) prog.b[j] = x.free[j];
  for (std::size_t i = 0; i < nt; ++i) prog.b[nf + i] = x.torsion[i];
  return prog;
}

// Looks for a rational functional that is nonnegative on the cone and
// negative on x (normalized to <= -1 on x).
inline std::optional<SeparatingFunctional> separating_functional(const K0Presentation& k, const Element& x) {
  const std::size_t nf = k.coker.free_rank();
  if (nf == 0) return std::nullopt;
  auto free_row = [&](const Element& e) {
    RatVec r(nf);
    for (std::size_t j = 0; j < nf; ++j) r[j] = e.free[j];
    return r;
  };
  LpProblem lp;
  lp.num_vars = nf;
  for (std::size_t v = 0; v < k.vertex_count(); ++v) lp.add(free_row(k.delta[v]), Relation::GreaterEqual, 0);
  for (const auto& fam : k.cone.families) {
    RatVec row = free_row(k.delta[fam.emitter]);
    for (const auto& t : fam.targets) {
      RatVec tr = free_row(k.delta[t.vertex]);
      if (!t.capacity) {
        lp.add(tr, Relation::Equal, 0);
      } else {
        for (std::size_t j = 0; j < nf; ++j) row[j] -= Rat(*t.capacity) * tr[j];
      }
    }
    lp.add(std::move(row), Relation::GreaterEqual, 0);
  }
  lp.add(free_row(x), Relation::LessEqual, -1);
  auto result = rational_lp(lp);
  const auto* feasible = std::get_if<LpFeasible>(&result);
  if (!feasible) return std::nullopt;
  SeparatingFunctional f;
  for (std::size_t v = 0; v < k.vertex_count(); ++v) f.values.push_back(dot(feasible->point, free_row(k.delta[v])));
  return f;
}

}  // namespace detail

/// Decides whether x lies in the positive cone. Member carries a witness,
/// NotMember a separating functional or an exhaustive-search proof, and
/// Unknown reports the spent branch-and-bound budget.
inline MembershipVerdict cone_membership(const K0Presentation& k, const Element& x, std::size_t budget) {
  if (!k.coker.conforms(x)) throw std::invalid_argument("cone_membership: element does not conform to presentation");
  if (budget == 0) throw std::invalid_argument("cone_membership: budget must be positive");
  if (k.coker.is_zero(x)) {
    MembershipWitness w;
    w.base_uses.assign(k.vertex_count(), Int(0));
    return Member{std::move(w)};
  }

  // Families with unbounded targets split into "unused" (t = 0, unbounded
  // removals forced to 0) and "used" (t >= 1) cases.
  auto base = detail::membership_program(k, x);
  std::vector<std::size_t> switchable;
  for (std::size_t f = 0; f < k.cone.families.size(); ++f)
    if (k.cone.families[f].has_unbounded()) switchable.push_back(f);

  std::size_t spent = 0;
  bool all_infeasible = true;
  std::string infeasible_reason;
  for (std::size_t mask = 0; mask < (std::size_t{1} << switchable.size()); ++mask) {
    auto prog = base;
    std::vector<bool> used(k.cone.families.size(), false);
    for (std::size_t s = 0; s < switchable.size(); ++s) used[switchable[s]] = (mask >> s) & 1;
    for (std::size_t f = 0; f < k.cone.families.size(); ++f) {
      const auto& fam = k.cone.families[f];
      const auto& vars = prog.family_vars[f];
      if (!fam.has_unbounded()) continue;
      if (used[f]) {
        for (std::size_t r = 0; r < prog.a.rows(); ++r) prog.b[r] -= prog.a(r, vars.t);
      } else {
        for (std::size_t i = 0; i < fam.targets.size(); ++i)
          if (!fam.targets[i].capacity) prog.caps[vars.m[i]] = Int(0);
      }
    }
    if (spent >= budget) {
      all_infeasible = false;
      break;
    }
    auto res = bounded_nonneg_feasibility(prog.a, prog.b, prog.caps, budget - spent);
    spent += res.nodes;
    if (res.status == FeasibilityStatus::Witness) {
      MembershipWitness w;
      w.base_uses.assign(res.witness.begin(), res.witness.begin() + k.vertex_count());
      for (std::size_t f = 0; f < k.cone.families.size(); ++f) {
        const auto& vars = prog.family_vars[f];
        FamilyUse use;
        use.emitter = k.cone.families[f].emitter;
        use.count = res.witness[vars.t] + (used[f] ? 1 : 0);
        for (std::size_t idx : vars.m) use.removed.push_back(res.witness[idx]);
        bool trivial = sgn(use.count) == 0;
        for (const auto& m : use.removed) trivial = trivial && sgn(m) == 0;
        if (!trivial) w.family_uses.push_back(std::move(use));
      }
      MembershipVerdict verdict = Member{std::move(w)};
      if (!verify_membership(k, x, verdict)) throw std::logic_error("cone_membership: witness failed verification");
      return verdict;
    }
    if (res.status == FeasibilityStatus::Unknown) all_infeasible = false;
    else if (infeasible_reason.empty()) infeasible_reason = res.reason;
  }

  if (auto f = detail::separating_functional(k, x)) {
    MembershipVerdict verdict = NotMember{std::move(*f), "separating functional"};
    if (!verify_membership(k, x, verdict)) throw std::logic_error("cone_membership: functional failed verification");
    return verdict;
  }
  if (all_infeasible) return NotMember{std::nullopt, "integer infeasible: " + infeasible_reason};
  return Unknown{spent, budget};
}

// ---------------------------------------------------------------------------
// Order properties

enum class Tristate { Yes, No, Unknown };

inline const char* to_string(Tristate t) {
  switch (t) {
    case Tristate::Yes: return "yes";
    case Tristate::No: return "no";
    case Tristate::Unknown: return "unknown";
  }
  return "?";
}

struct OrderProperties {
  Tristate cone_is_everything = Tristate::Unknown;
  Tristate cone_pointed = Tristate::Unknown;
  std::optional<Element> non_pointed_witness;            // x != 0 with x, -x in the cone
  std::optional<SeparatingFunctional> pointed_functional;  // strictly positive on nonzero generators
};

inline std::vector<Element> canonical_generators(const CokerPresentation& c) {
  std::vector<Element> gens;
  for (std::size_t i = 0; i < c.torsion_moduli().size(); ++i) {
    Element e = c.zero();
    e.torsion[i] = 1;
    gens.push_back(std::move(e));
  }
  for (std::size_t j = 0; j < c.free_rank(); ++j) {
    Element e = c.zero();
    e.free[j] = 1;
    gens.push_back(std::move(e));
  }
  return gens;
}

namespace detail {

// Maximizes eps subject to f >= eps on every generator class with a nonzero
// free part (and on every family element, symbolically), eps <= 1.
inline std::optional<SeparatingFunctional> strictly_positive_functional(const K0Presentation& k) {
  const std::size_t nf = k.coker.free_rank();
  LpProblem lp;
  lp.num_vars = nf + 1;  // y, eps
  auto row_of = [&](const Element& e) {
    RatVec r(nf + 1, Rat(0));
    for (std::size_t j = 0; j < nf; ++j) r[j] = e.free[j];
    return r;
  };
  auto free_zero = [&](const Element& e) {
    for (const auto& f : e.free)
      if (sgn(f) != 0) return false;
    return true;
  };
  for (std::size_t v = 0; v < k.vertex_count(); ++v) {
    RatVec r = row_of(k.delta[v]);
    if (!free_zero(k.delta[v])) r[nf] = -1;
    lp.add(std::move(r), Relation::GreaterEqual, 0);
  }
  for (const auto& fam : k.cone.families) {
    RatVec r = row_of(k.delta[fam.emitter]);
    for (const auto& t : fam.targets) {
      if (!t.capacity) {
        if (!free_zero(k.delta[t.vertex])) return std::nullopt;
        continue;
      }
      RatVec tr = row_of(k.delta[t.vertex]);
      for (std::size_t j = 0; j < nf; ++j) r[j] -= Rat(*t.capacity) * tr[j];
    }
    r[nf] = -1;
    lp.add(std::move(r), Relation::GreaterEqual, 0);
  }
  RatVec cap(nf + 1, Rat(0));
  cap[nf] = 1;
  lp.add(cap, Relation::LessEqual, 1);
  lp.objective = cap;
  auto result = rational_lp(lp);
  const auto* opt = std::get_if<LpFeasible>(&result);
  if (!opt || sgn(*opt->objective_value) <= 0) return std::nullopt;
  SeparatingFunctional f;
  for (std::size_t v = 0; v < k.vertex_count(); ++v) {
    Rat s = 0;
    for (std::size_t j = 0; j < nf; ++j) s += opt->point[j] * k.delta[v].free[j];
    f.values.push_back(s);
  }
  return f;
}

}  // namespace detail

/// cone_is_everything tests +-g for each canonical generator g. cone_pointed
/// is Yes only with a functional that is strictly positive on every nonzero
/// generator (torsion generators must then be zero), No with an explicit x.
inline OrderProperties order_properties(const K0Presentation& k, std::size_t budget) {
  OrderProperties props;
  const auto& c = k.coker;

  bool any_not = false, any_unknown = false;
  for (const auto& g : canonical_generators(c))
    for (const auto& x : {g, c.negate(g)}) {
      auto v = cone_membership(k, x, budget);
      if (std::holds_alternative<NotMember>(v)) any_not = true;
      if (std::holds_alternative<Unknown>(v)) any_unknown = true;
    }
  props.cone_is_everything = any_not ? Tristate::No : any_unknown ? Tristate::Unknown : Tristate::Yes;

  if (c.free_rank() == 0 && c.torsion_moduli().empty()) {
    props.cone_pointed = Tristate::Yes;
    return props;
  }
  // A nonzero torsion generator class is in cone and -cone.
  for (const auto& d : k.delta)
    if (!c.is_zero(d) && sgn(c.order(d)) > 0) {
      props.cone_pointed = Tristate::No;
      props.non_pointed_witness = d;
      return props;
    }
  // Only generator classes with zero free part would escape the functional,
  // and those are all zero at this point.
  if (auto f = detail::strictly_positive_functional(k)) {
    props.cone_pointed = Tristate::Yes;
    props.pointed_functional = std::move(f);
    return props;
  }
  std::vector<Element> candidates = k.delta;
  for (const auto& fam : k.cone.families) {
    Element e = k.delta[fam.emitter];
    for (const auto& t : fam.targets) e = c.subtract(e, k.delta[t.vertex]);
    candidates.push_back(e);
    Element single = k.delta[fam.emitter];
    if (!fam.targets.empty()) candidates.push_back(c.subtract(single, k.delta[fam.targets.front().vertex]));
  }
  for (const auto& x : candidates) {
    if (c.is_zero(x)) continue;
    if (std::holds_alternative<Member>(cone_membership(k, x, budget)) &&
        std::holds_alternative<Member>(cone_membership(k, c.negate(x), budget))) {
      props.cone_pointed = Tristate::No;
      props.non_pointed_witness = x;
      return props;
    }
  }
  props.cone_pointed = Tristate::Unknown;
  return props;
}

// ---------------------------------------------------------------------------
// Ordered-group comparison

/// Group homomorphism in canonical coordinates:
///   (free, torsion) -> (free_matrix * free, free_to_torsion * free + torsion map)
/// where torsion_images[i] is the image of the i-th torsion generator.
struct GroupMap {
  std::vector<IntVec> free_matrix;        // f x f, rows are target free coordinates
  std::vector<IntVec> free_to_torsion;    // per source free generator: torsion residues in target
  std::vector<IntVec> torsion_images;     // per source torsion generator: torsion residues in target
};

inline Element apply_map(const CokerPresentation& target, const GroupMap& map, const Element& x) {
  Element y = target.zero();
  const std::size_t f = x.free.size();
  for (std::size_t r = 0; r < f; ++r)
    for (std::size_t c = 0; c < f; ++c) y.free[r] += map.free_matrix[r][c] * x.free[c];
  const auto& moduli = target.torsion_moduli();
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    Int s = 0;
    for (std::size_t c = 0; c < f; ++c) s += map.free_to_torsion[c][i] * x.free[c];
    for (std::size_t t = 0; t < x.torsion.size(); ++t) s += map.torsion_images[t][i] * x.torsion[t];
    y.torsion[i] = mod_floor(s, moduli[i]);
  }
  return y;
}

struct IsomorphicCandidate {
  GroupMap map;
  GroupMap inverse;
  std::size_t verified_bound = 0;
};

struct NotIsomorphic {
  std::string reason;
};

struct ComparisonUnknown {
  std::size_t budget_spent = 0;
  std::string note;
};

using ComparisonVerdict = std::variant<NotIsomorphic, IsomorphicCandidate, ComparisonUnknown>;

struct CompareOptions {
  bool use_order_unit = false;
  std::size_t verified_bound = 3;
  std::size_t membership_budget = 20000;
};

namespace detail {

inline std::vector<Element> torsion_elements(const CokerPresentation& c, std::size_t limit) {
  std::vector<Element> out{c.zero()};
  for (std::size_t i = 0; i < c.torsion_moduli().size(); ++i) {
    std::vector<Element> next;
    for (const auto& e : out)
      for (Int r = 0; r < c.torsion_moduli()[i]; ++r) {
        Element x = e;
        x.torsion[i] = r;
        next.push_back(std::move(x));
        if (next.size() > limit) return {};
      }
    out = std::move(next);
  }
  return out;
}

// Family elements [d_v] - sum n_w [d_w] with sum n_w <= bound.
inline std::vector<Element> family_elements(const K0Presentation& k, std::size_t bound) {
  std::vector<Element> out;
  const auto& c = k.coker;
  for (const auto& fam : k.cone.families) {
    std::vector<Int> n(fam.targets.size(), Int(0));
    std::function<void(std::size_t, std::size_t, Element)> rec = [&](std::size_t i, std::size_t left, Element acc) {
      if (i == fam.targets.size()) {
        out.push_back(acc);
        return;
      }
      std::size_t max_here = left;
      if (fam.targets[i].capacity && *fam.targets[i].capacity < Int(static_cast<unsigned long>(max_here)))
        max_here = static_cast<std::size_t>(fam.targets[i].capacity->get_ui());
      for (std::size_t take = 0; take <= max_here; ++take) {
        rec(i + 1, left - take, acc);
        acc = c.subtract(acc, k.delta[fam.targets[i].vertex]);
      }
    };
    rec(0, bound, k.delta[fam.emitter]);
  }
  return out;
}

inline bool is_torsion_bijection(const CokerPresentation& c, const std::vector<Element>& elements,
                                 const std::vector<IntVec>& images) {
  std::vector<IntVec> seen;
  for (const auto& e : elements) {
    IntVec y(c.torsion_moduli().size(), Int(0));
    for (std::size_t i = 0; i < y.size(); ++i) {
      Int s = 0;
      for (std::size_t t = 0; t < e.torsion.size(); ++t) s += images[t][i] * e.torsion[t];
      y[i] = mod_floor(s, c.torsion_moduli()[i]);
    }
    seen.push_back(std::move(y));
  }
  std::sort(seen.begin(), seen.end());
  return std::adjacent_find(seen.begin(), seen.end()) == seen.end();
}

// Integer inverse of a unimodular matrix by Gauss-Jordan over Q.
inline std::optional<std::vector<IntVec>> unimodular_inverse(const std::vector<IntVec>& a) {
  const std::size_t n = a.size();
  std::vector<RatVec> m(n, RatVec(2 * n, Rat(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j];
    m[i][n + i] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(m[p][c]) == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(m[p], m[c]);
    Rat inv = 1 / m[c][c];
    for (auto& v : m[c]) v *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || sgn(m[r][c]) == 0) continue;
      Rat f = m[r][c];
      for (std::size_t j = 0; j < 2 * n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  std::vector<IntVec> out(n, IntVec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!is_integer(m[i][n + j])) return std::nullopt;
      out[i][j] = m[i][n + j].get_num();
    }
  return out;
}

// Inverse of a group isomorphism given the inverse free matrix and the
// inverse of the torsion automorphism (as a lookup over all torsion elements).
inline GroupMap invert_map(const CokerPresentation& source, const CokerPresentation& target, const GroupMap& map,
                           const std::vector<IntVec>& free_inverse) {
  GroupMap inv;
  inv.free_matrix = free_inverse;
  const std::size_t f = source.free_rank();
  const auto torsion_src = torsion_elements(source, SIZE_MAX);
  // torsion part of the inverse: tau' -> tau with D tau = tau'
  auto invert_torsion = [&](const IntVec& residues) -> IntVec {
    for (const auto& e : torsion_src) {
      Element img = apply_map(target, map, e);
      if (img.torsion == residues) return e.torsion;
    }
    throw std::logic_error("invert_map: torsion part is not bijective");
  };
  for (std::size_t t = 0; t < target.torsion_moduli().size(); ++t) {
    IntVec e(target.torsion_moduli().size(), Int(0));
    e[t] = 1;
    inv.torsion_images.push_back(invert_torsion(e));
  }
  // free generator e'_c of target maps to (A^-1 e'_c, -D^-1 C A^-1 e'_c)
  for (std::size_t c = 0; c < f; ++c) {
    Element pre = source.zero();
    for (std::size_t r = 0; r < f; ++r) pre.free[r] = free_inverse[r][c];
    Element img = apply_map(target, map, pre);  // = (e'_c, C A^-1 e'_c)
    IntVec neg(img.torsion.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = mod_floor(-img.torsion[i], target.torsion_moduli()[i]);
    IntVec back = invert_torsion(neg);
    inv.free_to_torsion.push_back(back);
  }
  return inv;
}

}  // namespace detail

/// Staged comparison of ordered K0 groups: group invariants, then a bounded
/// search over group isomorphisms whose cone preservation is checked in both
/// directions on base generators and on family elements up to
/// `verified_bound`.
inline ComparisonVerdict compare_k0(const K0Presentation& k1, const K0Presentation& k2, const CompareOptions& options,
                                    std::size_t budget) {
  const auto& c1 = k1.coker;
  const auto& c2 = k2.coker;
  auto describe = [](const CokerPresentation& c) {
    std::string s = "free_rank " + std::to_string(c.free_rank()) + ", torsion [";
    for (std::size_t i = 0; i < c.torsion_moduli().size(); ++i) s += (i ? "," : "") + c.torsion_moduli()[i].get_str();
    return s + "]";
  };
  if (!c1.same_group(c2)) return NotIsomorphic{"group invariants differ: " + describe(c1) + " vs " + describe(c2)};

  if (options.use_order_unit) {
    Int g1 = 0, g2 = 0;
    for (const auto& v : k1.order_unit.free) g1 = gcd_of(g1, v);
    for (const auto& v : k2.order_unit.free) g2 = gcd_of(g2, v);
    if (g1 != g2) return NotIsomorphic{"order units have different free content: " + g1.get_str() + " vs " + g2.get_str()};
    if (c1.order(k1.order_unit) != c2.order(k2.order_unit)) return NotIsomorphic{"order units have different orders"};
  }

  std::size_t spent = 0;
  auto p1 = order_properties(k1, options.membership_budget);
  auto p2 = order_properties(k2, options.membership_budget);
  auto clash = [](Tristate a, Tristate b) { return a != Tristate::Unknown && b != Tristate::Unknown && a != b; };
  if (clash(p1.cone_is_everything, p2.cone_is_everything))
    return NotIsomorphic{"one positive cone is the whole group and the other is not"};
  if (clash(p1.cone_pointed, p2.cone_pointed)) return NotIsomorphic{"one positive cone is pointed and the other is not"};

  const std::size_t f = c1.free_rank();
  const std::size_t nt = c1.torsion_moduli().size();
  constexpr std::size_t torsion_limit = 4096;
  auto t1 = detail::torsion_elements(c1, torsion_limit);
  auto t2 = detail::torsion_elements(c2, torsion_limit);
  if (t1.empty() || t2.empty()) return ComparisonUnknown{0, "torsion subgroup too large to enumerate"};

  // Torsion automorphism candidates: images of each generator with matching order.
  std::vector<std::vector<IntVec>> torsion_choices;
  {
    std::vector<std::vector<IntVec>> per_gen(nt);
    for (std::size_t i = 0; i < nt; ++i)
      for (const auto& e : t2)
        if (mpz_divisible_p(c1.torsion_moduli()[i].get_mpz_t(), c2.order(e).get_mpz_t())) per_gen[i].push_back(e.torsion);
    std::vector<IntVec> current;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (torsion_choices.size() > budget) return;
      if (i == nt) {
        if (detail::is_torsion_bijection(c2, t1, current)) torsion_choices.push_back(current);
        return;
      }
      for (const auto& img : per_gen[i]) {
        current.push_back(img);
        rec(i + 1);
        current.pop_back();
      }
    };
    rec(0);
  }

  auto family1 = detail::family_elements(k1, options.verified_bound);
  auto family2 = detail::family_elements(k2, options.verified_bound);
  bool saw_unknown = false;

  // Returns true when the candidate preserves the cones in both directions.
  auto check_candidate = [&](const GroupMap& map, const GroupMap& inverse) {
    if (options.use_order_unit && apply_map(c2, map, k1.order_unit) != k2.order_unit) return false;
    auto maps_into = [&](const K0Presentation& from, const K0Presentation& to, const GroupMap& m,
                         const std::vector<Element>& fam) {
      std::vector<Element> gens = from.delta;
      gens.insert(gens.end(), fam.begin(), fam.end());
      for (const auto& g : gens) {
        auto v = cone_membership(to, apply_map(to.coker, m, g), options.membership_budget);
        if (std::holds_alternative<NotMember>(v)) return false;
        if (std::holds_alternative<Unknown>(v)) {
          saw_unknown = true;
          return false;
        }
      }
      return true;
    };
    return maps_into(k1, k2, map, family1) && maps_into(k2, k1, inverse, family2);
  };

  // Free-part matrices ordered by max-entry bound; identity first.
  const bool exhaustive_free = f <= 1;
  const std::size_t max_bound = f <= 1 ? 1 : 64;
  std::vector<IntVec> free_to_torsion_zero(f, IntVec(nt, Int(0)));
  for (std::size_t bound = 1; bound <= max_bound; ++bound) {
    std::vector<std::vector<IntVec>> matrices;
    if (bound == 1) {
      std::vector<IntVec> id(f, IntVec(f, Int(0)));
      for (std::size_t i = 0; i < f; ++i) id[i][i] = 1;
      matrices.push_back(id);
    }
    std::vector<IntVec> m(f, IntVec(f, Int(0)));
    std::function<void(std::size_t, bool)> gen = [&](std::size_t pos, bool hit_bound) {
      if (matrices.size() > budget) return;
      if (pos == f * f) {
        if (!hit_bound) return;
        Int det = determinant(IntMatrix::from_rows(m, f));
        if (det == 1 || det == -1) matrices.push_back(m);
        return;
      }
      const long b = static_cast<long>(bound);
      for (long v = -b; v <= b; ++v) {
        m[pos / f][pos % f] = v;
        gen(pos + 1, hit_bound || std::labs(v) == b);
      }
      m[pos / f][pos % f] = 0;
    };
    if (f > 0) gen(0, false);
    if (bound == 1 && f > 0) {
      // Drop the duplicate identity produced by the generator.
      for (std::size_t i = 1; i < matrices.size(); ++i)
        if (matrices[i] == matrices[0]) {
          matrices.erase(matrices.begin() + static_cast<long>(i));
          break;
        }
    }

    for (const auto& a : matrices) {
      auto a_inv = detail::unimodular_inverse(a);
      if (!a_inv) continue;
      // free -> torsion parts: every assignment of torsion elements to free generators.
      std::vector<std::size_t> pick(f, 0);
      for (;;) {
        for (const auto& d : torsion_choices) {
          if (spent >= budget) return ComparisonUnknown{spent, "budget exhausted"};
          ++spent;
          GroupMap map;
          map.free_matrix = a;
          map.torsion_images = d;
          for (std::size_t c = 0; c < f; ++c) map.free_to_torsion.push_back(t2[pick[c]].torsion);
          GroupMap inverse = detail::invert_map(c1, c2, map, *a_inv);
          if (check_candidate(map, inverse)) return IsomorphicCandidate{map, inverse, options.verified_bound};
        }
        std::size_t c = 0;
        while (c < f && ++pick[c] == t2.size()) pick[c++] = 0;
        if (c == f) break;
      }
    }
    if (f == 0) break;
  }
  if (exhaustive_free && !saw_unknown)
    return NotIsomorphic{"no group isomorphism preserves the positive cones" +
                         std::string(options.use_order_unit ? " and order units" : "")};
  return ComparisonUnknown{spent, exhaustive_free ? "some cone checks were inconclusive" : "search bound reached"};
}

// ---------------------------------------------------------------------------
// Desingularization consistency

struct ConsistencyReport {
  bool groups_match = false;
  bool generator_correspondence_ok = false;
  bool cone_prefix_ok = false;
  std::size_t tail_classes_checked = 0;
  std::size_t family_elements_checked = 0;
};

/// Compares K0 of the graph with K0 of its depth-truncated desingularization
/// under the identification that sends a tail vertex t_j of an emitter v to
/// [delta_v] - sum_{i<=j} [delta_{r(e_i)}] (and a sink's tail to the sink).
inline ConsistencyReport verify_desingularization_consistency(const Graph& g, std::size_t depth,
                                                              std::size_t budget = 100000) {
  if (depth == 0) throw std::invalid_argument("consistency depth must be at least 1");
  const auto k1 = compute_k0(g);
  const auto desing = desingularize_with_tails(g, depth, {true, true});
  const auto k2 = compute_k0_row_finite(desing.graph);
  ConsistencyReport report;
  report.groups_match = k1.coker.same_group(k2.coker);
  const std::size_t n = g.size();
  const std::size_t n2 = desing.graph.size();

  // Per-vertex image in Z^{E^0} of every vertex of F.
  std::vector<IntVec> psi(n2, IntVec(n, Int(0)));
  for (std::size_t u = 0; u < n; ++u) psi[u][u] = 1;
  for (const auto& tail : desing.tails) {
    IntVec cur = unit_vector(n, tail.base);
    for (std::size_t j = 0; j < tail.vertices.size(); ++j) {
      if (tail.emitter) cur[tail.listing[j]] -= 1;
      psi[tail.vertices[j]] = cur;
    }
  }
  auto psi_ambient = [&](const IntVec& per_vertex_f) {
    IntVec out(n, Int(0));
    for (std::size_t u = 0; u < n2; ++u)
      if (sgn(per_vertex_f[u]) != 0)
        for (std::size_t v = 0; v < n; ++v) out[v] += per_vertex_f[u] * psi[u][v];
    return out;
  };
  // Induced maps on canonical coordinates: psi (K2 -> K1) and phi (K1 -> K2).
  auto psi_class = [&](const Element& e2) {
    return k1.project_vertices(psi_ambient(k2.vertices_from_ambient(k2.coker.lift(e2))));
  };
  auto phi_class = [&](const Element& e1) {
    IntVec per_vertex = k1.vertices_from_ambient(k1.coker.lift(e1));
    per_vertex.resize(n2, Int(0));
    return k2.project_vertices(per_vertex);
  };

  bool ok = report.groups_match;
  if (ok) {
    const IntMatrix& rel2 = k2.coker.relations();
    for (std::size_t c = 0; c < rel2.cols() && ok; ++c)
      if (!k1.coker.is_zero(k1.project_vertices(psi_ambient(k2.vertices_from_ambient(rel2.column(c)))))) ok = false;
    const IntMatrix& rel1 = k1.coker.relations();
    for (std::size_t c = 0; c < rel1.cols() && ok; ++c) {
      IntVec per_vertex = k1.vertices_from_ambient(rel1.column(c));
      per_vertex.resize(n2, Int(0));
      if (!k2.coker.is_zero(k2.project_vertices(per_vertex))) ok = false;
    }
    for (std::size_t u = 0; u < n && ok; ++u)
      if (psi_class(k2.delta[u]) != k1.delta[u] || phi_class(k1.delta[u]) != k2.delta[u]) ok = false;
    for (const auto& gen : canonical_generators(k1.coker))
      if (ok && psi_class(phi_class(gen)) != gen) ok = false;
    for (const auto& gen : canonical_generators(k2.coker))
      if (ok && phi_class(psi_class(gen)) != gen) ok = false;
    for (const auto& tail : desing.tails) {
      Element expected = k1.delta[tail.base];
      for (std::size_t j = 0; j < tail.vertices.size() && ok; ++j) {
        if (tail.emitter) expected = k1.coker.subtract(expected, k1.delta[tail.listing[j]]);
        if (psi_class(k2.delta[tail.vertices[j]]) != expected) ok = false;
      }
    }
  }
  report.generator_correspondence_ok = ok;

  bool cone_ok = ok;
  if (cone_ok) {
    for (const auto& tail : desing.tails)
      for (std::size_t t : tail.vertices) {
        ++report.tail_classes_checked;
        if (!std::holds_alternative<Member>(cone_membership(k1, psi_class(k2.delta[t]), budget))) cone_ok = false;
      }
    for (const auto& tail : desing.tails) {
      if (!tail.emitter) continue;
      const std::size_t len = tail.listing.size();
      for (std::size_t mask = 0; mask < (std::size_t{1} << len) && cone_ok; ++mask) {
        IntVec per_vertex(n2, Int(0));
        per_vertex[tail.base] += 1;
        for (std::size_t j = 0; j < len; ++j)
          if ((mask >> j) & 1) per_vertex[tail.listing[j]] -= 1;
        ++report.family_elements_checked;
        if (!std::holds_alternative<Member>(cone_membership(k2, k2.project_vertices(per_vertex), budget))) cone_ok = false;
      }
    }
  }
  report.cone_prefix_ok = cone_ok;
  return report;
}

}  // namespace graphk0
