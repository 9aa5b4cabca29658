#pragma once

#include "graphk0/graph.hpp"
#include "graphk0/graph_io.hpp"
#include "graphk0/ktheory.hpp"
#include "graphk0/traces.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace graphk0 {

enum class ReportFormat { Human, Json };

inline constexpr int report_schema_version = 1;

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// JSON scalars

inline Json int_json(const Int& v) {
  static const Int safe = Int("9007199254740991");
  if (abs(v) <= safe) return Json(v.get_si());
  return Json(v.get_str());
}

inline Json rat_json(const Rat& v) { return Json(to_string(v)); }

inline Json int_array(const IntVec& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(int_json(x));
  return a;
}

inline Json element_json(const Element& e) {
  return Json{{"free", int_array(e.free)}, {"torsion", int_array(e.torsion)}};
}

inline Json group_json(const CokerPresentation& c) {
  return Json{{"free_rank", c.free_rank()}, {"torsion", int_array(c.torsion_moduli())}};
}

inline Json per_vertex_rat(const std::vector<std::string>& names, const RatVec& values) {
  Json o = Json::object();
  for (std::size_t v = 0; v < names.size(); ++v) o[names[v]] = rat_json(values[v]);
  return o;
}

inline Json per_vertex_int(const std::vector<std::string>& names, const IntVec& values) {
  Json o = Json::object();
  for (std::size_t v = 0; v < names.size(); ++v) o[names[v]] = int_json(values[v]);
  return o;
}

// JSON integers may arrive as numbers or decimal strings.
inline Int int_from_json(const Json& j) {
  if (j.is_number_integer()) return Int(std::to_string(j.get<long long>()));
  if (j.is_number_unsigned()) return Int(std::to_string(j.get<unsigned long long>()));
  if (j.is_string()) return parse_integer(j.get<std::string>());
  throw std::invalid_argument("expected an integer, got " + j.dump());
}

/// Accepts {"free": [...], "torsion": [...]} (missing parts are zero) or
/// {"vertices": {"v": n, ...}} with per-vertex ambient coefficients.
inline Element parse_element(const K0Presentation& k, const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("element is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("element must be a JSON object");
  const auto& c = k.coker;
  if (j.contains("vertices")) {
    const auto& vj = j["vertices"];
    if (!vj.is_object()) throw std::invalid_argument("\"vertices\" must be an object");
    IntVec per_vertex(k.vertex_count(), Int(0));
    for (const auto& [name, value] : vj.items()) {
      std::size_t idx = k.vertex_count();
      for (std::size_t v = 0; v < k.vertex_count(); ++v)
        if (k.vertex_names[v] == name) idx = v;
      if (idx == k.vertex_count()) throw std::invalid_argument("unknown vertex '" + name + "'");
      per_vertex[idx] = int_from_json(value);
    }
    return k.project_vertices(per_vertex);
  }
  Element e = c.zero();
  auto read = [&](const char* key, IntVec& dest) {
    if (!j.contains(key)) return;
    const auto& arr = j[key];
    if (!arr.is_array() || arr.size() != dest.size())
      throw std::invalid_argument(std::string("\"") + key + "\" must be an array of length " + std::to_string(dest.size()));
    for (std::size_t i = 0; i < dest.size(); ++i) dest[i] = int_from_json(arr[i]);
  };
  read("free", e.free);
  read("torsion", e.torsion);
  for (std::size_t i = 0; i < e.torsion.size(); ++i) e.torsion[i] = mod_floor(e.torsion[i], c.torsion_moduli()[i]);
  return e;
}

// ---------------------------------------------------------------------------
// Human-readable pieces

inline std::string describe_group(const CokerPresentation& c) {
  std::vector<std::string> parts;
  for (const auto& d : c.torsion_moduli()) parts.push_back("Z/" + d.get_str());
  if (c.free_rank() == 1) parts.push_back("Z");
  else if (c.free_rank() > 1) parts.push_back("Z^" + std::to_string(c.free_rank()));
  if (parts.empty()) return "0";
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " + " : "") + parts[i];
  return s;
}

inline std::string describe_vector(const IntVec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].get_str();
  return s + ")";
}

inline std::string describe_element(const Element& e) {
  return "free " + describe_vector(e.free) + " torsion " + describe_vector(e.torsion);
}

inline std::string describe_rat_vector(const std::vector<std::string>& names, const RatVec& values) {
  std::string s;
  for (std::size_t v = 0; v < names.size(); ++v) s += (v ? ", " : "") + names[v] + "=" + to_string(values[v]);
  return s;
}

inline Json with_schema(Json body) {
  Json out{{"schema_version", report_schema_version}};
  for (auto& [key, value] : body.items()) out[key] = value;
  return out;
}

inline std::string finish(const Json& j) { return with_schema(j).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// K0

inline Json k0_json(const K0Presentation& k) {
  Json j = group_json(k.coker);
  Json delta = Json::object();
  for (std::size_t v = 0; v < k.vertex_count(); ++v) delta[k.vertex_names[v]] = element_json(k.delta[v]);
  j["vertices"] = k.vertex_names;
  j["delta"] = delta;
  j["order_unit"] = element_json(k.order_unit);
  Json base = Json::array();
  for (const auto& b : k.cone.base) base.push_back(element_json(b));
  Json families = Json::array();
  for (const auto& fam : k.cone.families) {
    Json targets = Json::array();
    for (const auto& t : fam.targets)
      targets.push_back({{"vertex", k.vertex_names[t.vertex]},
                         {"capacity", t.capacity ? int_json(*t.capacity) : Json("unbounded")}});
    families.push_back({{"emitter", k.vertex_names[fam.emitter]}, {"targets", targets}});
  }
  j["cone"] = {{"base", base}, {"families", families}};
  return j;
}

inline std::string emit_report(const K0Presentation& k, ReportFormat format) {
  if (format == ReportFormat::Json) return finish(k0_json(k));
  std::ostringstream out;
  out << "K0 = " << describe_group(k.coker) << "\n";
  out << "free rank: " << k.coker.free_rank() << "\n";
  out << "torsion: " << describe_vector(k.coker.torsion_moduli()) << "\n";
  for (std::size_t v = 0; v < k.vertex_count(); ++v)
    out << "[" << k.vertex_names[v] << "] = " << describe_element(k.delta[v]) << "\n";
  out << "order unit: " << describe_element(k.order_unit) << "\n";
  out << "positive cone: generated by the vertex classes";
  if (k.cone.families.empty()) {
    out << "\n";
  } else {
    out << " and\n";
    for (const auto& fam : k.cone.families) {
      out << "  [" << k.vertex_names[fam.emitter] << "] - sum n_w [w] with";
      for (const auto& t : fam.targets)
        out << (&t == &fam.targets.front() ? " " : ", ") << "n_" << k.vertex_names[t.vertex]
            << " <= " << (t.capacity ? t.capacity->get_str() : std::string("inf"));
      out << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Predicates

struct PredicatesReport {
  std::vector<std::string> vertices;
  GraphPredicates predicates;
  std::vector<VertexClass> classes;
  std::vector<LoopCount> census;
  bool condition_k = false;
};

inline PredicatesReport make_predicates_report(const Graph& g) {
  PredicatesReport r;
  r.vertices = g.vertices();
  r.predicates = predicates(g);
  for (std::size_t v = 0; v < g.size(); ++v) r.classes.push_back(classify_vertex(g, v));
  r.census = simple_loop_census(g);
  r.condition_k = satisfies_condition_K(g);
  return r;
}

inline std::string emit_report(const PredicatesReport& r, ReportFormat format) {
  const auto& p = r.predicates;
  if (format == ReportFormat::Json) {
    Json singular = Json::array();
    for (auto v : p.singular_vertices) singular.push_back(r.vertices[v]);
    Json classes = Json::object(), census = Json::object();
    for (std::size_t v = 0; v < r.vertices.size(); ++v) {
      classes[r.vertices[v]] = to_string(r.classes[v]);
      census[r.vertices[v]] = to_string(r.census[v]);
    }
    return finish({{"row_finite", p.row_finite},
                   {"has_loop", p.has_loop},
                   {"is_af", p.is_af},
                   {"unital", p.unital},
                   {"singular_vertices", singular},
                   {"vertex_classes", classes},
                   {"loop_census", census},
                   {"condition_K", r.condition_k}});
  }
  std::ostringstream out;
  auto yn = [](bool b) { return b ? "yes" : "no"; };
  out << "row-finite: " << yn(p.row_finite) << "\n";
  out << "has loop: " << yn(p.has_loop) << "\n";
  out << "AF: " << yn(p.is_af) << "\n";
  out << "unital: " << yn(p.unital) << "\n";
  out << "condition (K): " << yn(r.condition_k) << "\n";
  for (std::size_t v = 0; v < r.vertices.size(); ++v)
    out << r.vertices[v] << ": " << to_string(r.classes[v]) << ", simple loops " << to_string(r.census[v]) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Membership

struct MembershipReport {
  const K0Presentation* presentation = nullptr;
  Element element;
  MembershipVerdict verdict;
};

inline Json membership_json(const K0Presentation& k, const MembershipVerdict& verdict) {
  if (const auto* m = std::get_if<Member>(&verdict)) {
    Json uses = Json::array();
    for (const auto& u : m->witness.family_uses) {
      const EmitterFamily* fam = nullptr;
      for (const auto& f : k.cone.families)
        if (f.emitter == u.emitter) fam = &f;
      Json removed = Json::object();
      for (std::size_t i = 0; i < u.removed.size(); ++i) removed[k.vertex_names[fam->targets[i].vertex]] = int_json(u.removed[i]);
      uses.push_back({{"emitter", k.vertex_names[u.emitter]}, {"count", int_json(u.count)}, {"removed", removed}});
    }
    return {{"verdict", "member"},
            {"witness", {{"base", per_vertex_int(k.vertex_names, m->witness.base_uses)}, {"families", uses}}}};
  }
  if (const auto* n = std::get_if<NotMember>(&verdict)) {
    Json j{{"verdict", "not_member"}, {"reason", n->reason}};
    j["functional"] = n->functional ? per_vertex_rat(k.vertex_names, n->functional->values) : Json(nullptr);
    return j;
  }
  const auto& u = std::get<Unknown>(verdict);
  return {{"verdict", "unknown"}, {"budget", u.budget}};
}

inline std::string emit_report(const MembershipReport& r, ReportFormat format) {
  const auto& k = *r.presentation;
  if (format == ReportFormat::Json) {
    Json j{{"element", element_json(r.element)}};
    Json verdict = membership_json(k, r.verdict);
    for (auto& [key, value] : verdict.items()) j[key] = value;
    return finish(j);
  }
  std::ostringstream out;
  out << "element: " << describe_element(r.element) << "\n";
  if (const auto* m = std::get_if<Member>(&r.verdict)) {
    out << "in the positive cone\n";
    out << "witness: " << describe_rat_vector(k.vertex_names, RatVec(m->witness.base_uses.begin(), m->witness.base_uses.end()))
        << "\n";
    for (const auto& u : m->witness.family_uses) {
      out << "  plus " << u.count.get_str() << " x [" << k.vertex_names[u.emitter] << "]";
      const EmitterFamily* fam = nullptr;
      for (const auto& f : k.cone.families)
        if (f.emitter == u.emitter) fam = &f;
      for (std::size_t i = 0; i < u.removed.size(); ++i)
        if (sgn(u.removed[i]) != 0) out << " - " << u.removed[i].get_str() << " x [" << k.vertex_names[fam->targets[i].vertex] << "]";
      out << "\n";
    }
  } else if (const auto* n = std::get_if<NotMember>(&r.verdict)) {
    out << "not in the positive cone (" << n->reason << ")\n";
    if (n->functional) out << "functional: " << describe_rat_vector(k.vertex_names, n->functional->values) << "\n";
  } else {
    out << "unknown: search budget of " << std::get<Unknown>(r.verdict).budget << " nodes exhausted\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Traces

struct TracesReport {
  std::vector<std::string> vertices;
  std::optional<TraceResult> trace;                // plain mode
  std::optional<std::vector<GraphTrace>> extremes;  // --extremes
  TracialStateReport tracial;
};

inline Json trace_json(const std::vector<std::string>& names, const GraphTrace& t) {
  return {{"values", per_vertex_rat(names, t.values)}, {"norm", rat_json(t.norm)}};
}

inline Json tracial_json(const TracialStateReport& r) {
  Json count;
  switch (r.trace_count) {
    case TraceCount::None: count = "none"; break;
    case TraceCount::Finite: count = {{"finite", r.finite_count}}; break;
    case TraceCount::Infinite: count = "infinite"; break;
  }
  return {{"condition_K", r.condition_k}, {"trace_state_identification", r.identification}, {"trace_count", count}};
}

inline std::string emit_report(const TracesReport& r, ReportFormat format) {
  if (format == ReportFormat::Json) {
    Json j = Json::object();
    if (r.extremes) {
      Json arr = Json::array();
      for (const auto& t : *r.extremes) arr.push_back(trace_json(r.vertices, t));
      j["traces"] = arr;
    }
    if (r.trace) {
      if (const auto* t = std::get_if<GraphTrace>(&*r.trace)) {
        j["verdict"] = "trace";
        j["trace"] = trace_json(r.vertices, *t);
      } else {
        Json cert = Json::array();
        for (const auto& y : std::get<NoTrace>(*r.trace).certificate) cert.push_back(rat_json(y));
        j["verdict"] = "no_trace";
        j["certificate"] = cert;
      }
    }
    j["tracial_state_report"] = tracial_json(r.tracial);
    return finish(j);
  }
  std::ostringstream out;
  if (r.extremes) {
    if (r.extremes->empty()) out << "no graph trace of norm 1\n";
    else out << r.extremes->size() << " extreme trace" << (r.extremes->size() == 1 ? "" : "s") << "\n";
    for (const auto& t : *r.extremes) out << "  " << describe_rat_vector(r.vertices, t.values) << "\n";
  }
  if (r.trace) {
    if (const auto* t = std::get_if<GraphTrace>(&*r.trace)) out << "graph trace: " << describe_rat_vector(r.vertices, t->values) << "\n";
    else out << "no graph trace of norm 1\n";
  }
  out << "condition (K): " << (r.tracial.condition_k ? "yes" : "no") << "\n";
  out << "tracial states: " << r.tracial.identification << "\n";
  out << "trace count: ";
  switch (r.tracial.trace_count) {
    case TraceCount::None: out << "none\n"; break;
    case TraceCount::Finite: out << r.tracial.finite_count << "\n"; break;
    case TraceCount::Infinite: out << "infinite\n"; break;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Desingularization

struct DesingularizationReport {
  Graph graph;
  std::size_t depth = 0;
};

inline std::string emit_report(const DesingularizationReport& r, ReportFormat format) {
  if (format == ReportFormat::Json)
    return finish({{"depth", r.depth}, {"vertices", r.graph.size()}, {"graph", serialize_graph(r.graph)}});
  return serialize_graph(r.graph);
}

// ---------------------------------------------------------------------------
// Comparison

inline Json group_map_json(const GroupMap& m) {
  Json free = Json::array(), ft = Json::array(), ti = Json::array();
  for (const auto& row : m.free_matrix) free.push_back(int_array(row));
  for (const auto& row : m.free_to_torsion) ft.push_back(int_array(row));
  for (const auto& row : m.torsion_images) ti.push_back(int_array(row));
  return {{"free_matrix", free}, {"free_to_torsion", ft}, {"torsion_images", ti}};
}

inline std::string emit_report(const ComparisonVerdict& v, ReportFormat format) {
  if (format == ReportFormat::Json) {
    if (const auto* n = std::get_if<NotIsomorphic>(&v)) return finish({{"verdict", "not_isomorphic"}, {"reason", n->reason}});
    if (const auto* c = std::get_if<IsomorphicCandidate>(&v))
      return finish({{"verdict", "isomorphic_candidate"},
                     {"map", group_map_json(c->map)},
                     {"inverse", group_map_json(c->inverse)},
                     {"verified_bound", c->verified_bound}});
    const auto& u = std::get<ComparisonUnknown>(v);
    return finish({{"verdict", "unknown"}, {"budget_spent", u.budget_spent}, {"note", u.note}});
  }
  std::ostringstream out;
  if (const auto* n = std::get_if<NotIsomorphic>(&v)) {
    out << "not isomorphic: " << n->reason << "\n";
  } else if (const auto* c = std::get_if<IsomorphicCandidate>(&v)) {
    out << "isomorphic candidate (cones checked up to family parameter " << c->verified_bound << ")\n";
    out << "free part:";
    for (const auto& row : c->map.free_matrix) out << " " << describe_vector(row);
    out << "\ntorsion images:";
    for (const auto& row : c->map.torsion_images) out << " " << describe_vector(row);
    out << "\n";
  } else {
    const auto& u = std::get<ComparisonUnknown>(v);
    out << "unknown: " << u.note << " after " << u.budget_spent << " candidate maps\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Consistency

inline std::string emit_report(const ConsistencyReport& r, ReportFormat format) {
  if (format == ReportFormat::Json)
    return finish({{"groups_match", r.groups_match},
                   {"generator_correspondence_ok", r.generator_correspondence_ok},
                   {"cone_prefix_ok", r.cone_prefix_ok},
                   {"tail_classes_checked", r.tail_classes_checked},
                   {"family_elements_checked", r.family_elements_checked}});
  std::ostringstream out;
  auto ok = [](bool b) { return b ? "ok" : "FAILED"; };
  out << "groups match: " << ok(r.groups_match) << "\n";
  out << "generator correspondence: " << ok(r.generator_correspondence_ok) << "\n";
  out << "cone prefix: " << ok(r.cone_prefix_ok) << " (" << r.tail_classes_checked << " tail classes, "
      << r.family_elements_checked << " family elements)\n";
  return out.str();
}

}  // namespace graphk0
