#pragma once

#include "graphk0/numeric.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace graphk0 {

/// Number of edges from one vertex to another: a nonnegative integer or
/// infinity. A zero multiplicity is never stored in a Graph.
class Multiplicity {
 public:
  Multiplicity() = default;

  static Multiplicity finite(Int n) {
    if (sgn(n) < 0) throw std::invalid_argument("negative multiplicity");
    Multiplicity m;
    m.count_ = std::move(n);
    return m;
  }
  static Multiplicity infinite() {
    Multiplicity m;
    m.infinite_ = true;
    return m;
  }

  bool is_infinite() const { return infinite_; }
  bool is_zero() const { return !infinite_ && sgn(count_) == 0; }

  // Only meaningful for finite multiplicities.
  const Int& count() const {
    if (infinite_) throw std::logic_error("count() of an infinite multiplicity");
    return count_;
  }

  Multiplicity operator+(const Multiplicity& other) const {
    if (infinite_ || other.infinite_) return infinite();
    return finite(count_ + other.count_);
  }

  friend bool operator==(const Multiplicity& a, const Multiplicity& b) {
    if (a.infinite_ != b.infinite_) return false;
    return a.infinite_ || a.count_ == b.count_;
  }

  std::string to_string() const { return infinite_ ? "inf" : count_.get_str(); }

 private:
  bool infinite_ = false;
  Int count_ = 0;
};

inline bool is_valid_vertex_name(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

/// Finitely presented directed graph: an ordered vertex list and a table of
/// edge multiplicities keyed by (source index, target index).
class Graph {
 public:
  using EdgeKey = std::pair<std::size_t, std::size_t>;
  using EdgeTable = std::map<EdgeKey, Multiplicity>;

  std::size_t add_vertex(const std::string& name) {
    if (!is_valid_vertex_name(name)) throw std::invalid_argument("invalid vertex name '" + name + "'");
    if (index_.count(name) != 0) throw std::invalid_argument("duplicate vertex '" + name + "'");
    index_.emplace(name, names_.size());
    names_.push_back(name);
    return names_.size() - 1;
  }

  // Accumulates onto any existing multiplicity; infinity absorbs.
  void add_edges(std::size_t source, std::size_t target, const Multiplicity& m) {
    check_index(source);
    check_index(target);
    if (m.is_zero()) return;
    auto [it, inserted] = edges_.try_emplace({source, target}, m);
    if (!inserted) it->second = it->second + m;
  }

  void add_edges(const std::string& source, const std::string& target, const Multiplicity& m) {
    add_edges(index_of(source), index_of(target), m);
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& vertices() const { return names_; }
  const std::string& name(std::size_t i) const {
    check_index(i);
    return names_[i];
  }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view name) const {
    auto i = find(name);
    if (!i) throw std::invalid_argument("unknown vertex '" + std::string(name) + "'");
    return *i;
  }

  Multiplicity multiplicity(std::size_t source, std::size_t target) const {
    auto it = edges_.find({source, target});
    return it == edges_.end() ? Multiplicity{} : it->second;
  }

  // Sorted by (source order, target order).
  const EdgeTable& edges() const { return edges_; }

  // Outgoing (target, multiplicity) pairs of a vertex in target order.
  std::vector<std::pair<std::size_t, Multiplicity>> out_edges(std::size_t source) const {
    check_index(source);
    std::vector<std::pair<std::size_t, Multiplicity>> out;
    for (auto it = edges_.lower_bound({source, 0}); it != edges_.end() && it->first.first == source; ++it)
      out.emplace_back(it->first.second, it->second);
    return out;
  }

  friend bool operator==(const Graph& a, const Graph& b) { return a.names_ == b.names_ && a.edges_ == b.edges_; }

 private:
  void check_index(std::size_t i) const {
    if (i >= names_.size()) throw std::out_of_range("vertex index out of range");
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  EdgeTable edges_;
};

enum class VertexClass { Regular, Sink, InfiniteEmitter };

inline const char* to_string(VertexClass c) {
  switch (c) {
    case VertexClass::Regular: return "regular";
    case VertexClass::Sink: return "sink";
    case VertexClass::InfiniteEmitter: return "infinite_emitter";
  }
  return "?";
}

inline VertexClass classify_vertex(const Graph& g, std::size_t v) {
  auto out = g.out_edges(v);
  if (out.empty()) return VertexClass::Sink;
  for (const auto& [target, m] : out)
    if (m.is_infinite()) return VertexClass::InfiniteEmitter;
  return VertexClass::Regular;
}

inline VertexClass classify_vertex(const Graph& g, std::string_view v) { return classify_vertex(g, g.index_of(v)); }

inline bool is_singular(VertexClass c) { return c != VertexClass::Regular; }

/// Vertex matrix split along regular (V) and singular (W) vertices:
/// A_E = (B C; * *). Both index lists keep declaration order.
struct BlockDecomposition {
  std::vector<std::size_t> regular;
  std::vector<std::size_t> singular;
  std::vector<IntVec> b;  // |V| x |V|
  std::vector<IntVec> c;  // |V| x |W|
};

inline BlockDecomposition block_decomposition(const Graph& g) {
  BlockDecomposition d;
  for (std::size_t v = 0; v < g.size(); ++v)
    (is_singular(classify_vertex(g, v)) ? d.singular : d.regular).push_back(v);
  for (std::size_t row : d.regular) {
    IntVec brow, crow;
    for (std::size_t col : d.regular) brow.push_back(g.multiplicity(row, col).count());
    for (std::size_t col : d.singular) crow.push_back(g.multiplicity(row, col).count());
    d.b.push_back(std::move(brow));
    d.c.push_back(std::move(crow));
  }
  return d;
}

struct GraphPredicates {
  bool row_finite = true;
  bool has_loop = false;
  bool is_af = true;
  bool unital = true;
  std::vector<std::size_t> singular_vertices;
};

inline bool has_directed_cycle(const Graph& g) {
  // Kahn's algorithm on the support digraph; self-loops block removal.
  std::vector<std::size_t> indegree(g.size(), 0);
  for (const auto& [key, m] : g.edges()) ++indegree[key.second];
  std::vector<std::size_t> ready;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (indegree[v] == 0) ready.push_back(v);
  std::size_t removed = 0;
  while (!ready.empty()) {
    std::size_t v = ready.back();
    ready.pop_back();
    ++removed;
    for (const auto& [w, m] : g.out_edges(v))
      if (--indegree[w] == 0) ready.push_back(w);
  }
  return removed != g.size();
}

inline GraphPredicates predicates(const Graph& g) {
  GraphPredicates p;
  for (const auto& [key, m] : g.edges())
    if (m.is_infinite()) p.row_finite = false;
  p.has_loop = has_directed_cycle(g);
  p.is_af = !p.has_loop;
  p.unital = true;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (is_singular(classify_vertex(g, v))) p.singular_vertices.push_back(v);
  return p;
}

/// Number of simple loops based at a vertex, saturated at 2.
enum class LoopCount { Zero = 0, One = 1, TwoOrMore = 2 };

inline const char* to_string(LoopCount c) {
  switch (c) {
    case LoopCount::Zero: return "0";
    case LoopCount::One: return "1";
    case LoopCount::TwoOrMore: return ">=2";
  }
  return "?";
}

namespace detail {

inline unsigned saturate2(const Multiplicity& m) {
  if (m.is_infinite() || m.count() >= 2) return 2;
  return static_cast<unsigned>(m.count().get_ui());
}

struct CycleCounter {
  const Graph& g;
  const std::vector<std::vector<std::pair<std::size_t, unsigned>>>& out;
  const std::vector<bool>& reaches_base;
  std::size_t base;
  std::vector<bool> on_path;
  unsigned total = 0;

  void walk(std::size_t v, unsigned weight) {
    for (const auto& [w, m] : out[v]) {
      if (total >= 2) return;
      unsigned next = std::min(2u, weight * m);
      if (w == base) {
        total = std::min(2u, total + next);
      } else if (!on_path[w] && reaches_base[w]) {
        on_path[w] = true;
        walk(w, next);
        on_path[w] = false;
      }
    }
  }
};

}  // namespace detail

/// For each vertex, the number of directed cycles based there whose vertices
/// are pairwise distinct, counted with edge multiplicity and capped at 2.
inline std::vector<LoopCount> simple_loop_census(const Graph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<std::pair<std::size_t, unsigned>>> out(n), in(n);
  for (const auto& [key, m] : g.edges()) {
    out[key.first].emplace_back(key.second, detail::saturate2(m));
    in[key.second].emplace_back(key.first, 0);
  }
  std::vector<LoopCount> census(n, LoopCount::Zero);
  for (std::size_t base = 0; base < n; ++base) {
    std::vector<bool> reaches(n, false);
    std::vector<std::size_t> stack{base};
    reaches[base] = true;
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      for (const auto& [u, unused] : in[v])
        if (!reaches[u]) {
          reaches[u] = true;
          stack.push_back(u);
        }
    }
    detail::CycleCounter counter{g, out, reaches, base, std::vector<bool>(n, false)};
    counter.on_path[base] = true;
    counter.walk(base, 1);
    census[base] = static_cast<LoopCount>(counter.total);
  }
  return census;
}

inline bool satisfies_condition_K(const Graph& g) {
  auto census = simple_loop_census(g);
  return std::none_of(census.begin(), census.end(), [](LoopCount c) { return c == LoopCount::One; });
}

struct DesingularizeTargets {
  bool sinks = true;
  bool infinite_emitters = true;
};

/// Targets of the outgoing edges of v in listing order: finite edges first
/// (declaration order, repeated per multiplicity), then a round-robin over the
/// infinite targets. Returns the first `count` entries.
inline std::vector<std::size_t> edge_listing(const Graph& g, std::size_t v, std::size_t count) {
  std::vector<std::size_t> listing;
  std::vector<std::size_t> infinite_targets;
  for (const auto& [w, m] : g.out_edges(v)) {
    if (m.is_infinite()) {
      infinite_targets.push_back(w);
      continue;
    }
    for (Int k = 0; k < m.count() && listing.size() < count; ++k) listing.push_back(w);
  }
  if (infinite_targets.empty()) return listing;
  for (std::size_t k = 0; listing.size() < count; ++k) listing.push_back(infinite_targets[k % infinite_targets.size()]);
  return listing;
}

inline std::string tail_vertex_name(const Graph& g, const std::string& base, std::size_t j) {
  std::string name = base + "__t" + std::to_string(j);
  while (g.find(name)) name += "_";
  return name;
}

/// Tail attached to one singular vertex by desingularize().
struct TailInfo {
  std::size_t base = 0;                 // vertex in the original graph
  bool emitter = false;                 // infinite emitter (else sink)
  std::vector<std::size_t> vertices;    // t_1 .. t_depth in the new graph
  std::vector<std::size_t> listing;     // targets of e_1 .. e_depth (emitters)
};

struct Desingularization {
  Graph graph;
  std::vector<TailInfo> tails;
};

/// Attaches a tail of `depth` vertices to each selected singular vertex. An
/// infinite emitter's j-th listed edge moves to the (j-1)-th tail vertex and
/// edges past `depth` are dropped; the last tail vertex is a sink. Original
/// vertices keep their ids and indices.
inline Desingularization desingularize_with_tails(const Graph& g, std::size_t depth, DesingularizeTargets targets = {}) {
  if (depth == 0) throw std::invalid_argument("desingularization depth must be at least 1");
  Desingularization out;
  Graph& f = out.graph;
  for (const auto& name : g.vertices()) f.add_vertex(name);
  std::vector<VertexClass> classes;
  for (std::size_t v = 0; v < g.size(); ++v) classes.push_back(classify_vertex(g, v));
  for (std::size_t v = 0; v < g.size(); ++v) {
    bool emitter = classes[v] == VertexClass::InfiniteEmitter && targets.infinite_emitters;
    if (!emitter)
      for (const auto& [w, m] : g.out_edges(v)) f.add_edges(v, w, m);
  }
  const auto one = Multiplicity::finite(1);
  for (std::size_t v = 0; v < g.size(); ++v) {
    bool sink = classes[v] == VertexClass::Sink && targets.sinks;
    bool emitter = classes[v] == VertexClass::InfiniteEmitter && targets.infinite_emitters;
    if (!sink && !emitter) continue;
    TailInfo info;
    info.base = v;
    info.emitter = emitter;
    std::vector<std::size_t> tail{v};
    for (std::size_t j = 1; j <= depth; ++j) tail.push_back(f.add_vertex(tail_vertex_name(f, g.name(v), j)));
    for (std::size_t j = 1; j <= depth; ++j) f.add_edges(tail[j - 1], tail[j], one);
    if (emitter) {
      info.listing = edge_listing(g, v, depth);
      for (std::size_t j = 0; j < info.listing.size(); ++j) f.add_edges(tail[j], info.listing[j], one);
    }
    info.vertices.assign(tail.begin() + 1, tail.end());
    out.tails.push_back(std::move(info));
  }
  return out;
}

inline Graph desingularize(const Graph& g, std::size_t depth, DesingularizeTargets targets = {}) {
  return desingularize_with_tails(g, depth, targets).graph;
}

}  // namespace graphk0
