#pragma once

#include "graphk0/graph.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace graphk0 {

struct ParseError {
  std::size_t line = 1;
  std::size_t column = 1;
  std::string message;

  std::string to_string() const {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
  }
};

struct GraphDocument {
  Graph graph;
  std::string source_name;
};

using ParseResult = std::variant<GraphDocument, ParseError>;

namespace detail {

struct Token {
  std::string_view text;
  std::size_t column;
};

inline std::vector<Token> split_tokens(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t') {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '#') ++i;
    tokens.push_back({line.substr(start, i - start), start + 1});
  }
  return tokens;
}

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

/// Line-oriented graph format:
///   vertex <id>
///   edge <src> <dst> [<mult>|inf]
/// `#` starts a comment. Repeated edge lines accumulate.
inline ParseResult parse_graph(std::string_view text, std::string source_name = "<input>") {
  GraphDocument doc;
  doc.source_name = std::move(source_name);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto fail = [&](std::size_t column, std::string message) -> ParseResult {
      return ParseError{line_no, column, std::move(message)};
    };

    auto tokens = detail::split_tokens(line);
    if (!tokens.empty()) {
      const auto& head = tokens[0];
      if (head.text == "vertex") {
        if (tokens.size() != 2) return fail(head.column, "expected: vertex <id>");
        std::string name(tokens[1].text);
        if (!is_valid_vertex_name(name)) return fail(tokens[1].column, "invalid vertex id '" + name + "'");
        if (doc.graph.find(name)) return fail(tokens[1].column, "duplicate vertex '" + name + "'");
        doc.graph.add_vertex(name);
      } else if (head.text == "edge") {
        if (tokens.size() < 3 || tokens.size() > 4) return fail(head.column, "expected: edge <src> <dst> [<mult>|inf]");
        std::size_t endpoints[2];
        for (int k = 0; k < 2; ++k) {
          const auto& tok = tokens[1 + k];
          auto idx = doc.graph.find(tok.text);
          if (!idx) return fail(tok.column, "undeclared vertex '" + std::string(tok.text) + "'");
          endpoints[k] = *idx;
        }
        Multiplicity m = Multiplicity::finite(1);
        if (tokens.size() == 4) {
          const auto& tok = tokens[3];
          if (tok.text == "inf") {
            m = Multiplicity::infinite();
          } else if (detail::all_digits(tok.text)) {
            Int n(std::string(tok.text), 10);
            if (sgn(n) == 0) return fail(tok.column, "multiplicity must be positive");
            m = Multiplicity::finite(n);
          } else if (tok.text.size() > 1 && tok.text[0] == '-' && detail::all_digits(tok.text.substr(1))) {
            return fail(tok.column, "multiplicity must be positive");
          } else {
            return fail(tok.column, "bad multiplicity '" + std::string(tok.text) + "'");
          }
        }
        doc.graph.add_edges(endpoints[0], endpoints[1], m);
      } else {
        return fail(head.column, "unexpected token '" + std::string(head.text) + "'");
      }
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return doc;
}

/// Throws std::runtime_error carrying the ParseError text.
inline GraphDocument parse_graph_or_throw(std::string_view text, std::string source_name = "<input>") {
  auto result = parse_graph(text, source_name);
  if (auto* err = std::get_if<ParseError>(&result)) throw std::runtime_error(source_name + ":" + err->to_string());
  return std::get<GraphDocument>(std::move(result));
}

inline GraphDocument load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_graph_or_throw(buffer.str(), path);
}

/// Canonical text: vertices in declaration order, then edges sorted by
/// (source order, target order).
inline std::string serialize_graph(const Graph& g) {
  std::string out;
  for (const auto& name : g.vertices()) out += "vertex " + name + "\n";
  for (const auto& [key, m] : g.edges())
    out += "edge " + g.name(key.first) + " " + g.name(key.second) + " " + m.to_string() + "\n";
  return out;
}

}  // namespace graphk0
