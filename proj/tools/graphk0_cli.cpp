#include "graphk0.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

using namespace graphk0;

namespace {

constexpr int exit_computed = 0;
constexpr int exit_unknown = 1;
constexpr int exit_usage = 2;

int run(int argc, char** argv) {
  CLI::App app{"Ordered K0 of graph C*-algebras", "graphk0"};
  app.require_subcommand(1, 1);
  bool json = false;
  app.add_flag("--json", json, "Emit JSON reports");
  auto format = [&] { return json ? ReportFormat::Json : ReportFormat::Human; };

  std::string file, file_b, element;
  std::size_t budget = 100000, depth = 0;
  bool extremes = false, sinks = false, emitters = false, unit = false;

  auto* k0 = app.add_subcommand("k0", "Print the K0 presentation");
  k0->add_option("file", file, "Graph file")->required();
  auto* preds = app.add_subcommand("predicates", "Print graph predicates, loop census and Condition (K)");
  preds->add_option("file", file, "Graph file")->required();
  auto* member = app.add_subcommand("member", "Decide positive-cone membership");
  member->add_option("file", file, "Graph file")->required();
  member->add_option("--element", element, "Element as JSON")->required();
  member->add_option("--budget", budget, "Branch-and-bound node budget")->check(CLI::PositiveNumber);
  auto* traces = app.add_subcommand("traces", "Find graph traces");
  traces->add_option("file", file, "Graph file")->required();
  traces->add_flag("--extremes", extremes, "List all extreme traces");
  auto* desing = app.add_subcommand("desing", "Print the truncated desingularization");
  desing->add_option("file", file, "Graph file")->required();
  desing->add_option("--depth", depth, "Tail length")->required()->check(CLI::PositiveNumber);
  desing->add_flag("--sinks", sinks, "Attach tails to sinks");
  desing->add_flag("--emitters", emitters, "Attach tails to infinite emitters");
  auto* compare = app.add_subcommand("compare", "Compare two ordered K0 groups");
  compare->add_option("a", file, "First graph file")->required();
  compare->add_option("b", file_b, "Second graph file")->required();
  compare->add_flag("--unit", unit, "Require the order units to correspond");
  compare->add_option("--budget", budget, "Candidate-map budget")->check(CLI::PositiveNumber);
  auto* consistency = app.add_subcommand("consistency", "Check K0 against a truncated desingularization");
  consistency->add_option("file", file, "Graph file")->required();
  consistency->add_option("--depth", depth, "Tail length")->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (k0->parsed()) {
      std::cout << emit_report(compute_k0(load_graph_file(file).graph), format());
      return exit_computed;
    }
    if (preds->parsed()) {
      std::cout << emit_report(make_predicates_report(load_graph_file(file).graph), format());
      return exit_computed;
    }
    if (member->parsed()) {
      auto k = compute_k0(load_graph_file(file).graph);
      MembershipReport r{&k, parse_element(k, element), Unknown{}};
      r.verdict = cone_membership(k, r.element, budget);
      std::cout << emit_report(r, format());
      return std::holds_alternative<Unknown>(r.verdict) ? exit_unknown : exit_computed;
    }
    if (traces->parsed()) {
      auto g = load_graph_file(file).graph;
      TracesReport r;
      r.vertices = g.vertices();
      if (extremes) r.extremes = extreme_traces(g);
      else r.trace = find_graph_trace(g);
      r.tracial = tracial_state_report(g);
      std::cout << emit_report(r, format());
      return exit_computed;
    }
    if (desing->parsed()) {
      DesingularizeTargets targets{true, true};
      if (sinks || emitters) targets = {sinks, emitters};
      auto g = load_graph_file(file).graph;
      std::cout << emit_report(DesingularizationReport{desingularize(g, depth, targets), depth}, format());
      return exit_computed;
    }
    if (compare->parsed()) {
      auto ka = compute_k0(load_graph_file(file).graph);
      auto kb = compute_k0(load_graph_file(file_b).graph);
      CompareOptions options;
      options.use_order_unit = unit;
      auto verdict = compare_k0(ka, kb, options, budget);
      std::cout << emit_report(verdict, format());
      return std::holds_alternative<ComparisonUnknown>(verdict) ? exit_unknown : exit_computed;
    }
    if (consistency->parsed()) {
      std::cout << emit_report(verify_desingularization_consistency(load_graph_file(file).graph, depth), format());
      return exit_computed;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
