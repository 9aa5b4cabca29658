#include "graphk0/report.hpp"

#include <gtest/gtest.h>

using namespace graphk0;

namespace {

Graph parse(const char* text) { return parse_graph_or_throw(text).graph; }

Json parse_json(const std::string& s) { return Json::parse(s); }

}  // namespace

TEST(Report, K0OfO3) {
  auto j = parse_json(emit_report(compute_k0(parse("vertex v\nedge v v 3\n")), ReportFormat::Json));
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["free_rank"], 0);
  EXPECT_EQ(j["torsion"], Json::array({2}));
  EXPECT_EQ(j["delta"]["v"]["torsion"], Json::array({1}));
  EXPECT_TRUE(j["cone"]["families"].empty());
}

TEST(Report, FamiliesListCapacities) {
  auto j = parse_json(emit_report(compute_k0(parse("vertex v\nvertex w\nedge v w 2\nedge v v inf\n")), ReportFormat::Json));
  const auto& t = j["cone"]["families"][0]["targets"];
  EXPECT_EQ(t[0]["vertex"], "v");
  EXPECT_EQ(t[0]["capacity"], "unbounded");
  EXPECT_EQ(t[1]["capacity"], 2);
}

TEST(Report, UnknownMembership) {
  auto k = compute_k0(parse("vertex v\nvertex w\nedge v v\nedge v w\n"));
  MembershipReport r{&k, k.delta[0], Unknown{1000000, 1000000}};
  auto j = parse_json(emit_report(r, ReportFormat::Json));
  EXPECT_EQ(j["verdict"], "unknown");
  EXPECT_EQ(j["budget"], 1000000);
}

TEST(Report, NotMemberCarriesFunctional) {
  auto k = compute_k0(parse("vertex v\nvertex w\nedge v v\nedge v w\n"));
  Element x = k.coker.negate(k.delta[0]);
  MembershipReport r{&k, x, cone_membership(k, x, 100)};
  auto j = parse_json(emit_report(r, ReportFormat::Json));
  EXPECT_EQ(j["verdict"], "not_member");
  EXPECT_EQ(j["functional"]["v"], "1");
  EXPECT_EQ(j["functional"]["w"], "0");
  EXPECT_NE(emit_report(r, ReportFormat::Human).find("not in the positive cone"), std::string::npos);
}

TEST(Report, EmptyTraceSet) {
  TracesReport r;
  r.vertices = {"v"};
  r.extremes = std::vector<GraphTrace>{};
  auto j = parse_json(emit_report(r, ReportFormat::Json));
  EXPECT_EQ(j["traces"], Json::array());
  EXPECT_EQ(j["tracial_state_report"]["trace_count"], "none");
}

TEST(Report, BigIntegersBecomeStrings) {
  EXPECT_EQ(int_json(Int("9007199254740991")), Json(9007199254740991LL));
  EXPECT_EQ(int_json(Int("9007199254740992")), Json("9007199254740992"));
  EXPECT_EQ(int_json(Int("-9007199254740992")), Json("-9007199254740992"));
  EXPECT_EQ(int_from_json(Json("123456789012345678901234567890")).get_str(), "123456789012345678901234567890");
}

TEST(Report, ParseElementForms) {
  auto k = compute_k0(parse("vertex v\nvertex w\nedge v w 3\nedge w w 3\n"));
  ASSERT_EQ(k.coker.free_rank(), 0u);
  ASSERT_EQ(k.coker.torsion_moduli().size(), 1u);
  auto e = parse_element(k, "{\"torsion\":[\"-1\"]}");
  EXPECT_TRUE(k.coker.conforms(e));
  auto byvertex = parse_element(k, "{\"vertices\":{\"w\":2}}");
  EXPECT_EQ(byvertex, k.coker.scale(k.delta[1], 2));
  EXPECT_THROW(parse_element(k, "{\"torsion\":[1,2]}"), std::invalid_argument);
  EXPECT_THROW(parse_element(k, "[1]"), std::invalid_argument);
  EXPECT_THROW(parse_element(k, "{"), std::invalid_argument);
  EXPECT_THROW(parse_element(k, "{\"vertices\":{\"q\":1}}"), std::invalid_argument);
}

TEST(Report, HumanFormsAreLineOriented) {
  auto g = parse("vertex v\nvertex w\nedge v v\nedge v w\n");
  auto text = emit_report(make_predicates_report(g), ReportFormat::Human);
  EXPECT_NE(text.find("condition (K): no"), std::string::npos);
  EXPECT_NE(text.find("v: regular, simple loops 1"), std::string::npos);
  auto k0 = emit_report(compute_k0(g), ReportFormat::Human);
  EXPECT_EQ(k0.rfind("K0 = Z\n", 0), 0u);
}

TEST(Report, ComparisonAndConsistencyJson) {
  auto a = compute_k0(parse("vertex v\nedge v v 2\n"));
  auto b = compute_k0(parse("vertex v\nedge v v 3\n"));
  auto j = parse_json(emit_report(compare_k0(a, b, CompareOptions{}, 100), ReportFormat::Json));
  EXPECT_EQ(j["verdict"], "not_isomorphic");
  auto c = parse_json(emit_report(verify_desingularization_consistency(parse("vertex v\nedge v v inf\n"), 2), ReportFormat::Json));
  EXPECT_EQ(c["cone_prefix_ok"], true);
}
