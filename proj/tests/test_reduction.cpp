#include <gtest/gtest.h>

#include <random>

#include "modmorph/fixtures.hpp"
#include "modmorph/reduction.hpp"
#include "oracle.hpp"

using namespace modmorph;

namespace {

ModuleGraph replay_all(const ReductionResult& r) {
  ModuleGraph g = r.residual_graph;
  for (const auto& s : r.steps) g = apply_morph(g, s);
  return g;
}

ModuleGraph rename_edges(const ModuleGraph& m, const std::string& prefix) {
  std::vector<Edge> edges;
  for (const auto& e : m.edges()) edges.push_back({prefix + e.id, e.from, e.to, e.kernel, e.filter});
  return ModuleGraph(m.vertices(), edges, m.source(), m.sink());
}

}  // namespace

TEST(CheckTypeI, ChainAndResnet) {
  const ModuleGraph chain({{"s", 2}, {"a", 3}, {"t", 2}},
                          {{"e1", "s", "a", {1, 1}, {}}, {"e2", "a", "t", {3, 3}, {}}}, "s", "t");
  const auto step = check_type_i(chain);
  ASSERT_TRUE(step);
  EXPECT_EQ(step->kind, MorphKind::kTypeI);
  EXPECT_EQ(step->child_edges[0].id, "e1");
  EXPECT_EQ(step->child_edges[1].id, "e2");
  EXPECT_EQ(step->parent_edge.kernel, (KernelShape{3, 3}));
  ASSERT_TRUE(step->intermediate_vertex);
  EXPECT_EQ(step->intermediate_vertex->channels, 3);
  EXPECT_TRUE(check_type_i(fixtures::resnet_module()));
}

TEST(CheckTypeII, ParallelPair) {
  const ModuleGraph two({{"s", 1}, {"t", 1}}, {{"a", "s", "t", {1, 1}, {}}, {"b", "s", "t", {3, 1}, {}}}, "s", "t");
  const auto step = check_type_ii(two);
  ASSERT_TRUE(step);
  EXPECT_EQ(step->parent_edge.kernel, (KernelShape{3, 1}));
  const auto merged = apply_reduction(two, *step);
  EXPECT_TRUE(merged.is_single_edge());
  EXPECT_TRUE(validate(merged).ok());
}

TEST(CheckBoth, ModuleDIsIrreducible) {
  EXPECT_FALSE(check_type_i(fixtures::module_d()));
  EXPECT_FALSE(check_type_ii(fixtures::module_d()));
}

TEST(Reduce, FixtureClassifications) {
  for (const auto& name : fixtures::names()) {
    EXPECT_EQ(classify(*fixtures::by_name(name)), fixtures::expected_classification(name)) << name;
  }
  const auto d = reduce(fixtures::module_d());
  EXPECT_EQ(d.classification, Classification::kComplex);
  EXPECT_TRUE(d.steps.empty());
  EXPECT_EQ(d.residual_graph.edges().size(), 7u);
  const auto m0 = reduce(fixtures::m0());
  EXPECT_EQ(m0.classification, Classification::kSimpleMorphable);
  EXPECT_TRUE(m0.steps.empty());
}

TEST(Reduce, ModuleCUsesBothKindsInterleaved) {
  const auto r = reduce(fixtures::module_c());
  ASSERT_EQ(r.steps.size(), 5u);
  int type_ii = 0;
  for (const auto& s : r.steps) type_ii += s.kind == MorphKind::kTypeII;
  EXPECT_EQ(type_ii, 2);
  // forward order starts from M0
  EXPECT_EQ(r.steps.front().parent_edge.from, "s");
  EXPECT_EQ(r.steps.front().parent_edge.to, "t");
}

TEST(Reduce, ReplayRebuildsInput) {
  for (const auto& name : fixtures::names()) {
    const auto m = *fixtures::by_name(name);
    const auto r = reduce(m);
    EXPECT_TRUE(same_topology(replay_all(r), m)) << name;
  }
}

TEST(Reduce, RandomDagsShrinkOneEdgePerStepAndReplay) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const auto m = oracle::random_dag(rng, {6, 7, 2, {1, 3}});
    const auto r = reduce(m);
    EXPECT_EQ(r.residual_graph.edges().size() + r.steps.size(), m.edges().size());
    EXPECT_EQ(r.classification == Classification::kSimpleMorphable, r.residual_graph.is_single_edge());
    EXPECT_TRUE(same_topology(replay_all(r), m));
    // every intermediate graph validates
    ModuleGraph g = r.residual_graph;
    for (const auto& s : r.steps) {
      g = apply_morph(g, s);
      EXPECT_TRUE(validate(g).ok());
    }
  }
}

TEST(Reduce, ClassificationIgnoresEdgeNames) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = oracle::random_dag(rng);
    EXPECT_EQ(classify(m), classify(rename_edges(m, "x_")));
  }
}

TEST(Reduce, OrderDiagnosticAgreesOnFixturesAndRandomDags) {
  for (const auto& name : fixtures::names()) {
    const auto m = *fixtures::by_name(name);
    EXPECT_EQ(classify(m, ReductionOrder::kTypeIIFirst), classify(m)) << name;
  }
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 60; ++trial) {
    const auto m = oracle::random_dag(rng, {6, 7, 1, {1}});
    EXPECT_EQ(classify(m, ReductionOrder::kTypeIIFirst), classify(m));
  }
}

TEST(Reduce, TraceJson) {
  const auto j = trace_to_json(reduce(fixtures::resnet_module()));
  EXPECT_EQ(j.at("classification"), "SIMPLE_MORPHABLE");
  ASSERT_EQ(j.at("steps").size(), 2u);
  EXPECT_EQ(j.at("steps")[0].at("kind"), "TYPE_II");
  EXPECT_EQ(j.at("steps")[1].at("kind"), "TYPE_I");
  EXPECT_EQ(j.at("steps")[1].at("intermediate_vertex").at("id"), "a");
}
