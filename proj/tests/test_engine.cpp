#include <gtest/gtest.h>

#include <random>

#include "modmorph/algebra.hpp"
#include "modmorph/engine.hpp"
#include "modmorph/errors.hpp"
#include "modmorph/fixtures.hpp"
#include "oracle.hpp"

using namespace modmorph;

namespace {

MorphRequest request(const Filter& parent, const ModuleGraph& target, std::uint64_t seed = 1) {
  MorphRequest req{parent, target, {}, Strategy::kAuto, SplitMode::kRandom, {}};
  req.config.seed = seed;
  req.verify.seed = seed;
  req.verify.trials = 3;
  return req;
}

}  // namespace

TEST(Morph, SingleEdgeCopiesParent) {
  std::mt19937_64 rng(61);
  const Filter p = oracle::gaussian_filter(16, 16, {3, 3}, rng);
  const auto r = morph(request(p, fixtures::m0()));
  EXPECT_EQ(*r.assigned.edge("e1").filter, p);
  EXPECT_EQ(r.equation_residual, 0.0);
  EXPECT_TRUE(r.converged);
  ASSERT_EQ(r.phase_log.size(), 1u);
  EXPECT_EQ(r.phase_log[0].method, "copy");
}

TEST(Morph, ResnetAndOneByOneFixtures) {
  std::mt19937_64 rng(62);
  const Filter p = oracle::gaussian_filter(16, 16, {3, 3}, rng);
  for (const char* name : {"resnet_module", "morph_1c1", "morph_1c1_2branch", "module_a", "module_b", "module_c"}) {
    const auto target = *fixtures::by_name(name);
    const Filter parent = target.channels(target.source()) == 16 ? p : oracle::gaussian_filter(8, 8, {3, 3}, rng);
    const auto r = morph(request(parent, target));
    EXPECT_LE(r.equation_residual, 1e-6) << name;
    EXPECT_LE(r.function_residual, 1e-6) << name;
    EXPECT_EQ(r.strategy_used, Strategy::kAuto) << name;
    EXPECT_LE(oracle::rel_diff(oracle::brute_force_module_filter(r.assigned), zero_pad(parent, effective_kernel(r.assigned))),
              1e-6)
        << name;
  }
}

TEST(Morph, SmallParentIntoLargerEffectiveKernel) {
  std::mt19937_64 rng(63);
  const Filter p = oracle::gaussian_filter(16, 16, {1, 1}, rng);
  const auto r = morph(request(p, fixtures::resnet_module()));
  EXPECT_LE(r.equation_residual, 1e-6);
}

TEST(Morph, ParentLargerThanModuleIsRejected) {
  std::mt19937_64 rng(64);
  const Filter p = oracle::gaussian_filter(16, 16, {5, 5}, rng);
  EXPECT_THROW(morph(request(p, fixtures::m0())), InvalidTargetError);
  EXPECT_THROW(morph(request(oracle::gaussian_filter(4, 4, {3, 3}, rng), fixtures::m0())), InvalidTargetError);
}

TEST(Morph, ReplayOnlyRejectsComplexTargets) {
  std::mt19937_64 rng(65);
  auto req = request(oracle::gaussian_filter(8, 8, {3, 3}, rng), fixtures::module_d());
  req.strategy = Strategy::kReplayOnly;
  EXPECT_THROW(morph(req), StrategyError);
}

TEST(Morph, ComplexTargetGoesThroughAlternatingSolver) {
  // interiors wide enough that some |F_j| >= |G~|
  std::mt19937_64 rng(66);
  const auto target = fixtures::module_d({4, 10, {}});
  const auto r = morph(request(oracle::gaussian_filter(4, 4, {3, 3}, rng), target));
  ASSERT_TRUE(r.solver_report);
  EXPECT_TRUE(r.solver_report->size_condition_met);
  EXPECT_LE(r.equation_residual, 1e-6);
  EXPECT_LE(r.function_residual, 1e-5);
  EXPECT_EQ(r.phase_log.front().kind, "IRREDUCIBLE");
}

TEST(Morph, StalledAlternatingSolveFallsBackToIdentityPath) {
  // no single edge of the 8-channel module D reaches |G~|; the alternating
  // solver stalls and AUTO routes the parent along one path instead
  std::mt19937_64 rng(75);
  auto req = request(oracle::gaussian_filter(8, 8, {3, 3}, rng), fixtures::module_d());
  req.config.max_iter = 3;
  const auto r = morph(req);
  ASSERT_TRUE(r.solver_report);
  EXPECT_FALSE(r.solver_report->converged);
  EXPECT_EQ(r.phase_log.back().method, "identity-path");
  EXPECT_LE(r.equation_residual, 1e-12);
  EXPECT_LE(r.function_residual, 1e-12);
  req.strategy = Strategy::kDirectSolve;
  const auto d = morph(req);
  EXPECT_FALSE(d.converged);
  EXPECT_GT(d.equation_residual, 1e-3);
}

TEST(Morph, IdentityPathCoreWithZeroReplay) {
  // irreducible core whose routed-around edges are later split serially
  std::mt19937_64 rng(76);
  const ModuleGraph m({{"s", 2}, {"a", 2}, {"b", 2}, {"c", 2}, {"x", 2}, {"t", 2}},
                      {{"e1", "s", "a", {3, 3}, {}}, {"e2", "s", "b", {3, 3}, {}}, {"e3", "a", "c", {3, 3}, {}},
                       {"e4", "b", "c", {3, 3}, {}}, {"e5", "a", "t", {3, 3}, {}}, {"e6", "c", "t", {3, 3}, {}},
                       {"e7a", "b", "x", {3, 3}, {}}, {"e7b", "x", "t", {1, 1}, {}}},
                      "s", "t");
  auto req = request(oracle::gaussian_filter(2, 2, {3, 3}, rng), m);
  req.config.max_iter = 2;
  const auto r = morph(req);
  EXPECT_EQ(r.plan.classification, Classification::kComplex);
  EXPECT_LE(r.equation_residual, 1e-12);
}

TEST(Morph, DirectStrategyAgreesWithAuto) {
  std::mt19937_64 rng(67);
  const Filter p = oracle::gaussian_filter(4, 4, {3, 3}, rng);
  // |F1| = 16*4*9 covers |G~| = 4*4*25, so the direct solve can be exact too
  const auto target = fixtures::resnet_module({4, 16, {}});
  auto req = request(p, target);
  const auto a = morph(req);
  req.strategy = Strategy::kDirectSolve;
  const auto d = morph(req);
  EXPECT_EQ(d.strategy_used, Strategy::kDirectSolve);
  EXPECT_LE(a.equation_residual, 1e-6);
  EXPECT_LE(d.equation_residual, 1e-6);
  EXPECT_LT(oracle::rel_diff(module_filter(a.assigned), module_filter(d.assigned)), 1e-6);
}

TEST(Morph, UnderSizedTypeIFallsBackToDirect) {
  // a 5x5 parent through a 3x3 -> 3x3 chain with a 1-channel middle cannot
  // be factored exactly; AUTO must not pretend otherwise
  std::mt19937_64 rng(68);
  const ModuleGraph chain({{"s", 3}, {"a", 1}, {"t", 3}},
                          {{"e1", "s", "a", {3, 3}, {}}, {"e2", "a", "t", {3, 3}, {}}}, "s", "t");
  auto req = request(oracle::gaussian_filter(3, 3, {5, 5}, rng), chain);
  req.config.max_iter = 20;
  const auto r = morph(req);
  EXPECT_EQ(r.strategy_used, Strategy::kDirectSolve);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.equation_residual, 1e-3);
}

TEST(Morph, DeterministicAndNonDestructive) {
  std::mt19937_64 rng(69);
  const Filter p = oracle::gaussian_filter(8, 8, {3, 3}, rng);
  const Filter p_copy = p;
  const auto target = fixtures::module_c();
  const auto a = morph(request(p, target, 5));
  const auto b = morph(request(p, target, 5));
  const auto c = morph(request(p, target, 6));
  for (const auto& e : a.assigned.edges()) EXPECT_EQ(*e.filter, *b.assigned.edge(e.id).filter);
  bool differs = false;
  for (const auto& e : a.assigned.edges()) differs |= !(*e.filter == *c.assigned.edge(e.id).filter);
  EXPECT_TRUE(differs);
  EXPECT_EQ(p, p_copy);
  for (const auto& e : target.edges()) EXPECT_FALSE(e.filter);
}

TEST(Morph, EqualSplitMode) {
  std::mt19937_64 rng(70);
  const Filter p = oracle::gaussian_filter(3, 3, {3, 3}, rng);
  const ModuleGraph two({{"s", 3}, {"t", 3}}, {{"a", "s", "t", {3, 3}, {}}, {"b", "s", "t", {3, 3}, {}}}, "s", "t");
  auto req = request(p, two);
  req.split_mode = SplitMode::kEqual;
  const auto r = morph(req);
  EXPECT_EQ(*r.assigned.edge("a").filter, scaled(p, 0.5));
  EXPECT_EQ(*r.assigned.edge("b").filter, scaled(p, 0.5));
}

TEST(MorphEdge, SplitsResnetShortcut) {
  std::mt19937_64 rng(71);
  const auto host = oracle::randomly_assigned(fixtures::resnet_module({4, 4, {}}), rng);
  auto settings = request(Filter::zeros(1, 1, {1, 1}), fixtures::m0());
  settings.split_mode = SplitMode::kEqual;
  const auto r = morph_edge(host, "e3", fixtures::split_1c1({4, 4, {}}), settings);
  EXPECT_LE(r.equation_residual, 1e-8);
  EXPECT_LE(r.function_residual, 1e-8);
  EXPECT_EQ(r.assigned.edges().size(), 5u);
  EXPECT_NO_THROW((void)r.assigned.edge("e3.direct"));
  EXPECT_NO_THROW((void)r.assigned.vertex_index("e3.m"));
  EXPECT_EQ(*r.assigned.edge("e3.direct").filter, scaled(*host.edge("e3").filter, 0.5));
  EXPECT_THROW(morph_edge(host.without_filter("e3"), "e3", fixtures::split_1c1({4, 4, {}}), settings),
               UnassignedEdgeError);
}

TEST(Verify, FunctionCheckNeedsInterior) {
  std::mt19937_64 rng(72);
  const auto m = oracle::randomly_assigned(fixtures::module_d({2, 2, {}}), rng);
  const Filter p = module_filter(m);
  VerifyOptions opts;
  opts.trials = 2;
  EXPECT_LT(verify_function(m, p, opts), 1e-10);
  opts.blob_h = 6;
  EXPECT_THROW(verify_function(m, p, opts), ConfigError);
  opts.blob_h = 16;
  opts.trials = 0;
  EXPECT_THROW(verify_function(m, p, opts), ConfigError);
}

TEST(Verify, PerturbationIsDetected) {
  std::mt19937_64 rng(73);
  const auto m = oracle::randomly_assigned(fixtures::module_a({3, 3, {}}), rng);
  const Filter p = module_filter(m);
  Filter f = *m.edge("e2").filter;
  const Filter bumped = add_filters(f, scaled(oracle::gaussian_filter(f.c_out(), f.c_in(), f.kernel(), rng), 1e-3));
  const auto broken = m.with_filter("e2", bumped);
  EXPECT_GT(verify_equation(broken, p), 1e-5);
  VerifyOptions opts;
  opts.trials = 3;
  EXPECT_GT(verify_function(broken, p, opts), 1e-6);
}

TEST(Strategy, Names) {
  EXPECT_EQ(parse_strategy("auto"), Strategy::kAuto);
  EXPECT_EQ(parse_strategy("replay"), Strategy::kReplayOnly);
  EXPECT_EQ(parse_strategy("direct"), Strategy::kDirectSolve);
  EXPECT_THROW(parse_strategy("guess"), ConfigError);
  EXPECT_EQ(to_string(Strategy::kDirectSolve), "direct");
}

TEST(ResultJson, HasReportFields) {
  std::mt19937_64 rng(74);
  const auto r = morph(request(oracle::gaussian_filter(16, 16, {3, 3}, rng), fixtures::resnet_module()));
  const auto j = result_to_json(r);
  for (const char* key : {"strategy", "classification", "equation_residual", "function_residual", "converged",
                          "phase_log", "plan", "assigned"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j.at("phase_log").size(), 3u);
}
