#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "modmorph/algebra.hpp"
#include "modmorph/errors.hpp"
#include "modmorph/executor.hpp"
#include "modmorph/fixtures.hpp"
#include "modmorph/graph_io.hpp"
#include "oracle.hpp"

using namespace modmorph;

namespace {

double max_abs(const Blob& a, const Blob& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

}  // namespace

TEST(Pact, EndpointsAndMix) {
  const Blob x(1, 1, 3, {-2.0, 0.5, 3.0});
  EXPECT_EQ(pact(x, 1.0), x);
  EXPECT_EQ(pact(x, 0.0), Blob(1, 1, 3, {0.0, 0.5, 3.0}));
  const Blob half = pact(x, 0.5);
  EXPECT_DOUBLE_EQ(half(0, 0, 0), -1.0);
  EXPECT_DOUBLE_EQ(pact(x, 0.0, Activation::kTanh)(0, 0, 0), std::tanh(-2.0));
  EXPECT_DOUBLE_EQ(pact(x, 0.0, Activation::kSigmoid)(0, 0, 2), 1.0 / (1.0 + std::exp(-3.0)));
  EXPECT_EQ(parse_activation("tanh"), Activation::kTanh);
  EXPECT_THROW(parse_activation("gelu"), ParameterError);
}

TEST(BatchNorm, IdentityAndAffine) {
  std::mt19937_64 rng(81);
  const Blob x = oracle::gaussian_blob(3, 4, 4, rng);
  EXPECT_LT(max_abs(batchnorm(x, BatchNormOp::identity(3)), x), 1e-15);
  BatchNormOp p{{2.0}, {1.0}, {0.5}, {4.0}, 1e-5};
  const Blob y = batchnorm(Blob(1, 1, 1, {2.5}), p);
  EXPECT_DOUBLE_EQ(y(0, 0, 0), (2.5 - 0.5) / std::sqrt(4.0 + 1e-5) * 2.0 + 1.0);
  p.eps = 0.0;
  EXPECT_THROW(batchnorm(Blob(1, 1, 1, {2.5}), p), ParameterError);
  EXPECT_THROW(batchnorm(x, p), DimensionError);
}

TEST(Forward, MatchesModuleFilterOnInterior) {
  std::mt19937_64 rng(82);
  for (const char* name : {"module_a", "module_c", "module_d"}) {
    const auto m = oracle::randomly_assigned(*fixtures::by_name(name, {2, 2, {}}), rng);
    const Blob b = oracle::gaussian_blob(2, 14, 14, rng);
    const Filter g = module_filter(m);
    const Blob lhs = forward(m, b);
    const Blob rhs = oracle::naive_conv(g, b);
    EXPECT_LT(oracle::interior_rel_error(lhs, rhs, (g.kh() - 1) / 2, (g.kw() - 1) / 2), 1e-12) << name;
  }
}

TEST(Forward, LinearInInput) {
  std::mt19937_64 rng(83);
  const auto m = oracle::randomly_assigned(fixtures::module_b({2, 3, {}}), rng);
  const Blob a = oracle::gaussian_blob(2, 8, 8, rng);
  const Blob b = oracle::gaussian_blob(2, 8, 8, rng);
  std::vector<double> sum(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) sum[k] = 2.0 * a.data()[k] - b.data()[k];
  const Blob fa = forward(m, a);
  const Blob fb = forward(m, b);
  const Blob fs = forward(m, Blob(2, 8, 8, sum));
  double worst = 0.0;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    worst = std::max(worst, std::abs(fs.data()[k] - (2.0 * fa.data()[k] - fb.data()[k])));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(Forward, IdentityNonlinearitiesMatchLinear) {
  std::mt19937_64 rng(84);
  const auto m = oracle::randomly_assigned(fixtures::morph_1c1({4, 4, {}}), rng);
  const Blob b = oracle::gaussian_blob(4, 10, 10, rng);
  EXPECT_LT(max_abs(forward(with_identity_nonlinearities(m), b), forward(m, b)), 1e-12);
  std::vector<std::vector<LayerOp>> chains;
  for (const auto& e : m.edges()) chains.push_back({ConvOp{*e.filter}, PactOp{0.5}});
  EXPECT_GT(max_abs(forward(LayeredModule(m, chains), b), forward(m, b)), 1e-3);
}

TEST(LayeredModule, RejectsBadChains) {
  std::mt19937_64 rng(85);
  const auto m = oracle::randomly_assigned(fixtures::m0({2, 2, {}}), rng);
  const Filter f = *m.edge("e1").filter;
  EXPECT_THROW(LayeredModule(m, {{PactOp{1.0}}}), GraphError);
  EXPECT_THROW(LayeredModule(m, {{ConvOp{f}, ConvOp{f}}}), GraphError);
  EXPECT_THROW(LayeredModule(m, {{ConvOp{Filter::zeros(2, 2, {1, 1})}}}), DimensionError);
  EXPECT_THROW(LayeredModule(m, {{ConvOp{f}, PactOp{1.5}}}), ParameterError);
  EXPECT_THROW(LayeredModule(m, {}), GraphError);
  EXPECT_THROW(LayeredModule(m, {{BatchNormOp::identity(3), ConvOp{f}}}), DimensionError);
  EXPECT_NO_THROW(LayeredModule(m, {{BatchNormOp::identity(2), ConvOp{f}, PactOp{0.2}}}));
}

TEST(LayeredIo, JsonRoundTrip) {
  std::mt19937_64 rng(86);
  const auto m = oracle::randomly_assigned(fixtures::resnet_module({2, 2, {}}), rng);
  const LayeredModule lm = with_identity_nonlinearities(m, Activation::kTanh);
  const auto dir = std::filesystem::temp_directory_path() / "modmorph_layered_io";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto written = io::write_module(dir / "m.json", m, "filters");
  std::map<std::string, std::string> paths;
  for (const auto& e : written.at("edges")) paths[e.at("id")] = e.at("filter");
  io::write_text_file(dir / "layered.json", io::layered_to_json(lm, paths).dump(2));
  const LayeredModule back = io::read_layered(dir / "layered.json");
  const Blob b = oracle::gaussian_blob(2, 9, 9, rng);
  EXPECT_EQ(forward(back, b), forward(lm, b));
  ASSERT_EQ(back.chain(0).size(), 3u);
  EXPECT_TRUE(std::holds_alternative<PactOp>(back.chain(0)[2]));
  EXPECT_EQ(std::get<PactOp>(back.chain(0)[2]).base, Activation::kTanh);
  std::filesystem::remove_all(dir);
}
