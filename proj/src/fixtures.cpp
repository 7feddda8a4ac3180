#include "modmorph/fixtures.hpp"

#include "modmorph/errors.hpp"
#include "modmorph/graph_io.hpp"

namespace modmorph::fixtures {

namespace {

struct Dims {
  int io;
  int inner;
  KernelShape k;
};

Dims resolve(const FixtureOptions& opt, int io, int inner, KernelShape k) {
  return {opt.io_channels.value_or(io), opt.inner_channels.value_or(inner), opt.kernel.value_or(k)};
}

constexpr KernelShape k1x1{1, 1};
constexpr KernelShape k3x3{3, 3};

}  // namespace

ModuleGraph m0(const FixtureOptions& opt) {
  const Dims d = resolve(opt, 16, 16, k3x3);
  return ModuleGraph({{"s", d.io}, {"t", d.io}}, {{"e1", "s", "t", d.k, {}}}, "s", "t");
}

ModuleGraph module_a(const FixtureOptions& opt) {
  const Dims d = resolve(opt, 8, 8, k3x3);
  return ModuleGraph({{"s", d.io}, {"a", d.inner}, {"t", d.io}},
                     {{"e1", "s", "a", d.k, {}}, {"e2", "a", "t", d.k, {}}, {"e3", "s", "t", d.k, {}}}, "s", "t");
}

ModuleGraph module_b(const FixtureOptions& opt) {
  const Dims d = resolve(opt, 8, 8, k3x3);
  return ModuleGraph({{"s", d.io}, {"a", d.inner}, {"b", d.inner}, {"t", d.io}},
                     {{"e1", "s", "a", d.k, {}},
                      {"e2", "a", "t", d.k, {}},
                      {"e3", "s", "b", d.k, {}},
                      {"e4", "b", "t", d.k, {}},
                      {"e5", "s", "t", d.k, {}}},
                     "s", "t");
}

ModuleGraph module_c(const FixtureOptions& opt) {
  const Dims d = resolve(opt, 8, 8, k3x3);
  return ModuleGraph({{"s", d.io}, {"a", d.inner}, {"b", d.inner}, {"c", d.inner}, {"t", d.io}},
                     {{"e1", "s", "a", d.k, {}},
                      {"e2", "a", "b", d.k, {}},
                      {"e3", "a", "c", d.k, {}},
                      {"e4", "c", "b", d.k, {}},
                      {"e5", "b", "t", d.k, {}},
                      {"e6", "a", "t", d.k, {}}},
                     "s", "t");
}

ModuleGraph module_d(const FixtureOptions& opt) {
  const Dims d = resolve(opt, 8, 8, k3x3);
  return ModuleGraph({{"s", d.io}, {"a", d.inner}, {"b", d.inner}, {"c", d.inner}, {"t", d.io}},
                     {{"e1", "s", "a", d.k, {}},
                      {"e2", "s", "b", d.k, {}},
                      {"e3", "a", "c", d.k, {}},
                      {"e4", "b", "c", d.k, {}},
                      {"e5", "a", "t", d.k, {}},
                      {"e6", "c", "t", d.k, {}},
                      {"e7", "b", "t", d.k, {}}},
                     "s", "t");
}

ModuleGraph resnet_module(const FixtureOptions& opt) {
  const Dims d = resolve(opt, 16, 16, k3x3);
  return ModuleGraph({{"s", d.io}, {"a", d.inner}, {"t", d.io}},
                     {{"e1", "s", "a", d.k, {}}, {"e2", "a", "t", d.k, {}}, {"e3", "s", "t", k1x1, {}}}, "s", "t");
}

ModuleGraph morph_1c1(const FixtureOptions& opt) {
  const Dims d = resolve(opt, 16, 16, k3x3);
  return ModuleGraph({{"s", d.io}, {"a", d.inner}, {"b", d.io}, {"t", d.io}},
                     {{"e1", "s", "a", d.k, {}},
                      {"e2", "a", "t", d.k, {}},
                      {"e3", "s", "t", k1x1, {}},
                      {"e4", "s", "b", k1x1, {}},
                      {"e5", "b", "t", k1x1, {}}},
                     "s", "t");
}

ModuleGraph morph_1c1_2branch(const FixtureOptions& opt) {
  const Dims d = resolve(opt, 16, 16, k3x3);
  return ModuleGraph({{"s", d.io}, {"a", d.inner}, {"b", d.io}, {"c", d.io}, {"t", d.io}},
                     {{"e1", "s", "a", d.k, {}},
                      {"e2", "a", "t", d.k, {}},
                      {"e3", "s", "b", k1x1, {}},
                      {"e4", "b", "t", k1x1, {}},
                      {"e5", "s", "c", k1x1, {}},
                      {"e6", "c", "t", k1x1, {}}},
                     "s", "t");
}

ModuleGraph split_1c1(const FixtureOptions& opt) {
  const Dims d = resolve(opt, 16, 16, k1x1);
  return ModuleGraph({{"x", d.io}, {"m", d.inner}, {"y", d.io}},
                     {{"direct", "x", "y", d.k, {}}, {"in", "x", "m", d.k, {}}, {"out", "m", "y", d.k, {}}}, "x",
                     "y");
}

std::vector<std::string> names() {
  return {"m0", "module_a", "module_b", "module_c", "module_d", "resnet_module", "morph_1c1", "morph_1c1_2branch",
          "split_1c1"};
}

std::optional<ModuleGraph> by_name(const std::string& name, const FixtureOptions& opt) {
  if (name == "m0") return m0(opt);
  if (name == "module_a") return module_a(opt);
  if (name == "module_b") return module_b(opt);
  if (name == "module_c") return module_c(opt);
  if (name == "module_d") return module_d(opt);
  if (name == "resnet_module") return resnet_module(opt);
  if (name == "morph_1c1") return morph_1c1(opt);
  if (name == "morph_1c1_2branch") return morph_1c1_2branch(opt);
  if (name == "split_1c1") return split_1c1(opt);
  return std::nullopt;
}

Classification expected_classification(const std::string& name) {
  if (!by_name(name)) throw ConfigError("unknown fixture '" + name + "'");
  return name == "module_d" ? Classification::kComplex : Classification::kSimpleMorphable;
}

std::filesystem::path emit(const std::string& name, const std::filesystem::path& dir, const FixtureOptions& opt) {
  const auto m = by_name(name, opt);
  if (!m) throw ConfigError("unknown fixture '" + name + "'");
  std::filesystem::create_directories(dir);
  const auto path = dir / (name + ".json");
  io::write_text_file(path, io::module_to_json(*m).dump(2) + "\n");
  return path;
}

}  // namespace modmorph::fixtures
