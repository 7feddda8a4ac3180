#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modmorph/graph.hpp"
#include "modmorph/reduction.hpp"

namespace modmorph::fixtures {

/// Overrides for the built-in topologies. Unset fields keep each fixture's default.
struct FixtureOptions {
  std::optional<int> io_channels;     // source and sink
  std::optional<int> inner_channels;  // every interior vertex
  std::optional<KernelShape> kernel;  // the "main" convolutions (1x1 shortcuts stay 1x1)
};

/// s -> t, one 3x3 edge, 16 channels.
ModuleGraph m0(const FixtureOptions& opt = {});
/// Two-way module: conv-conv path plus a direct edge.
ModuleGraph module_a(const FixtureOptions& opt = {});
/// Three-way module: two conv-conv paths plus a direct edge.
ModuleGraph module_b(const FixtureOptions& opt = {});
/// Nested module that needs both merge kinds, interleaved, to collapse.
ModuleGraph module_c(const FixtureOptions& opt = {});
/// Irreducible module with paths (e1,e5), (e1,e3,e6), (e2,e4,e6), (e2,e7); 8 channels.
ModuleGraph module_d(const FixtureOptions& opt = {});
/// ResNet block: e1, e2 3x3 through a, plus a 1x1 shortcut e3; 16 channels.
ModuleGraph resnet_module(const FixtureOptions& opt = {});
/// ResNet block whose shortcut is split in two, one half morphed into two 1x1 convs.
ModuleGraph morph_1c1(const FixtureOptions& opt = {});
/// ResNet block with both shortcut halves morphed into two 1x1 convs.
ModuleGraph morph_1c1_2branch(const FixtureOptions& opt = {});
/// Sub-module for morphing a 1x1 edge: a direct 1x1 edge plus a 1x1 -> 1x1 path.
ModuleGraph split_1c1(const FixtureOptions& opt = {});

std::vector<std::string> names();
/// nullopt for unknown names.
std::optional<ModuleGraph> by_name(const std::string& name, const FixtureOptions& opt = {});
/// Documented classification of each fixture.
Classification expected_classification(const std::string& name);

/// Writes `<dir>/<name>.json`; returns the path.
std::filesystem::path emit(const std::string& name, const std::filesystem::path& dir, const FixtureOptions& opt = {});

}  // namespace modmorph::fixtures
