#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "modmorph/graph.hpp"

namespace modmorph {

enum class MorphKind {
  kTypeI,   // one edge -> two serial edges through a new vertex
  kTypeII,  // one edge -> two parallel edges with the same endpoints
};

std::string to_string(MorphKind kind);

struct EdgeDescriptor {
  std::string id;
  std::string from;
  std::string to;
  KernelShape kernel;

  friend bool operator==(const EdgeDescriptor&, const EdgeDescriptor&) = default;
};

/// One atomic morph: `parent_edge` of the smaller graph becomes `child_edges`
/// of the larger one. For TYPE-I the children are (first applied, second
/// applied) through `intermediate_vertex`; for TYPE-II they are parallel.
struct MorphStep {
  MorphKind kind = MorphKind::kTypeI;
  EdgeDescriptor parent_edge;
  std::array<EdgeDescriptor, 2> child_edges;
  std::optional<Vertex> intermediate_vertex;
};

enum class Classification { kSimpleMorphable, kComplex };

std::string to_string(Classification c);

struct ReductionResult {
  ModuleGraph residual_graph;
  /// Forward morphing order: replaying front to back from residual_graph
  /// rebuilds the input.
  std::vector<MorphStep> steps;
  Classification classification = Classification::kComplex;
};

/// Which reverse operation the reduction loop exhausts first. The default
/// follows the reference algorithm; the other exists to probe order
/// sensitivity.
enum class ReductionOrder { kTypeIFirst, kTypeIIFirst };

/// Finds the lowest-index interior vertex with in-degree = out-degree = 1 and
/// returns the step that merges its two edges (kernel K1 + K2 - 1).
std::optional<MorphStep> check_type_i(const ModuleGraph& m);

/// Finds the lowest-index pair of parallel edges and returns the step that
/// merges them (kernel = elementwise max).
std::optional<MorphStep> check_type_ii(const ModuleGraph& m);

/// Applies a step in the reducing direction: children -> parent. The merged
/// edge takes the earlier child's position and carries no filter.
ModuleGraph apply_reduction(const ModuleGraph& m, const MorphStep& step);

/// Applies a step in the morphing direction: parent -> children. Optional
/// filters are attached to (child_edges[0], child_edges[1]).
ModuleGraph apply_morph(const ModuleGraph& m, const MorphStep& step,
                        std::optional<std::pair<Filter, Filter>> filters = std::nullopt);

ReductionResult reduce(const ModuleGraph& m, ReductionOrder order = ReductionOrder::kTypeIFirst);

Classification classify(const ModuleGraph& m, ReductionOrder order = ReductionOrder::kTypeIFirst);

/// Same vertices (id, channels), same edges (id, endpoints, kernel), same
/// source and sink, irrespective of insertion order. Filters are ignored.
bool same_topology(const ModuleGraph& a, const ModuleGraph& b);

nlohmann::json step_to_json(const MorphStep& step);
nlohmann::json trace_to_json(const ReductionResult& r);

}  // namespace modmorph
