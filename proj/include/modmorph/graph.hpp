#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "modmorph/tensor.hpp"

namespace modmorph {

struct Vertex {
  std::string id;
  int channels = 1;
};

/// A convolutional layer between two blobs. The filter is optional so that a
/// graph can describe a morph target before any weights exist.
struct Edge {
  std::string id;
  std::string from;
  std::string to;
  KernelShape kernel;
  std::optional<Filter> filter;
};

/// Single-source, single-sink DAG of blobs (vertices) and convolutions (edges).
///
/// A vertex with several incoming edges sums them; several outgoing edges
/// receive copies. Parallel edges are allowed. The constructor only checks
/// referential integrity (unique ids, known endpoints, odd kernels); DAG
/// properties are reported by validate() so that malformed graphs can still
/// be inspected.
///
/// Vertex and edge order is insertion order and is used as the tie-breaker by
/// every algorithm in the library.
class ModuleGraph {
 public:
  ModuleGraph(std::vector<Vertex> vertices, std::vector<Edge> edges, std::string source, std::string sink);

  [[nodiscard]] const std::vector<Vertex>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  [[nodiscard]] const std::string& source() const { return source_; }
  [[nodiscard]] const std::string& sink() const { return sink_; }
  [[nodiscard]] std::size_t source_index() const { return source_index_; }
  [[nodiscard]] std::size_t sink_index() const { return sink_index_; }

  [[nodiscard]] std::optional<std::size_t> find_vertex(const std::string& id) const;
  [[nodiscard]] std::optional<std::size_t> find_edge(const std::string& id) const;
  [[nodiscard]] std::size_t vertex_index(const std::string& id) const;
  [[nodiscard]] std::size_t edge_index(const std::string& id) const;
  [[nodiscard]] const Edge& edge(const std::string& id) const { return edges_[edge_index(id)]; }
  [[nodiscard]] int channels(const std::string& vertex) const { return vertices_[vertex_index(vertex)].channels; }

  /// Vertex indices of an edge's endpoints.
  [[nodiscard]] std::size_t tail(std::size_t edge) const { return tails_[edge]; }
  [[nodiscard]] std::size_t head(std::size_t edge) const { return heads_[edge]; }
  [[nodiscard]] const std::vector<std::size_t>& in_edges(std::size_t vertex) const { return in_[vertex]; }
  [[nodiscard]] const std::vector<std::size_t>& out_edges(std::size_t vertex) const { return out_[vertex]; }

  [[nodiscard]] bool fully_assigned() const;
  /// True for M0: two vertices joined by one edge.
  [[nodiscard]] bool is_single_edge() const { return vertices_.size() == 2 && edges_.size() == 1; }

  [[nodiscard]] ModuleGraph with_filter(const std::string& edge, Filter f) const;
  [[nodiscard]] ModuleGraph without_filter(const std::string& edge) const;
  [[nodiscard]] ModuleGraph without_filters() const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::string source_;
  std::string sink_;
  std::size_t source_index_ = 0;
  std::size_t sink_index_ = 0;
  std::unordered_map<std::string, std::size_t> vertex_lookup_;
  std::unordered_map<std::string, std::size_t> edge_lookup_;
  std::vector<std::size_t> tails_;
  std::vector<std::size_t> heads_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::vector<std::size_t>> out_;
};

enum class ViolationKind {
  kCycle,
  kSourceSinkCoincide,
  kSourceHasInEdges,
  kSinkHasOutEdges,
  kExtraSource,
  kExtraSink,
  kDisconnectedVertex,
  kChannelMismatch,
  kKernelMismatch,
};

std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] bool has(ViolationKind kind) const;
  [[nodiscard]] std::string summary() const;
};

/// Collects every structural violation; an empty report means the graph is a module.
ValidationReport validate(const ModuleGraph& m);

/// Throws GraphError carrying the violation summary unless m validates.
void require_valid(const ModuleGraph& m);

/// Kahn's algorithm, always taking the lowest-index ready vertex. nullopt on a cycle.
std::optional<std::vector<std::size_t>> topological_order(const ModuleGraph& m);

/// Source-to-sink paths as edge-id sequences.
struct PathSet {
  std::vector<std::vector<std::string>> paths;

  [[nodiscard]] std::size_t size() const { return paths.size(); }
};

inline constexpr std::uint64_t kMaxPaths = 10'000;

/// Number of source-to-sink paths, saturating at UINT64_MAX.
std::uint64_t count_paths(const ModuleGraph& m);

/// All source-to-sink paths, lexicographic in edge insertion index.
/// Rejects modules with more than kMaxPaths paths.
PathSet enumerate_paths(const ModuleGraph& m);

/// Kernel of the module's equivalent filter: per dimension the maximum over
/// paths of sum(k) - (len - 1).
KernelShape effective_kernel(const ModuleGraph& m);

/// For every vertex v, the sum over paths source -> v of the composed filters
/// (channels(v) x channels(source)); the source itself maps to the identity.
/// Paths through `skip_edge` are left out. Vertices reached by no remaining
/// path hold nullopt.
std::vector<std::optional<Filter>> source_path_sums(const ModuleGraph& m, std::optional<std::size_t> skip_edge = {});

/// Mirror of source_path_sums: for every v the sum over paths v -> sink
/// (channels(sink) x channels(v)); the sink maps to the identity.
std::vector<std::optional<Filter>> sink_path_sums(const ModuleGraph& m, std::optional<std::size_t> skip_edge = {});

/// The module's equivalent single filter, padded to effective_kernel(m).
/// Requires every edge to carry a filter.
Filter module_filter(const ModuleGraph& m);

}  // namespace modmorph
