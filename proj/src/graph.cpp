#include "modmorph/graph.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

#include "modmorph/algebra.hpp"
#include "modmorph/errors.hpp"

namespace modmorph {

ModuleGraph::ModuleGraph(std::vector<Vertex> vertices, std::vector<Edge> edges, std::string source, std::string sink)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), source_(std::move(source)), sink_(std::move(sink)) {
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    const auto& vx = vertices_[v];
    if (vx.id.empty()) throw GraphError("vertex ids must be non-empty");
    if (vx.channels < 1) throw GraphError("vertex '" + vx.id + "' must have a positive channel count");
    if (!vertex_lookup_.emplace(vx.id, v).second) throw GraphError("duplicate vertex id '" + vx.id + "'");
  }
  in_.resize(vertices_.size());
  out_.resize(vertices_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& ed = edges_[e];
    if (ed.id.empty()) throw GraphError("edge ids must be non-empty");
    if (!edge_lookup_.emplace(ed.id, e).second) throw GraphError("duplicate edge id '" + ed.id + "'");
    const auto from = find_vertex(ed.from);
    const auto to = find_vertex(ed.to);
    if (!from || !to) throw GraphError("edge '" + ed.id + "' references an unknown vertex");
    try {
      check_kernel(ed.kernel);
    } catch (const InvalidKernelError& err) {
      throw GraphError("edge '" + ed.id + "': " + err.what());
    }
    tails_.push_back(*from);
    heads_.push_back(*to);
    out_[*from].push_back(e);
    in_[*to].push_back(e);
  }
  const auto s = find_vertex(source_);
  const auto t = find_vertex(sink_);
  if (!s) throw GraphError("unknown source vertex '" + source_ + "'");
  if (!t) throw GraphError("unknown sink vertex '" + sink_ + "'");
  source_index_ = *s;
  sink_index_ = *t;
}

std::optional<std::size_t> ModuleGraph::find_vertex(const std::string& id) const {
  const auto it = vertex_lookup_.find(id);
  if (it == vertex_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ModuleGraph::find_edge(const std::string& id) const {
  const auto it = edge_lookup_.find(id);
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t ModuleGraph::vertex_index(const std::string& id) const {
  if (auto v = find_vertex(id)) return *v;
  throw GraphError("unknown vertex '" + id + "'");
}

std::size_t ModuleGraph::edge_index(const std::string& id) const {
  if (auto e = find_edge(id)) return *e;
  throw GraphError("unknown edge '" + id + "'");
}

bool ModuleGraph::fully_assigned() const {
  return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.filter.has_value(); });
}

ModuleGraph ModuleGraph::with_filter(const std::string& edge, Filter f) const {
  auto edges = edges_;
  edges[edge_index(edge)].filter = std::move(f);
  return ModuleGraph(vertices_, std::move(edges), source_, sink_);
}

ModuleGraph ModuleGraph::without_filter(const std::string& edge) const {
  auto edges = edges_;
  edges[edge_index(edge)].filter.reset();
  return ModuleGraph(vertices_, std::move(edges), source_, sink_);
}

ModuleGraph ModuleGraph::without_filters() const {
  auto edges = edges_;
  for (auto& e : edges) e.filter.reset();
  return ModuleGraph(vertices_, std::move(edges), source_, sink_);
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kCycle: return "cycle";
    case ViolationKind::kSourceSinkCoincide: return "source_is_sink";
    case ViolationKind::kSourceHasInEdges: return "source_has_in_edges";
    case ViolationKind::kSinkHasOutEdges: return "sink_has_out_edges";
    case ViolationKind::kExtraSource: return "extra_source";
    case ViolationKind::kExtraSink: return "extra_sink";
    case ViolationKind::kDisconnectedVertex: return "disconnected_vertex";
    case ViolationKind::kChannelMismatch: return "channel_mismatch";
    case ViolationKind::kKernelMismatch: return "kernel_mismatch";
  }
  return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (std::size_t n = 0; n < violations.size(); ++n) {
    if (n) os << "; ";
    os << to_string(violations[n].kind) << ": " << violations[n].message;
  }
  return os.str();
}

std::optional<std::vector<std::size_t>> topological_order(const ModuleGraph& m) {
  const std::size_t n = m.vertices().size();
  std::vector<std::size_t> indegree(n);
  for (std::size_t v = 0; v < n; ++v) indegree[v] = m.in_edges(v).size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t e : m.out_edges(v)) {
      if (--indegree[m.head(e)] == 0) ready.push(m.head(e));
    }
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

ValidationReport validate(const ModuleGraph& m) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string msg) { report.violations.push_back({kind, std::move(msg)}); };
  const auto& vs = m.vertices();

  if (!topological_order(m)) add(ViolationKind::kCycle, "graph contains a directed cycle");
  if (m.source_index() == m.sink_index()) add(ViolationKind::kSourceSinkCoincide, "source and sink are the same vertex");
  if (!m.in_edges(m.source_index()).empty()) {
    add(ViolationKind::kSourceHasInEdges, "source '" + m.source() + "' has incoming edges");
  }
  if (!m.out_edges(m.sink_index()).empty()) {
    add(ViolationKind::kSinkHasOutEdges, "sink '" + m.sink() + "' has outgoing edges");
  }
  for (std::size_t v = 0; v < vs.size(); ++v) {
    if (v != m.source_index() && m.in_edges(v).empty()) {
      add(ViolationKind::kExtraSource, "vertex '" + vs[v].id + "' has no incoming edges");
    }
    if (v != m.sink_index() && m.out_edges(v).empty()) {
      add(ViolationKind::kExtraSink, "vertex '" + vs[v].id + "' has no outgoing edges");
    }
  }

  std::vector<char> from_source(vs.size(), 0);
  std::vector<char> to_sink(vs.size(), 0);
  std::vector<std::size_t> stack{m.source_index()};
  from_source[m.source_index()] = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto e : m.out_edges(v))
      if (!from_source[m.head(e)]) from_source[m.head(e)] = 1, stack.push_back(m.head(e));
  }
  stack = {m.sink_index()};
  to_sink[m.sink_index()] = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto e : m.in_edges(v))
      if (!to_sink[m.tail(e)]) to_sink[m.tail(e)] = 1, stack.push_back(m.tail(e));
  }
  for (std::size_t v = 0; v < vs.size(); ++v) {
    if (!from_source[v] || !to_sink[v]) {
      add(ViolationKind::kDisconnectedVertex, "vertex '" + vs[v].id + "' is not on a source-to-sink path");
    }
  }

  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    const auto& ed = m.edges()[e];
    if (!ed.filter) continue;
    const int cin = vs[m.tail(e)].channels;
    const int cout = vs[m.head(e)].channels;
    if (ed.filter->c_in() != cin || ed.filter->c_out() != cout) {
      add(ViolationKind::kChannelMismatch, "edge '" + ed.id + "' filter is " + std::to_string(ed.filter->c_out()) +
                                               "x" + std::to_string(ed.filter->c_in()) + ", endpoints need " +
                                               std::to_string(cout) + "x" + std::to_string(cin));
    }
    if (ed.filter->kernel() != ed.kernel) {
      add(ViolationKind::kKernelMismatch,
          "edge '" + ed.id + "' filter kernel " + ed.filter->kernel().str() + " != declared " + ed.kernel.str());
    }
  }
  return report;
}

void require_valid(const ModuleGraph& m) {
  const auto report = validate(m);
  if (!report.ok()) throw GraphError("invalid module: " + report.summary());
}

std::uint64_t count_paths(const ModuleGraph& m) {
  const auto order = topological_order(m);
  if (!order) throw GraphError("count_paths: graph contains a cycle");
  constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> ways(m.vertices().size(), 0);
  ways[m.source_index()] = 1;
  for (auto v : *order) {
    for (auto e : m.out_edges(v)) {
      auto& w = ways[m.head(e)];
      w = (cap - w < ways[v]) ? cap : w + ways[v];
    }
  }
  return ways[m.sink_index()];
}

PathSet enumerate_paths(const ModuleGraph& m) {
  require_valid(m);
  const auto total = count_paths(m);
  if (total > kMaxPaths) {
    throw GraphError("module has " + std::to_string(total) + " paths, more than the limit of " +
                     std::to_string(kMaxPaths));
  }
  PathSet set;
  set.paths.reserve(total);
  std::vector<std::string> current;
  std::function<void(std::size_t)> walk = [&](std::size_t v) {
    if (v == m.sink_index()) {
      set.paths.push_back(current);
      return;
    }
    for (auto e : m.out_edges(v)) {
      current.push_back(m.edges()[e].id);
      walk(m.head(e));
      current.pop_back();
    }
  };
  walk(m.source_index());
  return set;
}

KernelShape effective_kernel(const ModuleGraph& m) {
  require_valid(m);
  const auto order = *topological_order(m);
  std::vector<std::optional<KernelShape>> reach(m.vertices().size());
  reach[m.source_index()] = KernelShape{1, 1};
  for (auto v : order) {
    if (!reach[v]) continue;
    for (auto e : m.out_edges(v)) {
      const KernelShape k = serial_kernel(*reach[v], m.edges()[e].kernel);
      auto& r = reach[m.head(e)];
      r = r ? max_kernel(*r, k) : k;
    }
  }
  return *reach[m.sink_index()];
}

namespace {

const Filter& filter_of(const ModuleGraph& m, std::size_t e) {
  const auto& f = m.edges()[e].filter;
  if (!f) throw UnassignedEdgeError("edge '" + m.edges()[e].id + "' has no filter");
  return *f;
}

void accumulate(std::optional<Filter>& acc, Filter term) {
  acc = acc ? add_filters(*acc, term) : std::move(term);
}

}  // namespace

std::vector<std::optional<Filter>> source_path_sums(const ModuleGraph& m, std::optional<std::size_t> skip_edge) {
  const auto order = topological_order(m);
  if (!order) throw GraphError("source_path_sums: graph contains a cycle");
  std::vector<std::optional<Filter>> sums(m.vertices().size());
  const std::size_t s = m.source_index();
  sums[s] = identity_filter(m.vertices()[s].channels);
  for (auto v : *order) {
    if (v == s) continue;
    for (auto e : m.in_edges(v)) {
      if (skip_edge && e == *skip_edge) continue;
      const auto u = m.tail(e);
      if (!sums[u]) continue;
      const Filter& f = filter_of(m, e);
      accumulate(sums[v], u == s ? f : compose(f, *sums[u]));
    }
  }
  return sums;
}

std::vector<std::optional<Filter>> sink_path_sums(const ModuleGraph& m, std::optional<std::size_t> skip_edge) {
  const auto order = topological_order(m);
  if (!order) throw GraphError("sink_path_sums: graph contains a cycle");
  std::vector<std::optional<Filter>> sums(m.vertices().size());
  const std::size_t t = m.sink_index();
  sums[t] = identity_filter(m.vertices()[t].channels);
  for (auto it = order->rbegin(); it != order->rend(); ++it) {
    const auto v = *it;
    if (v == t) continue;
    for (auto e : m.out_edges(v)) {
      if (skip_edge && e == *skip_edge) continue;
      const auto w = m.head(e);
      if (!sums[w]) continue;
      const Filter& f = filter_of(m, e);
      accumulate(sums[v], w == t ? f : compose(*sums[w], f));
    }
  }
  return sums;
}

Filter module_filter(const ModuleGraph& m) {
  require_valid(m);
  for (std::size_t e = 0; e < m.edges().size(); ++e) (void)filter_of(m, e);
  const auto sums = source_path_sums(m);
  return zero_pad(*sums[m.sink_index()], effective_kernel(m));
}

}  // namespace modmorph
