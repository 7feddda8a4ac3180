#include "modmorph/reduction.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "modmorph/errors.hpp"
#include "modmorph/graph_io.hpp"

namespace modmorph {

std::string to_string(MorphKind kind) { return kind == MorphKind::kTypeI ? "TYPE_I" : "TYPE_II"; }

std::string to_string(Classification c) {
  return c == Classification::kSimpleMorphable ? "SIMPLE_MORPHABLE" : "COMPLEX";
}

namespace {

EdgeDescriptor describe(const Edge& e) { return {e.id, e.from, e.to, e.kernel}; }

// Merged ids spell out the subtree they stand for, e.g. "[[e1*e2]|e3]", which
// keeps them unique across a whole reduction.
std::string fresh_id(const ModuleGraph& m, std::string id) {
  while (m.find_edge(id)) id += "'";
  return id;
}

}  // namespace

std::optional<MorphStep> check_type_i(const ModuleGraph& m) {
  for (std::size_t v = 0; v < m.vertices().size(); ++v) {
    if (v == m.source_index() || v == m.sink_index()) continue;
    if (m.in_edges(v).size() != 1 || m.out_edges(v).size() != 1) continue;
    const Edge& first = m.edges()[m.in_edges(v).front()];
    const Edge& second = m.edges()[m.out_edges(v).front()];
    MorphStep step;
    step.kind = MorphKind::kTypeI;
    step.parent_edge = {fresh_id(m, "[" + first.id + "*" + second.id + "]"), first.from, second.to,
                        serial_kernel(first.kernel, second.kernel)};
    step.child_edges = {describe(first), describe(second)};
    step.intermediate_vertex = m.vertices()[v];
    return step;
  }
  return std::nullopt;
}

std::optional<MorphStep> check_type_ii(const ModuleGraph& m) {
  const auto& es = m.edges();
  for (std::size_t a = 0; a < es.size(); ++a) {
    for (std::size_t b = a + 1; b < es.size(); ++b) {
      if (m.tail(a) != m.tail(b) || m.head(a) != m.head(b)) continue;
      MorphStep step;
      step.kind = MorphKind::kTypeII;
      step.parent_edge = {fresh_id(m, "[" + es[a].id + "|" + es[b].id + "]"), es[a].from, es[a].to,
                          max_kernel(es[a].kernel, es[b].kernel)};
      step.child_edges = {describe(es[a]), describe(es[b])};
      return step;
    }
  }
  return std::nullopt;
}

ModuleGraph apply_reduction(const ModuleGraph& m, const MorphStep& step) {
  const auto c0 = m.find_edge(step.child_edges[0].id);
  const auto c1 = m.find_edge(step.child_edges[1].id);
  if (!c0 || !c1) throw GraphError("apply_reduction: child edges not present");
  const std::size_t keep = std::min(*c0, *c1);
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    if (e == keep) {
      const auto& p = step.parent_edge;
      edges.push_back({p.id, p.from, p.to, p.kernel, std::nullopt});
    } else if (e != *c0 && e != *c1) {
      edges.push_back(m.edges()[e]);
    }
  }
  std::vector<Vertex> vertices;
  for (const auto& v : m.vertices()) {
    if (step.kind == MorphKind::kTypeI && step.intermediate_vertex && v.id == step.intermediate_vertex->id) continue;
    vertices.push_back(v);
  }
  return ModuleGraph(std::move(vertices), std::move(edges), m.source(), m.sink());
}

ModuleGraph apply_morph(const ModuleGraph& m, const MorphStep& step, std::optional<std::pair<Filter, Filter>> filters) {
  const auto p = m.find_edge(step.parent_edge.id);
  if (!p) throw GraphError("apply_morph: parent edge '" + step.parent_edge.id + "' not present");
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    if (e != *p) {
      edges.push_back(m.edges()[e]);
      continue;
    }
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& d = step.child_edges[c];
      std::optional<Filter> f;
      if (filters) f = c == 0 ? filters->first : filters->second;
      edges.push_back({d.id, d.from, d.to, d.kernel, std::move(f)});
    }
  }
  std::vector<Vertex> vertices = m.vertices();
  if (step.kind == MorphKind::kTypeI) {
    if (!step.intermediate_vertex) throw GraphError("apply_morph: TYPE_I step without intermediate vertex");
    // keep the sink last so printed graphs read source-to-sink
    const auto sink_pos = std::find_if(vertices.begin(), vertices.end(), [&](const Vertex& v) { return v.id == m.sink(); });
    vertices.insert(sink_pos, *step.intermediate_vertex);
  }
  return ModuleGraph(std::move(vertices), std::move(edges), m.source(), m.sink());
}

ReductionResult reduce(const ModuleGraph& m, ReductionOrder order) {
  require_valid(m);
  ModuleGraph current = m.without_filters();
  std::vector<MorphStep> reversed;
  auto exhaust = [&](auto check) {
    bool any = false;
    while (auto step = check(current)) {
      current = apply_reduction(current, *step);
      reversed.push_back(std::move(*step));
      any = true;
    }
    return any;
  };
  while (!current.is_single_edge()) {
    bool progressed = false;
    if (order == ReductionOrder::kTypeIFirst) {
      progressed |= exhaust(check_type_i);
      progressed |= exhaust(check_type_ii);
    } else {
      progressed |= exhaust(check_type_ii);
      progressed |= exhaust(check_type_i);
    }
    if (!progressed) break;
  }
  ReductionResult r{current, {reversed.rbegin(), reversed.rend()}, Classification::kComplex};
  r.classification = current.is_single_edge() ? Classification::kSimpleMorphable : Classification::kComplex;
  return r;
}

Classification classify(const ModuleGraph& m, ReductionOrder order) { return reduce(m, order).classification; }

bool same_topology(const ModuleGraph& a, const ModuleGraph& b) {
  if (a.source() != b.source() || a.sink() != b.sink()) return false;
  auto vmap = [](const ModuleGraph& g) {
    std::map<std::string, int> out;
    for (const auto& v : g.vertices()) out[v.id] = v.channels;
    return out;
  };
  auto emap = [](const ModuleGraph& g) {
    std::map<std::string, std::tuple<std::string, std::string, int, int>> out;
    for (const auto& e : g.edges()) out[e.id] = {e.from, e.to, e.kernel.h, e.kernel.w};
    return out;
  };
  return vmap(a) == vmap(b) && emap(a) == emap(b);
}

nlohmann::json step_to_json(const MorphStep& step) {
  auto edge = [](const EdgeDescriptor& d) {
    return nlohmann::json{{"id", d.id}, {"from", d.from}, {"to", d.to}, {"kernel", {d.kernel.h, d.kernel.w}}};
  };
  nlohmann::json j = {{"kind", to_string(step.kind)},
                      {"parent", edge(step.parent_edge)},
                      {"children", {edge(step.child_edges[0]), edge(step.child_edges[1])}}};
  if (step.intermediate_vertex) {
    j["intermediate_vertex"] = {{"id", step.intermediate_vertex->id}, {"channels", step.intermediate_vertex->channels}};
  }
  return j;
}

nlohmann::json trace_to_json(const ReductionResult& r) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : r.steps) steps.push_back(step_to_json(s));
  return {{"classification", to_string(r.classification)},
          {"steps", std::move(steps)},
          {"residual", io::module_to_json(r.residual_graph)}};
}

}  // namespace modmorph
