#include "modmorph/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "modmorph/errors.hpp"
#include "modmorph/mten.hpp"

namespace modmorph::io {

namespace fs = std::filesystem;

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(where + ": missing field '" + key + "'");
  return j.at(key);
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) throw FormatError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

int int_field(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw FormatError(where + " must be an integer");
  return v.get<int>();
}

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

ModuleGraph module_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw FormatError("module JSON must be an object");
  std::vector<Vertex> vertices;
  const auto& jv = field(j, "vertices", "module");
  if (!jv.is_array()) throw FormatError("module: 'vertices' must be an array");
  for (const auto& v : jv) {
    vertices.push_back({string_field(v, "id", "vertex"), int_field(field(v, "channels", "vertex"), "vertex channels")});
  }
  std::vector<Edge> edges;
  const auto& je = field(j, "edges", "module");
  if (!je.is_array()) throw FormatError("module: 'edges' must be an array");
  for (const auto& e : je) {
    Edge edge;
    edge.id = string_field(e, "id", "edge");
    const std::string where = "edge '" + edge.id + "'";
    edge.from = string_field(e, "from", where);
    edge.to = string_field(e, "to", where);
    const auto& k = field(e, "kernel", where);
    if (!k.is_array() || k.size() != 2) throw FormatError(where + ": kernel must be [kh, kw]");
    edge.kernel = {int_field(k[0], where + " kernel"), int_field(k[1], where + " kernel")};
    if (e.contains("filter") && !e.at("filter").is_null()) {
      const auto& p = e.at("filter");
      if (!p.is_string()) throw FormatError(where + ": filter must be a path string");
      fs::path fp = p.get<std::string>();
      if (fp.is_relative()) fp = base_dir / fp;
      edge.filter = mten::read_filter(fp);
    }
    edges.push_back(std::move(edge));
  }
  return ModuleGraph(std::move(vertices), std::move(edges), string_field(j, "source", "module"),
                     string_field(j, "sink", "module"));
}

json module_to_json(const ModuleGraph& m, const std::map<std::string, std::string>& filter_paths) {
  json j;
  j["vertices"] = json::array();
  for (const auto& v : m.vertices()) j["vertices"].push_back({{"id", v.id}, {"channels", v.channels}});
  j["edges"] = json::array();
  for (const auto& e : m.edges()) {
    json je = {{"id", e.id}, {"from", e.from}, {"to", e.to}, {"kernel", {e.kernel.h, e.kernel.w}}};
    if (auto it = filter_paths.find(e.id); it != filter_paths.end()) je["filter"] = it->second;
    j["edges"].push_back(std::move(je));
  }
  j["source"] = m.source();
  j["sink"] = m.sink();
  return j;
}

json parse_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw FormatError("write failed for " + path.string());
}

ModuleGraph read_module(const fs::path& path) {
  const json j = parse_json_file(path);
  try {
    return module_from_json(j, path.parent_path());
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string filter_file_name(std::size_t position, const std::string& edge_id) {
  std::string clean;
  for (char c : edge_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    clean.push_back(ok ? c : '_');
  }
  std::ostringstream os;
  os.width(3);
  os.fill('0');
  os << position;
  return os.str() + "_" + clean + ".mten";
}

json write_module(const fs::path& json_path, const ModuleGraph& m, const std::string& filter_subdir) {
  const fs::path dir = json_path.parent_path();
  std::map<std::string, std::string> paths;
  bool any = false;
  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    const auto& edge = m.edges()[e];
    if (!edge.filter) continue;
    if (!any) {
      fs::create_directories(dir / filter_subdir);
      any = true;
    }
    const std::string rel = (fs::path(filter_subdir) / filter_file_name(e, edge.id)).generic_string();
    mten::write_filter(dir / rel, *edge.filter);
    paths[edge.id] = rel;
  }
  json j = module_to_json(m, paths);
  write_text_file(json_path, j.dump(2) + "\n");
  return j;
}

std::string to_dot(const ModuleGraph& m) {
  std::ostringstream os;
  os << "digraph module {\n";
  os << "  rankdir=TB;\n";
  os << "  node [shape=ellipse];\n";
  for (const auto& v : m.vertices()) {
    os << "  " << dot_quote(v.id) << " [label=" << dot_quote(v.id + "\\n" + std::to_string(v.channels) + " ch");
    if (v.id == m.source() || v.id == m.sink()) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (const auto& e : m.edges()) {
    os << "  " << dot_quote(e.from) << " -> " << dot_quote(e.to) << " [label=" << dot_quote(e.id + " " + e.kernel.str())
       << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace modmorph::io
