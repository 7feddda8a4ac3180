#pragma once

// Module JSON:
//   {"vertices":[{"id":"s","channels":16}, ...],
//    "edges":[{"id":"e1","from":"s","to":"a","kernel":[3,3],"filter":"filters/e1.mten"}, ...],
//    "source":"s", "sink":"t"}
// "filter" is optional and resolved relative to the JSON file's directory.

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "modmorph/graph.hpp"

namespace modmorph::io {

using json = nlohmann::json;

ModuleGraph module_from_json(const json& j, const std::filesystem::path& base_dir = {});

/// Serializes the topology. Filters are referenced through `filter_paths`
/// (edge id -> path string); edges without an entry get no "filter" key.
json module_to_json(const ModuleGraph& m, const std::map<std::string, std::string>& filter_paths = {});

ModuleGraph read_module(const std::filesystem::path& path);

/// Writes `m` as JSON at `json_path` and every assigned filter as an MTEN file
/// under `<dir of json_path>/<filter_subdir>/`. Returns the JSON written.
json write_module(const std::filesystem::path& json_path, const ModuleGraph& m,
                  const std::string& filter_subdir = "filters");

/// File name used for an edge's filter: "<position>_<sanitized id>.mten".
std::string filter_file_name(std::size_t position, const std::string& edge_id);

json parse_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Graphviz rendering; vertices labeled with channel counts, edges with kernels.
std::string to_dot(const ModuleGraph& m);

}  // namespace modmorph::io
