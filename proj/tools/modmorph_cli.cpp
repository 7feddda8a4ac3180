// modmorph command-line front end.
//
// Exit codes: 0 pass, 1 verification failure, 2 invalid input, 3 infeasible morph.
// Machine-readable JSON goes to stdout, human summaries to stderr.

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "modmorph/algebra.hpp"
#include "modmorph/engine.hpp"
#include "modmorph/errors.hpp"
#include "modmorph/executor.hpp"
#include "modmorph/fixtures.hpp"
#include "modmorph/graph_io.hpp"
#include "modmorph/mten.hpp"
#include "modmorph/random.hpp"
#include "modmorph/reduction.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace modmorph;

namespace {

constexpr int kPass = 0;
constexpr int kVerifyFailed = 1;
constexpr int kInvalidInput = 2;
constexpr int kInfeasible = 3;

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

std::pair<int, int> parse_blob_size(const std::string& s) {
  int h = 0;
  int w = 0;
  char x = 0;
  std::istringstream is(s);
  if (!(is >> h >> x >> w) || (x != 'x' && x != 'X') || !is.eof() || h < 1 || w < 1) {
    throw ConfigError("blob size must look like 16x16, got '" + s + "'");
  }
  return {h, w};
}

std::vector<int> parse_shape(const std::string& s) {
  std::vector<int> dims;
  std::istringstream is(s);
  std::string part;
  while (std::getline(is, part, ',')) {
    try {
      dims.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw ConfigError("bad shape entry '" + part + "'");
    }
  }
  if (dims.size() != 4) throw ConfigError("filter shape needs four entries: c_out,c_in,kh,kw");
  return dims;
}

std::map<std::string, std::string> filter_paths_of(const json& module_json) {
  std::map<std::string, std::string> out;
  for (const auto& e : module_json.at("edges")) {
    if (e.contains("filter")) out[e.at("id").get<std::string>()] = e.at("filter").get<std::string>();
  }
  return out;
}

struct ClassifyArgs {
  std::string module;
  bool trace = false;
  bool type_ii_first = false;
};

int cmd_classify(const ClassifyArgs& a) {
  const ModuleGraph m = io::read_module(a.module);
  require_valid(m);
  const auto r = reduce(m, a.type_ii_first ? ReductionOrder::kTypeIIFirst : ReductionOrder::kTypeIFirst);
  json out = {{"classification", to_string(r.classification)}};
  if (a.trace) out["trace"] = trace_to_json(r);
  print_json(out);
  std::cerr << a.module << ": " << to_string(r.classification) << " (" << r.steps.size() << " steps, residual "
            << r.residual_graph.edges().size() << " edges)\n";
  return kPass;
}

struct MorphArgs {
  std::string parent;
  std::string target;
  std::string module;
  std::string edge;
  std::string out;
  std::uint64_t seed = 0;
  std::string strategy = "auto";
  std::string split = "random";
  double tol = 1e-6;
  double solver_tol = 1e-8;
  int max_iter = 100;
  int trials = 10;
  std::string blob = "16x16";
};

int cmd_morph(const MorphArgs& a) {
  MorphRequest req{Filter::zeros(1, 1, {1, 1}), fixtures::m0(), {}, parse_strategy(a.strategy), SplitMode::kRandom, {}};
  if (a.split == "equal") {
    req.split_mode = SplitMode::kEqual;
  } else if (a.split != "random") {
    throw ConfigError("split must be 'random' or 'equal'");
  }
  req.config.seed = a.seed;
  req.config.tol = a.solver_tol;
  req.config.max_iter = a.max_iter;
  const auto [h, w] = parse_blob_size(a.blob);
  req.verify = {a.trials, h, w, a.seed};
  if (!(a.tol > 0.0)) throw ConfigError("--tol must be positive");

  const ModuleGraph target = io::read_module(a.target);
  MorphResult result = [&] {
    if (!a.module.empty()) {
      if (a.edge.empty()) throw ConfigError("--module needs --edge");
      return morph_edge(io::read_module(a.module), a.edge, target, req);
    }
    if (a.parent.empty()) throw ConfigError("morph needs --parent (or --module with --edge)");
    req.parent = mten::read_filter(a.parent);
    req.target = target;
    return morph(req);
  }();

  const fs::path dir = a.out;
  fs::create_directories(dir);
  const json assigned = io::write_module(dir / "assigned.json", result.assigned, "filters");
  const json report = result_to_json(result, filter_paths_of(assigned));
  io::write_text_file(dir / "morph_result.json", report.dump(2) + "\n");
  print_json(report);

  const bool pass = result.equation_residual <= a.tol;
  std::fprintf(stderr, "%s: %s via %s, equation residual %.3e, function residual %.3e -> %s\n", a.target.c_str(),
               to_string(result.plan.classification).c_str(), to_string(result.strategy_used).c_str(),
               result.equation_residual, result.function_residual, pass ? "PASS" : "FAIL");
  return pass ? kPass : kVerifyFailed;
}

struct VerifyArgs {
  std::string parent;
  std::string module;
  int trials = 10;
  std::string blob = "16x16";
  std::uint64_t seed = 0;
  double tol = 1e-6;
};

int cmd_verify(const VerifyArgs& a) {
  const Filter parent = mten::read_filter(a.parent);
  const ModuleGraph m = io::read_module(a.module);
  require_valid(m);
  if (!m.fully_assigned()) throw UnassignedEdgeError(a.module + ": not every edge has a filter");
  const auto [h, w] = parse_blob_size(a.blob);
  const double eq = verify_equation(m, parent);
  const double fn = verify_function(m, parent, {a.trials, h, w, a.seed});
  const bool pass = eq <= a.tol && fn <= a.tol;
  print_json({{"equation_residual", eq}, {"function_residual", fn}, {"tolerance", a.tol}, {"pass", pass}});
  std::fprintf(stderr, "%s: equation residual %.3e, function residual %.3e -> %s\n", a.module.c_str(), eq, fn,
               pass ? "PASS" : "FAIL");
  return pass ? kPass : kVerifyFailed;
}

int cmd_render(const std::string& module) {
  const ModuleGraph m = io::read_module(module);
  require_valid(m);
  std::cout << io::to_dot(m);
  return kPass;
}

struct FixtureArgs {
  std::vector<std::string> names;
  std::string out = ".";
};

int cmd_fixtures_list() {
  json out = json::array();
  for (const auto& n : fixtures::names()) {
    const auto m = *fixtures::by_name(n);
    out.push_back({{"name", n},
                   {"classification", to_string(fixtures::expected_classification(n))},
                   {"vertices", m.vertices().size()},
                   {"edges", m.edges().size()}});
    std::cerr << n << "\n";
  }
  print_json(out);
  return kPass;
}

int cmd_fixtures_emit(const FixtureArgs& a) {
  const auto names = a.names.empty() ? fixtures::names() : a.names;
  json out = json::array();
  for (const auto& n : names) {
    if (!fixtures::by_name(n)) throw ConfigError("unknown fixture '" + n + "'");
    const auto path = fixtures::emit(n, a.out);
    out.push_back(path.generic_string());
    std::cerr << "wrote " << path.generic_string() << "\n";
  }
  print_json(out);
  return kPass;
}

struct GenFilterArgs {
  std::string shape;
  std::uint64_t seed = 0;
  double stddev = 0.0;
  std::string out;
};

int cmd_gen_filter(const GenFilterArgs& a) {
  const auto d = parse_shape(a.shape);
  const KernelShape k{d[2], d[3]};
  check_kernel(k);
  if (d[0] < 1 || d[1] < 1) throw ConfigError("channel counts must be positive");
  Rng rng(a.seed);
  const Filter f = random_filter(d[0], d[1], k, a.stddev > 0.0 ? a.stddev : default_init_std(d[1], k), rng);
  mten::write_filter(a.out, f);
  print_json({{"path", a.out}, {"shape", d}, {"seed", a.seed}, {"norm", frobenius_norm(f)}});
  return kPass;
}

struct ForwardArgs {
  std::string module;
  std::string input;
  std::string out;
};

int cmd_forward(const ForwardArgs& a) {
  const LayeredModule m = io::read_layered(a.module);
  const Blob x = mten::read_blob(a.input);
  const Blob y = forward(m, x);
  mten::write_blob(a.out, y);
  print_json({{"path", a.out}, {"shape", {y.c(), y.h(), y.w()}}, {"norm", frobenius_norm(y)}});
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morph a convolutional layer into a multi-layer module without changing its function."};
  app.require_subcommand(1);

  ClassifyArgs classify_args;
  auto* classify = app.add_subcommand("classify", "Classify a module as simple morphable or complex");
  classify->add_option("module", classify_args.module, "Module JSON")->required()->check(CLI::ExistingFile);
  classify->add_flag("--trace", classify_args.trace, "Include the recorded morph steps");
  classify->add_flag("--type-ii-first", classify_args.type_ii_first, "Exhaust parallel merges before serial ones");

  MorphArgs morph_args;
  auto* morph_cmd = app.add_subcommand("morph", "Assign filters to a target module from a parent filter");
  morph_cmd->add_option("--parent", morph_args.parent, "Parent filter (MTEN)")->check(CLI::ExistingFile);
  morph_cmd->add_option("--target", morph_args.target, "Target module JSON")->required()->check(CLI::ExistingFile);
  morph_cmd->add_option("--module", morph_args.module, "Assigned host module; morphs one of its edges")
      ->check(CLI::ExistingFile);
  morph_cmd->add_option("--edge", morph_args.edge, "Host edge to morph (with --module)");
  morph_cmd->add_option("--out", morph_args.out, "Output directory")->required();
  morph_cmd->add_option("--seed", morph_args.seed, "PRNG seed")->capture_default_str();
  morph_cmd->add_option("--strategy", morph_args.strategy, "auto | replay | direct")->capture_default_str();
  morph_cmd->add_option("--split", morph_args.split, "random | equal")->capture_default_str();
  morph_cmd->add_option("--tol", morph_args.tol, "Pass threshold on the equation residual")->capture_default_str();
  morph_cmd->add_option("--solver-tol", morph_args.solver_tol, "Solver stopping tolerance")->capture_default_str();
  morph_cmd->add_option("--max-iter", morph_args.max_iter, "Solver sweep cap")->capture_default_str();
  morph_cmd->add_option("--trials", morph_args.trials, "Functional check trials")->capture_default_str();
  morph_cmd->add_option("--blob", morph_args.blob, "Functional check blob size HxW")->capture_default_str();

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Check an assigned module against its parent filter");
  verify->add_option("--parent", verify_args.parent, "Parent filter (MTEN)")->required()->check(CLI::ExistingFile);
  verify->add_option("--module", verify_args.module, "Assigned module JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--trials", verify_args.trials, "Random blobs")->capture_default_str();
  verify->add_option("--blob", verify_args.blob, "Blob size HxW")->capture_default_str();
  verify->add_option("--seed", verify_args.seed, "PRNG seed")->capture_default_str();
  verify->add_option("--tol", verify_args.tol, "Pass threshold for both residuals")->capture_default_str();

  std::string render_module;
  auto* render = app.add_subcommand("render", "Print a module as Graphviz DOT");
  render->add_option("module", render_module, "Module JSON")->required()->check(CLI::ExistingFile);

  FixtureArgs fixture_args;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "Built-in module library");
  fixtures_cmd->require_subcommand(1);
  auto* fixtures_list = fixtures_cmd->add_subcommand("list", "List fixture names");
  auto* fixtures_emit = fixtures_cmd->add_subcommand("emit", "Write fixture JSON files");
  fixtures_emit->add_option("names", fixture_args.names, "Fixtures to write (default: all)");
  fixtures_emit->add_option("--out", fixture_args.out, "Output directory")->capture_default_str();

  GenFilterArgs gen_args;
  auto* gen = app.add_subcommand("gen-filter", "Write a random filter");
  gen->add_option("--shape", gen_args.shape, "c_out,c_in,kh,kw")->required();
  gen->add_option("--seed", gen_args.seed, "PRNG seed")->capture_default_str();
  gen->add_option("--std", gen_args.stddev, "Standard deviation (default sqrt(2 / fan_in))");
  gen->add_option("--out", gen_args.out, "Output MTEN path")->required();

  ForwardArgs fwd_args;
  auto* fwd = app.add_subcommand("forward", "Evaluate a (layered) module on a blob");
  fwd->add_option("--module", fwd_args.module, "Module JSON, optionally with per-edge ops")
      ->required()
      ->check(CLI::ExistingFile);
  fwd->add_option("--input", fwd_args.input, "Input blob (MTEN)")->required()->check(CLI::ExistingFile);
  fwd->add_option("--out", fwd_args.out, "Output blob path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidInput;
  }

  try {
    if (*classify) return cmd_classify(classify_args);
    if (*morph_cmd) return cmd_morph(morph_args);
    if (*verify) return cmd_verify(verify_args);
    if (*render) return cmd_render(render_module);
    if (*fixtures_list) return cmd_fixtures_list();
    if (*fixtures_emit) return cmd_fixtures_emit(fixture_args);
    if (*gen) return cmd_gen_filter(gen_args);
    if (*fwd) return cmd_forward(fwd_args);
  } catch (const InvalidTargetError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const StrategyError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
  return kInvalidInput;
}
