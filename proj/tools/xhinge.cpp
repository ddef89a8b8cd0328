// xhinge: command-line driver for evaluation, optimization, selection,
// refinement and rendering of compliant cross-hinge designs.

#include "io.hpp"
#include "svg.hpp"
#include "xhinge/pipeline.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace xhinge;
using io::json;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitError = 1;
constexpr int kExitOutOfRange = 2;
constexpr int kExitNoFeasible = 3;

struct Globals {
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string out = ".";
  int elements = 30;
  int steps = 20;
};

struct DesignSource {
  std::string csv;
  std::vector<std::size_t> rows;
  bool all_rows = false;
  std::string inline_values;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--design-csv", csv, "CSV file with the 13 design columns");
    cmd->add_option("--row", rows, "row index (0-based), repeatable");
    cmd->add_flag("--all", all_rows, "use every row of --design-csv");
    cmd->add_option("--design", inline_values, "13 comma-separated design values");
  }

  std::vector<std::pair<std::size_t, DesignVector>> load() const {
    std::vector<std::pair<std::size_t, DesignVector>> out;
    if (!inline_values.empty()) {
      const auto v = io::parse_list(inline_values);
      if (v.size() != kNumDesignVars)
        throw Error(ErrorCode::ConfigError, "--design needs " + std::to_string(kNumDesignVars) + " values");
      out.emplace_back(0, DesignVector::from_array(v));
      return out;
    }
    if (csv.empty()) throw Error(ErrorCode::ConfigError, "no design given (use --design or --design-csv)");
    const auto designs = io::read_designs(csv);
    if (designs.empty()) throw Error(ErrorCode::ConfigError, csv + ": no design rows");
    if (all_rows) {
      for (std::size_t i = 0; i < designs.size(); ++i) out.emplace_back(i, designs[i]);
      return out;
    }
    const std::vector<std::size_t> pick = rows.empty() ? std::vector<std::size_t>{0} : rows;
    for (std::size_t r : pick) {
      if (r >= designs.size()) throw Error(ErrorCode::ConfigError, "row " + std::to_string(r) + " out of range");
      out.emplace_back(r, designs[r]);
    }
    return out;
  }

  std::vector<std::string> inputs() const { return csv.empty() ? std::vector<std::string>{} : std::vector{csv}; }
};

EvaluationOptions evaluation_options(const Globals& g, double strain_limit) {
  if (g.elements < 1) throw Error(ErrorCode::ConfigError, "--elements must be positive");
  if (g.steps < 1) throw Error(ErrorCode::ConfigError, "--steps must be positive");
  EvaluationOptions opt;
  opt.model.elements_per_flexure = g.elements;
  opt.sweep.steps = g.steps;
  opt.sweep.strain_limit = strain_limit;
  return opt;
}

std::vector<double> normalized_weights(const std::vector<double>& w, const char* what) {
  if (w.size() != 3) throw Error(ErrorCode::ConfigError, std::string(what) + " needs 3 values");
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0)) throw Error(ErrorCode::ConfigError, std::string(what) + " must be non-negative");
    total += v;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ConfigError, std::string(what) + " sum to zero");
  if (std::abs(total - 1.0) > 1e-9)
    std::cerr << "warning: " << what << " sum to " << total << ", normalized to 1\n";
  std::vector<double> out = w;
  for (double& v : out) v /= total;
  return out;
}

std::vector<std::vector<double>> parse_weight_list(const std::vector<std::string>& raw) {
  std::vector<std::vector<double>> out;
  for (const auto& s : raw) out.push_back(normalized_weights(io::parse_list(s), "target weights"));
  return out;
}

/// "name=lo:hi" overrides applied to the standard bounds.
DesignBounds apply_bound_overrides(const std::vector<std::string>& overrides) {
  DesignBounds b = DesignBounds::standard();
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto colon = o.find(':', eq == std::string::npos ? 0 : eq);
    if (eq == std::string::npos || colon == std::string::npos)
      throw Error(ErrorCode::ConfigError, "bound override '" + o + "' is not name=lo:hi");
    const std::string name = o.substr(0, eq);
    std::size_t i = 0;
    while (i < kNumDesignVars && kDesignColumns[i] != name) ++i;
    if (i == kNumDesignVars) throw Error(ErrorCode::ConfigError, "unknown design variable '" + name + "'");
    const double lo = io::parse_double(std::string_view(o).substr(eq + 1, colon - eq - 1));
    const double hi = io::parse_double(std::string_view(o).substr(colon + 1));
    const DesignBounds std_b = DesignBounds::standard();
    if (!(lo <= hi) || lo < std_b.lower[i] || hi > std_b.upper[i])
      throw Error(ErrorCode::OutOfRange, "bound override for " + name + " must satisfy " +
                                             io::format_double(std_b.lower[i]) + " <= lo <= hi <= " +
                                             io::format_double(std_b.upper[i]));
    b.lower[i] = lo;
    b.upper[i] = hi;
  }
  return b;
}

/// Run record: argv, effective configuration (re-loadable with --config),
/// versions and input/output hashes.
class Manifest {
public:
  Manifest(std::string command, int argc, char** argv) : command_(std::move(command)) {
    for (int i = 0; i < argc; ++i) argv_.emplace_back(argv[i]);
  }
  void input(const std::string& path) { inputs_.push_back(path); }
  void output(const std::string& path) { outputs_.push_back(path); }

  void write(const CLI::App& app, const Globals& g) const {
    json j;
    j["tool"] = "xhinge";
    j["version"] = kVersion;
    j["command"] = command_;
    j["argv"] = argv_;
    j["seed"] = g.seed;
    j["workers"] = g.workers;
    j["config"] = effective_config(app, command_);
    j["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                   "." + std::to_string(EIGEN_MINOR_VERSION)},
                     {"cli11", CLI11_VERSION},
                     {"compiler", __VERSION__},
                     {"cxx", static_cast<long>(__cplusplus)}};
    const auto hashed = [](const std::vector<std::string>& paths) {
      json arr = json::array();
      for (const auto& p : paths) arr.push_back({{"path", p}, {"sha256", io::sha256_file(p)}});
      return arr;
    };
    j["inputs"] = hashed(inputs_);
    j["outputs"] = hashed(outputs_);
    fs::create_directories(g.out);
    io::write_json(fs::path(g.out) / ("manifest_" + command_ + ".json"), j);
    std::ofstream(fs::path(g.out) / ("manifest_" + command_ + ".ini")) << j["config"].get<std::string>();
  }

  /// Globals plus the active subcommand's options, unset lists dropped.
  /// Replay with `xhinge --config <file>`.
  static std::string effective_config(const CLI::App& app, const std::string& command) {
    std::istringstream all(app.config_to_str(true, false));
    std::string line, current, globals, section = "[" + command + "]\n";
    while (std::getline(all, line)) {
      if (!line.empty() && line.front() == '[') {
        current = line.substr(1, line.find(']') - 1);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 1);
      if (value == "\"\"" || value == "[]" || key == "config") continue;
      std::string scope = current;
      if (const auto dot = key.find('.'); dot != std::string::npos) {
        scope = key.substr(0, dot);
        key = key.substr(dot + 1);
      }
      if (scope.empty()) globals += key + "=" + value + "\n";
      else if (scope == command) section += key + "=" + value + "\n";
    }
    return globals + section;
  }

private:
  std::string command_;
  std::vector<std::string> argv_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return fs::path(g.out) / name;
}

// --- subcommands ------------------------------------------------------------

int cmd_evaluate(const Globals& g, const DesignSource& src, const std::string& trace, double strain_limit,
                 Manifest& manifest) {
  const auto opt = evaluation_options(g, strain_limit);
  const auto designs = src.load();
  for (const auto& [row, d] : designs) require_in_bounds(d);
  for (const auto& p : src.inputs()) manifest.input(p);

  json reports = json::array();
  json traces = json::array();
  for (const auto& [row, d] : designs) {
    EvaluationOptions o = opt;
    o.sweep.keep_states = !trace.empty();
    const EvaluationDetail det = evaluate_detailed(d, o);
    json r = io::report_json(d, det.objectives);
    if (designs.size() > 1) r["row"] = row;
    reports.push_back(r);
    if (!trace.empty()) traces.push_back(io::trace_json(d, det));
  }
  std::cout << (designs.size() == 1 ? reports[0] : reports).dump(2) << '\n';
  if (!trace.empty()) {
    io::write_json(trace, designs.size() == 1 ? traces[0] : traces);
    manifest.output(trace);
  }
  return 0;
}

struct OptimizeArgs {
  std::string algorithm = "nsga2";
  std::size_t pop = 500;
  std::size_t gens = 1000;
  std::size_t archive_size = 0;
  std::vector<std::string> bounds;
};

int cmd_optimize(const Globals& g, const OptimizeArgs& a, double strain_limit, Manifest& manifest) {
  moo::MooConfig cfg;
  cfg.algorithm = moo::parse_algorithm(a.algorithm);
  cfg.population = a.pop;
  cfg.generations = a.gens;
  cfg.seed = g.seed;
  cfg.workers = g.workers;
  cfg.archive_size = a.archive_size;
  cfg.validate();
  const auto problem = hinge_problem(evaluation_options(g, strain_limit), apply_bound_overrides(a.bounds));

  const fs::path log_path = out_path(g, "progress.log");
  std::ofstream log(log_path);
  const auto progress = [&](const moo::GenerationStats& s) {
    std::ostringstream line;
    line << "gen " << s.generation << " feasible " << s.feasible << " archive " << s.archive_size << " hv "
         << io::format_double(s.hypervolume);
    std::cout << line.str() << std::endl;
    log << line.str() << '\n';
  };
  const moo::RunResult res = moo::run(cfg, problem, progress);
  log.close();
  manifest.output(log_path.string());

  if (res.archive.empty()) {
    std::cerr << "no feasible designs after " << res.evaluations << " evaluations\n";
    return kExitNoFeasible;
  }
  const fs::path csv = out_path(g, "archive.csv");
  io::write_archive(csv, res.archive);
  manifest.output(csv.string());
  manifest.output(io::sidecar_path(csv).string());
  std::cout << "archive " << res.archive.size() << " designs, " << res.evaluations << " evaluations -> " << csv.string()
            << '\n';
  return 0;
}

int cmd_merge(const Globals& g, const std::vector<std::string>& inputs, Manifest& manifest) {
  if (inputs.size() < 2) throw Error(ErrorCode::ConfigError, "merge needs at least two archives");
  ParetoArchive merged = io::read_archive(inputs[0]);
  manifest.input(inputs[0]);
  for (std::size_t i = 1; i < inputs.size(); ++i) {
    merged = moo::merge_archives(merged, io::read_archive(inputs[i]));
    manifest.input(inputs[i]);
  }
  if (merged.empty()) throw Error(ErrorCode::EmptyArchive, "merged archive is empty");
  const fs::path csv = out_path(g, "merged.csv");
  io::write_archive(csv, merged);
  manifest.output(csv.string());
  manifest.output(io::sidecar_path(csv).string());
  std::cout << "merged " << merged.size() << " designs -> " << csv.string() << '\n';
  return 0;
}

json selection_json(const ParetoArchive& archive, std::size_t row, const std::vector<double>& target) {
  const auto& e = archive.entries[row];
  const auto yn = normalize(e.y, archive.ideal, archive.nadir);
  json j;
  j["target"] = target;
  j["row"] = row;
  j["design"] = io::design_json(DesignVector::from_array(e.x));
  j["objectives"] = e.y;
  j["normalized"] = yn;
  j["pseudo_weights"] = pseudo_weights(yn);
  return j;
}

int cmd_select(const Globals& g, const std::string& archive_csv, const std::vector<std::string>& targets_raw,
               Manifest& manifest) {
  auto targets = parse_weight_list(targets_raw);
  if (targets.empty()) targets.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const ParetoArchive archive = io::read_archive(archive_csv);
  manifest.input(archive_csv);
  if (archive.empty()) throw Error(ErrorCode::EmptyArchive, archive_csv + ": archive is empty");

  json out;
  json sel = json::array();
  for (const auto& t : targets) sel.push_back(selection_json(archive, select_by_target(archive, t), t));
  out["selections"] = sel;
  json table = json::array();
  const auto front = normalize_front(archive);
  for (std::size_t k = 0; k < archive.size(); ++k) {
    json row;
    row["row"] = k;
    try {
      row["pseudo_weights"] = pseudo_weights(front.values[k]);
    } catch (const Error&) {
      row["pseudo_weights"] = nullptr;
    }
    table.push_back(row);
  }
  out["pseudo_weight_table"] = table;
  std::cout << out.dump(2) << '\n';
  const fs::path path = out_path(g, "selection.json");
  io::write_json(path, out);
  manifest.output(path.string());
  return 0;
}

struct RefineArgs {
  std::string archive;
  std::vector<std::string> targets;
  std::string weights;
  int iterations = 200;
};

int cmd_refine(const Globals& g, const RefineArgs& a, const DesignSource& src, double strain_limit,
               Manifest& manifest) {
  if (a.archive.empty()) throw Error(ErrorCode::ConfigError, "refine needs --archive for the frozen normalization");
  const ParetoArchive archive = io::read_archive(a.archive);
  manifest.input(a.archive);
  if (archive.empty()) throw Error(ErrorCode::EmptyArchive, a.archive + ": archive is empty");

  std::optional<DesignVector> start;
  std::optional<std::size_t> row;
  if (!src.inline_values.empty() || !src.csv.empty()) {
    const auto designs = src.load();
    start = designs.front().second;
    for (const auto& p : src.inputs()) manifest.input(p);
  } else if (!a.targets.empty()) {
    row = select_by_target(archive, parse_weight_list(a.targets).front());
  } else if (!src.rows.empty()) {
    row = src.rows.front();
    if (*row >= archive.size()) throw Error(ErrorCode::ConfigError, "row out of range");
  } else {
    throw Error(ErrorCode::ConfigError, "refine needs --row, --target-weights or a design");
  }
  if (row) start = DesignVector::from_array(archive.entries[*row].x);
  require_in_bounds(*start);

  std::vector<double> w;
  if (!a.weights.empty()) w = normalized_weights(io::parse_list(a.weights), "scalarization weights");
  NelderMeadSettings nm;
  nm.max_iterations = a.iterations;
  const auto opt = evaluation_options(g, strain_limit);
  const RefinementOutcome r = refine_design(*start, archive, w, opt, nm);

  json out;
  if (row) out["row"] = *row;
  out["weights"] = r.weights;
  out["ideal"] = archive.ideal;
  out["nadir"] = archive.nadir;
  out["iterations"] = r.search.iterations;
  out["evaluations"] = r.search.evaluations;
  out["before"] = {{"design", io::design_json(r.start)}, {"objectives", io::objectives_json(r.before)},
                   {"scalar", r.scalar_before}};
  out["after"] = {{"design", io::design_json(r.refined)}, {"objectives", io::objectives_json(r.after)},
                  {"scalar", r.scalar_after}};
  std::cout << out.dump(2) << '\n';
  const fs::path path = out_path(g, "refined.json");
  io::write_json(path, out);
  manifest.output(path.string());
  return 0;
}

int cmd_render(const Globals& g, const DesignSource& src, const std::string& trace_path, Manifest& manifest) {
  const auto designs = src.load();
  for (const auto& [row, d] : designs) require_in_bounds(d);
  for (const auto& p : src.inputs()) manifest.input(p);
  std::optional<json> trace;
  if (!trace_path.empty()) {
    trace = io::read_json(trace_path);
    manifest.input(trace_path);
    if (trace->is_array() && designs.size() != trace->size())
      throw Error(ErrorCode::ConfigError, "trace holds " + std::to_string(trace->size()) + " designs, expected " +
                                              std::to_string(designs.size()));
  }
  for (std::size_t k = 0; k < designs.size(); ++k) {
    const auto& [row, d] = designs[k];
    const HingeGeometry geom = build_hinge(d, {}, kDefaultFeasibilitySegments + 1);
    const json* t = nullptr;
    if (trace) t = trace->is_array() ? &(*trace)[k] : &*trace;
    char name[32];
    std::snprintf(name, sizeof name, "design_%04zu.svg", row);
    const fs::path path = out_path(g, name);
    std::ofstream(path) << svg::render_design(geom, t);
    manifest.output(path.string());
    std::cout << path.string() << '\n';
  }
  return 0;
}

int cmd_front(const Globals& g, const std::string& archive_csv, Manifest& manifest) {
  const ParetoArchive archive = io::read_archive(archive_csv);
  manifest.input(archive_csv);
  if (archive.empty()) throw Error(ErrorCode::EmptyArchive, archive_csv + ": archive is empty");
  const auto front = normalize_front(archive);
  for (std::size_t i = 0; i < front.degenerate.size(); ++i)
    if (front.degenerate[i])
      std::cerr << "warning: objective " << io::kObjectiveColumns[i] << " is constant over the archive\n";
  io::CsvTable t;
  t.header = {"row"};
  for (auto c : io::kObjectiveColumns) t.header.emplace_back(c);
  for (auto c : io::kNormalizedColumns) t.header.emplace_back(c);
  for (auto c : io::kWeightColumns) t.header.emplace_back(c);
  for (std::size_t k = 0; k < archive.size(); ++k) {
    std::vector<double> row{static_cast<double>(k)};
    row.insert(row.end(), archive.entries[k].y.begin(), archive.entries[k].y.end());
    row.insert(row.end(), front.values[k].begin(), front.values[k].end());
    try {
      const auto w = pseudo_weights(front.values[k]);
      row.insert(row.end(), w.begin(), w.end());
    } catch (const Error&) {
      row.insert(row.end(), 3, std::nan(""));
    }
    t.rows.push_back(std::move(row));
  }
  const fs::path path = out_path(g, "front.csv");
  io::write_csv(path, t);
  manifest.output(path.string());
  std::cout << "front " << archive.size() << " designs -> " << path.string() << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesis of compliant cross-hinge designs"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "INI file; [section] per subcommand");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  double strain_limit = 0.2;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--workers", g.workers, "evaluation threads (optimize only)")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--elements", g.elements, "beam elements per flexure")->capture_default_str();
  app.add_option("--steps", g.steps, "rotation increments over the action range")->capture_default_str();
  app.add_option("--strain-limit", strain_limit, "admissible bending strain")->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "evaluate designs and print the objective report");
  DesignSource eval_src;
  std::string trace;
  eval_src.add_to(evaluate);
  evaluate->add_option("--trace", trace, "write the per-step sweep JSON here");

  auto* optimize = app.add_subcommand("optimize", "run NSGA-II or SPEA2 and write the Pareto archive");
  OptimizeArgs oa;
  optimize->add_option("--algorithm", oa.algorithm, "nsga2 | spea2")->capture_default_str();
  optimize->add_option("--pop", oa.pop, "population size")->capture_default_str();
  optimize->add_option("--gens", oa.gens, "generations")->capture_default_str();
  optimize->add_option("--archive-size", oa.archive_size, "SPEA2 archive size (0: population)")
      ->capture_default_str();
  optimize->add_option("--bound", oa.bounds, "override a design bound, name=lo:hi");

  auto* merge = app.add_subcommand("merge", "non-dominated union of archives");
  std::vector<std::string> merge_inputs;
  merge->add_option("archives", merge_inputs, "archive CSV files")->required()->check(CLI::ExistingFile);

  auto* select = app.add_subcommand("select", "pick archive rows by target pseudo-weights");
  std::string select_archive;
  std::vector<std::string> select_targets;
  select->add_option("archive", select_archive, "archive CSV")->required()->check(CLI::ExistingFile);
  select->add_option("--target-weights", select_targets, "w_r,w_c,w_k (repeatable)");

  auto* refine = app.add_subcommand("refine", "Nelder-Mead refinement of one design");
  RefineArgs ra;
  DesignSource refine_src;
  refine->add_option("--archive", ra.archive, "archive CSV (normalization and row source)")
      ->check(CLI::ExistingFile);
  refine->add_option("--row", refine_src.rows, "archive row to refine");
  refine->add_option("--target-weights", ra.targets, "select the start row by pseudo-weights");
  refine->add_option("--design", refine_src.inline_values, "explicit start design");
  refine->add_option("--design-csv", refine_src.csv, "explicit start design from CSV (first row)");
  refine->add_option("--weights", ra.weights, "scalarization weights (default: inverse normalization)");
  refine->add_option("--iterations", ra.iterations, "Nelder-Mead iterations")->capture_default_str();

  auto* render = app.add_subcommand("render", "SVG drawings of designs");
  DesignSource render_src;
  std::string render_trace;
  render_src.add_to(render);
  render->add_option("--trace", render_trace, "trace JSON from evaluate --trace for a deformed overlay");

  auto* front = app.add_subcommand("front", "export the normalized front with pseudo-weights");
  for (auto* sub : app.get_subcommands({})) sub->configurable();
  std::string front_archive;
  front->add_option("archive", front_archive, "archive CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* cmd = app.get_subcommands().front();
  Manifest manifest(cmd->get_name(), argc, argv);
  int rc = 0;
  try {
    if (cmd == evaluate) rc = cmd_evaluate(g, eval_src, trace, strain_limit, manifest);
    else if (cmd == optimize) rc = cmd_optimize(g, oa, strain_limit, manifest);
    else if (cmd == merge) rc = cmd_merge(g, merge_inputs, manifest);
    else if (cmd == select) rc = cmd_select(g, select_archive, select_targets, manifest);
    else if (cmd == refine) rc = cmd_refine(g, ra, refine_src, strain_limit, manifest);
    else if (cmd == render) rc = cmd_render(g, render_src, render_trace, manifest);
    else if (cmd == front) rc = cmd_front(g, front_archive, manifest);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    rc = e.code() == ErrorCode::OutOfRange ? kExitOutOfRange : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    rc = kExitError;
  }
  try {
    manifest.write(app, g);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot write manifest: " << e.what() << '\n';
    if (rc == 0) rc = kExitError;
  }
  return rc;
}
