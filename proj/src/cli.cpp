#include "fracperim/cli.hpp"

#include "fracperim/config.hpp"
#include "fracperim/limits.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fracperim {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

/// Missing block or an option the command cannot use: reported as a config error.
struct UsageProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a command produces.
struct CommandOutput {
  json results = json::object();
  std::string csv;
  bool passed = true;
  std::string verdict_message;
  /// Extra files for --out, name -> contents.
  std::vector<std::pair<std::string, std::string>> files;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

const KernelFamily& kernel_or_euclidean(RunConfig& cfg) {
  if (!cfg.kernel) cfg.kernel = KernelFamily::from_gauge(euclidean_norm(cfg.dim));
  return *cfg.kernel;
}

const SetRegion& need_set(const RunConfig& cfg, const char* command) {
  if (!cfg.set) throw UsageProblem(std::string(command) + " needs a 'set' block");
  return *cfg.set;
}

json estimates_json(const std::vector<EstimateResult>& es) {
  json a = json::array();
  for (const auto& e : es) a.push_back(to_json(e));
  return a;
}

json sweep_json(const SweepResult& r) {
  json j;
  j["s_grid"] = r.s_grid;
  j["estimates"] = estimates_json(r.estimates);
  j["rescaled"] = r.rescaled;
  j["rescaled_error"] = r.rescaled_error;
  j["extrapolated_limit"] = r.extrapolated_limit;
  j["extrapolation_error"] = r.extrapolation_error;
  j["refit_limit"] = r.refit_limit;
  j["target"] = r.target;
  j["tolerance"] = r.tolerance;
  j["verdict"] = r.passed ? "pass" : "fail";
  return j;
}

std::string sweep_csv(const SweepResult& r) {
  std::string csv = "s,value,std_error,rescaled,target\n";
  for (std::size_t i = 0; i < r.s_grid.size(); ++i)
    csv += num(r.s_grid[i]) + "," + num(r.estimates[i].value) + "," + num(r.estimates[i].std_error) + "," +
           num(r.rescaled[i]) + "," + num(r.target) + "\n";
  return csv;
}

void sweep_verdict(const SweepResult& r, CommandOutput& out) {
  out.passed = r.passed;
  if (!r.passed)
    out.verdict_message = "extrapolated limit " + num(r.extrapolated_limit) + " +- " + num(r.extrapolation_error) +
                          " misses target " + num(r.target) + " at relative tolerance " + num(r.tolerance);
}

// ---------------------------------------------------------------------------
// Commands

CommandOutput cmd_validate_kernel(RunConfig& cfg) {
  if (!cfg.kernel) throw UsageProblem("validate-kernel needs a 'kernel' block");
  const KernelFamily& fam = *cfg.kernel;
  const ValidationReport rep = validate_hypotheses(fam, cfg.validation.s_values,
                                                   default_check_points(cfg.dim, cfg.validation.directions),
                                                   cfg.validation.tolerance);
  CommandOutput out;
  json& j = out.results;
  j["label"] = fam.label();
  j["symmetry_violation"] = rep.symmetry_violation;
  j["homogeneity_violation"] = rep.homogeneity_violation;
  j["empirical_c"] = rep.empirical_c;
  j["declared_c"] = rep.declared_c;
  j["limit_gap"] = rep.limit_gap;
  j["failures"] = rep.failures;
  j["verdict"] = rep.passed ? "pass" : "fail";
  auto has = [&](const char* name) {
    return std::find(rep.failures.begin(), rep.failures.end(), name) == rep.failures.end();
  };
  out.csv = "check,value,passed\n";
  out.csv += "h.0," + num(rep.symmetry_violation) + "," + (has("h.0") ? "true" : "false") + "\n";
  out.csv += "h.1," + num(rep.homogeneity_violation) + "," + (has("h.1") ? "true" : "false") + "\n";
  out.csv += "h.2," + num(rep.empirical_c) + "," + (has("h.2") ? "true" : "false") + "\n";
  out.csv += "limit," + num(rep.limit_gap) + "," + (has("limit") ? "true" : "false") + "\n";
  out.passed = rep.passed;
  if (!rep.passed) {
    std::string names;
    for (const auto& f : rep.failures) names += (names.empty() ? "" : ", ") + f;
    out.verdict_message = "kernel hypotheses violated: " + names;
  }
  return out;
}

CommandOutput cmd_perimeter(RunConfig& cfg) {
  const SetRegion& e = need_set(cfg, "perimeter");
  if (cfg.s.empty()) throw UsageProblem("perimeter needs 's' (a number or a list)");
  const KernelFamily& fam = kernel_or_euclidean(cfg);
  const auto es = cfg.p1_only ? perimeter_p1_multi(e, cfg.domain, fam, cfg.s, cfg.engine)
                              : perimeter_full_multi(e, cfg.domain, fam, cfg.s, cfg.engine);
  CommandOutput out;
  out.results["domain"] = cfg.domain.describe();
  out.results["p1_only"] = cfg.p1_only;
  out.results["estimates"] = estimates_json(es);
  out.csv = "s,value,std_error,p1,p2,p1_error,p2_error\n";
  for (const auto& r : es) {
    const Decomposition d = r.decomposition.value_or(Decomposition{r.value, 0.0, r.std_error, 0.0});
    out.csv += num(r.s) + "," + num(r.value) + "," + num(r.std_error) + "," + num(d.p1) + "," + num(d.p2) + "," +
               num(d.p1_error) + "," + num(d.p2_error) + "\n";
  }
  return out;
}

SweepOptions sweep_options(const RunConfig& cfg) {
  SweepOptions o;
  o.p1_only = cfg.p1_only;
  o.tolerance = cfg.tolerance;
  o.target = cfg.target;
  o.moment = cfg.moment.spec;
  return o;
}

CommandOutput cmd_sweep(RunConfig& cfg) {
  const SetRegion& e = need_set(cfg, "sweep");
  if (cfg.s_grid.size() < 3) throw UsageProblem("sweep needs an 's_grid' of at least three values");
  const SweepResult r = sweep(e, cfg.domain, kernel_or_euclidean(cfg), cfg.s_grid, cfg.engine, sweep_options(cfg));
  CommandOutput out;
  out.results = sweep_json(r);
  out.csv = sweep_csv(r);
  sweep_verdict(r, out);
  return out;
}

CommandOutput cmd_lemmas(RunConfig& cfg) {
  if (!cfg.lemma) throw UsageProblem("lemmas needs a 'lemma' block");
  const LemmaSettings& l = *cfg.lemma;
  const KernelFamily& fam = kernel_or_euclidean(cfg);
  CommandOutput out;
  out.results["kind"] = l.kind;
  if (l.kind == "boundary_term") {
    const auto grid = cfg.s_grid.empty() ? std::vector<double>{0.5, 0.7, 0.9, 0.99} : cfg.s_grid;
    const BoundaryTermReport r = boundary_term_vanishing(fam, grid, cfg.engine);
    out.results["s_grid"] = r.s_grid;
    out.results["values"] = r.values;
    out.results["errors"] = r.errors;
    out.results["decreasing"] = r.decreasing;
    out.results["final_ratio"] = r.final_ratio;
    out.results["verdict"] = r.passed ? "pass" : "fail";
    out.csv = "s,value,std_error\n";
    for (std::size_t i = 0; i < r.s_grid.size(); ++i)
      out.csv += num(r.s_grid[i]) + "," + num(r.values[i]) + "," + num(r.errors[i]) + "\n";
    out.passed = r.passed;
    if (!r.passed)
      out.verdict_message = r.decreasing ? "boundary term ends at " + num(r.final_ratio) + " of its first value"
                                         : "boundary term is not decreasing";
  } else if (l.kind == "halfspace_cube") {
    const auto grid =
        cfg.s_grid.empty() ? std::vector<double>{0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99} : cfg.s_grid;
    const SweepResult r = halfspace_cube_limit(fam, grid, cfg.engine, sweep_options(cfg));
    out.results.update(sweep_json(r));
    out.csv = sweep_csv(r);
    sweep_verdict(r, out);
  } else if (l.kind == "strip") {
    const StripReport r = strip_energy_bound(fam, l.s, l.d1, l.d2, cfg.engine, l.constant);
    json& j = out.results;
    j["s"] = r.s;
    j["d1"] = r.d1;
    j["d2"] = r.d2;
    j["rescaled_p1"] = r.rescaled_p1;
    j["rescaled_error"] = r.rescaled_error;
    j["classical"] = r.classical;
    j["ratio"] = r.ratio;
    j["ratio_error"] = r.ratio_error;
    j["constant"] = r.constant ? json(*r.constant) : json(nullptr);
    j["bound"] = r.bound ? json(*r.bound) : json(nullptr);
    j["verdict"] = r.passed ? "pass" : "fail";
    out.csv = "s,d1,d2,rescaled_p1,rescaled_error,classical,ratio,ratio_error,bound\n";
    out.csv += num(r.s) + "," + num(r.d1) + "," + num(r.d2) + "," + num(r.rescaled_p1) + "," +
               num(r.rescaled_error) + "," + num(r.classical) + "," + num(r.ratio) + "," + num(r.ratio_error) + "," +
               (r.bound ? num(*r.bound) : "") + "\n";
    out.passed = r.passed;
    if (!r.passed) out.verdict_message = "strip energy ratio " + num(r.ratio) + " exceeds the bound";
  } else if (l.kind == "additivity") {
    const SetRegion& e = need_set(cfg, "the additivity check");
    const AdditivityReport r = additivity_defect_check(e, *l.omega1, *l.omega2, fam, l.s, cfg.engine);
    out.results["s"] = l.s;
    out.results["lhs"] = r.lhs;
    out.results["rhs"] = r.rhs;
    out.results["discrepancy"] = r.discrepancy;
    out.results["tolerance"] = r.tolerance;
    out.results["verdict"] = r.passed ? "pass" : "fail";
    out.csv = "s,lhs,rhs,discrepancy,tolerance\n" + num(l.s) + "," + num(r.lhs) + "," + num(r.rhs) + "," +
              num(r.discrepancy) + "," + num(r.tolerance) + "\n";
    out.passed = r.passed;
    if (!r.passed) out.verdict_message = "additivity defect identity off by " + num(r.discrepancy);
  } else {  // coarea
    PiecewiseConstant u;
    for (const auto& [lo, hi, value] : l.pieces) u.pieces.push_back({Interval{lo, hi}, value});
    const CoareaReport r = coarea_check_1d(u, l.s);
    out.results["s"] = l.s;
    out.results["lhs"] = r.lhs;
    out.results["rhs"] = r.rhs;
    out.results["relative_discrepancy"] = r.relative_discrepancy;
    out.results["verdict"] = r.passed ? "pass" : "fail";
    out.csv = "s,lhs,rhs,relative_discrepancy\n" + num(l.s) + "," + num(r.lhs) + "," + num(r.rhs) + "," +
              num(r.relative_discrepancy) + "\n";
    out.passed = r.passed;
    if (!r.passed) out.verdict_message = "coarea identity off by relative " + num(r.relative_discrepancy);
  }
  return out;
}

CommandOutput cmd_moment_norm(RunConfig& cfg) {
  const KernelFamily& fam = kernel_or_euclidean(cfg);
  const MomentNorm m = moment_norm_from_gauge(fam.limit_gauge(), cfg.moment.spec);
  CommandOutput out;
  out.results["method"] = to_string(m.method());
  out.results["accuracy"] = m.accuracy();
  out.results["isotropic_constant"] = isotropic_constant(cfg.dim);
  json rows = json::array();
  for (int k = 0; k < cfg.dim; ++k) out.csv += "x" + std::to_string(k + 1) + ",";
  out.csv += "value,error\n";
  for (const auto& v : cfg.moment.directions) {
    const MomentValue mv = m.evaluate(v);
    rows.push_back({{"direction", std::vector<double>(v.data(), v.data() + v.size())},
                    {"value", mv.value},
                    {"error", mv.error}});
    for (int k = 0; k < cfg.dim; ++k) out.csv += num(v[k]) + ",";
    out.csv += num(mv.value) + "," + num(mv.error) + "\n";
  }
  out.results["values"] = rows;
  if (cfg.dim >= 2) {
    const PolarSupportReport pc = polar_support_check(m, fibonacci_directions(cfg.dim, 12));
    out.results["convexity"] = {{"max_violation", pc.max_violation}, {"checks", pc.checks}, {"passed", pc.passed}};
    out.passed = pc.passed;
    if (!pc.passed) out.verdict_message = "unit ball of the moment norm fails the convexity check by " + num(pc.max_violation);
  }
  out.results["verdict"] = out.passed ? "pass" : "fail";
  return out;
}

CommandOutput cmd_minimize(RunConfig& cfg, const fs::path& config_dir) {
  if (!cfg.minimize) throw UsageProblem("minimize needs a 'minimize' block");
  const MinimizeSettings& ms = *cfg.minimize;
  const KernelFamily& fam = kernel_or_euclidean(cfg);
  StudyTemplate t = halfplane_study_template(fam, ms.cells);
  t.scheme = ms.scheme;
  if (!ms.mask_file.empty()) {
    fs::path path = ms.mask_file;
    if (path.is_relative()) path = config_dir / path;
    std::ifstream in(path);
    if (!in) throw UsageProblem("cannot read mask file '" + path.string() + "'");
    std::stringstream text;
    text << in.rdbuf();
    VoxelGrid g;
    g.lo = t.box.lo;
    g.hi = t.box.hi;
    g.resolution = t.resolution;
    try {
      load_mask_text(text.str(), g);
    } catch (const std::invalid_argument& e) {
      throw UsageProblem(e.what());
    }
    t.exterior_cells = g.occupancy;
    t.flat_target = *ms.flat_target;
  } else {
    t.exterior = *ms.exterior;
    t.flat_target = ms.flat_target ? *ms.flat_target
                                   : anisotropic_perimeter(t.exterior, Domain::bounded(t.inner),
                                                           moment_norm_from_gauge(fam.limit_gauge(), cfg.moment.spec));
  }
  const StudyReport rep = minimizer_convergence_study(t, ms.s_list, ms.schedule, cfg.engine.seed);

  VoxelGrid grid;
  grid.lo = t.box.lo;
  grid.hi = t.box.hi;
  grid.resolution = t.resolution;
  CommandOutput out;
  json entries = json::array();
  out.csv = "s,energy,rescaled_inner,flat_target,symdiff,layers,flat_columns,converged,sweeps\n";
  for (const auto& e : rep.entries) {
    char name[64];
    std::snprintf(name, sizeof name, "occupancy_s%.4g.txt", e.s);
    const std::size_t sweeps = e.trace.energies.empty() ? 0 : e.trace.energies.size() - 1;
    entries.push_back({{"s", e.s},
                       {"energy", e.trace.energy},
                       {"rescaled_inner", e.rescaled_inner},
                       {"symdiff", e.symdiff},
                       {"layers", e.layers},
                       {"flat_columns", e.flat_columns},
                       {"converged", e.trace.converged},
                       {"flips", e.trace.flips},
                       {"sweeps", sweeps},
                       {"snapshot", name}});
    out.csv += num(e.s) + "," + num(e.trace.energy) + "," + num(e.rescaled_inner) + "," + num(rep.flat_target) + "," +
               std::to_string(e.symdiff) + "," + num(e.layers) + "," + num(e.flat_columns) + "," +
               (e.trace.converged ? "true" : "false") + "," + std::to_string(sweeps) + "\n";
    out.files.emplace_back(name, occupancy_to_text(grid, e.trace.occupancy));
  }
  out.results["cells"] = ms.cells;
  out.results["flat_target"] = rep.flat_target;
  out.results["entries"] = entries;
  out.results["bounded"] = rep.bounded;
  out.results["stable"] = rep.stable;
  out.results["verdict"] = rep.passed ? "pass" : "fail";
  out.passed = rep.passed;
  if (!rep.passed)
    out.verdict_message = !rep.bounded ? "rescaled energy exceeds twice the flat-interface target"
                                       : "successive minimizers differ by more than two layers";
  return out;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << contents;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anisotropic nonlocal fractional perimeters and their s -> 1 limits", "fracperim"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, out_dir, format = "json";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "Directory for <command>.json, <command>.csv and snapshots");
  app.add_option("--seed", seed, "Override the engine seed");
  app.add_option("--threads", threads, "Worker threads; results do not depend on it")->check(CLI::Range(1, 1024));
  app.add_option("--format", format, "What to print on stdout")->check(CLI::IsMember({"json", "csv"}));

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate-kernel", "Check the kernel hypotheses h.0-h.2 and the limit gauge"},
      {"perimeter", "Estimate P_{k_s}(E, Omega) with its P1/P2 decomposition"},
      {"sweep", "Rescaled perimeters over an s grid, extrapolated to s = 1"},
      {"lemmas", "Boundary-term, halfspace-cube, strip, additivity or coarea checks"},
      {"moment-norm", "Moment-body norm of the limit gauge on given directions"},
      {"minimize", "Voxel minimizers with fixed exterior data across s"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << one_line(e.what()) << "\n";
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  std::ifstream in(config_path);
  if (!in) {
    err << "error: usage: cannot read config file '" << config_path << "'\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();

  RunConfig cfg;
  try {
    cfg = parse_run_config(text.str());
  } catch (const ConfigError& e) {
    err << "error: config: " << one_line(e.what()) << "\n";
    return 2;
  }
  if (seed) {
    cfg.engine.seed = *seed;
    cfg.moment.spec.seed = *seed;
    cfg.canonical["engine"]["seed"] = *seed;
  }
  cfg.engine.threads = threads;

  const auto start = std::chrono::steady_clock::now();
  CommandOutput result;
  try {
    if (command == "validate-kernel") {
      result = cmd_validate_kernel(cfg);
    } else if (command == "perimeter") {
      result = cmd_perimeter(cfg);
    } else if (command == "sweep") {
      result = cmd_sweep(cfg);
    } else if (command == "lemmas") {
      result = cmd_lemmas(cfg);
    } else if (command == "moment-norm") {
      result = cmd_moment_norm(cfg);
    } else {
      result = cmd_minimize(cfg, fs::path(config_path).parent_path());
    }
  } catch (const UsageProblem& e) {
    err << "error: config: line 1, column 1: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: compute: " << one_line(e.what()) << "\n";
    return 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json record;
  record["version"] = kVersion;
  record["command"] = command;
  record["config_digest"] = config_digest(cfg.canonical);
  record["results"] = result.results;
  record["wall_clock_seconds"] = wall;
  const std::string record_text = record.dump(2) + "\n";

  if (!out_dir.empty()) {
    try {
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / (command + ".json"), record_text);
      write_file(fs::path(out_dir) / (command + ".csv"), result.csv);
      for (const auto& [name, contents] : result.files) write_file(fs::path(out_dir) / name, contents);
    } catch (const std::exception& e) {
      err << "error: io: " << one_line(e.what()) << "\n";
      return 1;
    }
  }
  out << (format == "csv" ? result.csv : record_text);
  if (!result.passed) {
    err << "error: verdict: " << one_line(result.verdict_message) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace fracperim
