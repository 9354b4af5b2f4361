#include "monolab/runner.hpp"

#include "monolab/bench.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace monolab {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return kExitPass;
    case Verdict::Inconclusive:
      return kExitInconclusive;
    case Verdict::Fail:
      break;
  }
  return kExitFail;
}

const std::vector<std::string>& check_subcommands() {
  static const std::vector<std::string> names = {"check-assumptions", "simulate", "harnack",        "contraction",
                                                 "entropy",           "martingale", "gradient",     "irreducibility",
                                                 "ergodicity"};
  return names;
}

bool is_subcommand(const std::string& name) {
  if (name == "all" || name == "bench") return true;
  for (const auto& s : check_subcommands()) {
    if (s == name) return true;
  }
  return false;
}

void apply_overrides(ExperimentConfig& config, const RunOverrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.out_dir) config.out_dir = *o.out_dir;
  if (o.paths) config.n_paths = *o.paths;
}

namespace {

json estimate_json(const Estimate& e) { return json{{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}}; }

json pairs_json(const std::vector<std::pair<std::string, double>>& kv) {
  json j = json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

json report_json(const std::string& check, const CheckReport& r) {
  json j;
  j["record"] = "check";
  j["check"] = check;
  j["claim"] = r.claim;
  j["t"] = r.t;
  j["lhs"] = estimate_json(r.lhs);
  j["rhs"] = estimate_json(r.rhs);
  j["slack"] = r.slack;
  j["allowance"] = r.allowance;
  j["two_sided"] = r.two_sided;
  j["verdict"] = to_string(r.verdict);
  j["trivial"] = r.trivial;
  j["ess"] = r.ess ? json(*r.ess) : json(nullptr);
  j["inputs"] = pairs_json(r.inputs);
  j["terms"] = pairs_json(r.terms);
  j["notes"] = r.notes;
  return j;
}

json assumption_json(const AssumptionReport& a) {
  return json{{"record", "assumption"}, {"quantity", a.quantity},   {"sampled_sup", a.sampled_sup},
              {"declared", a.declared}, {"margin", a.margin},       {"sample_count", a.sample_count},
              {"pass", a.pass},         {"norm_label", a.norm_label}};
}

struct CsvRow {
  double t, mean, std_error, bound;
  bool pass;
};

CsvRow row_of(const CheckReport& r) { return {r.t, r.lhs.mean, r.lhs.std_error, r.rhs.mean, r.pass()}; }

// Output of a single subcommand before it is written to disk.
struct Report {
  std::vector<json> records;
  std::vector<CsvRow> rows;
  Verdict verdict = Verdict::Pass;
  std::string raw_csv;  // bench uses its own schema
  bool reproducible = true;

  void add(const std::string& check, const CheckReport& r, bool csv = true) {
    records.push_back(report_json(check, r));
    if (csv) rows.push_back(row_of(r));
    verdict = worst(verdict, r.verdict);
  }
};

std::string csv_text(const std::vector<CsvRow>& rows) {
  std::string out = "t,mean,std_error,bound,pass\n";
  for (const auto& r : rows) {
    out += format_double(r.t) + "," + format_double(r.mean) + "," + format_double(r.std_error) + "," +
           format_double(r.bound) + "," + (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

TimeGrid coupled_grid(const ExperimentConfig& c) {
  if (c.obs_times.empty()) return time_grid(c);
  std::vector<double> times = c.obs_times;
  if (times.front() != 0.0) times.insert(times.begin(), 0.0);
  return TimeGrid::make(c.horizon, c.dt, times);
}

// Shared state of one invocation: the model and lazily simulated coupled ensembles.
struct Context {
  const ExperimentConfig& cfg;
  ModelSpec model;
  IntegratorConfig ic;
  TestFunction f;
  Vec z, zbar;
  std::optional<CoupledEnsemble> under_q;
  std::optional<CoupledEnsemble> under_p;

  explicit Context(const ExperimentConfig& c)
      : cfg(c),
        model(build_model(c)),
        ic(integrator_config(c)),
        f(test_function(c, model)),
        z(c.z.realize(model)),
        zbar(c.zbar.realize(model)) {}

  const CoupledEnsemble& ensemble(Frame frame) {
    auto& slot = frame == Frame::UnderQ ? under_q : under_p;
    if (!slot) {
      const CouplingSetup setup = CouplingSetup::make(model, cfg.lambda, frame);
      slot = simulate_coupled(setup, model, z, zbar, coupled_grid(cfg), cfg.n_paths, cfg.seed, ic);
    }
    return *slot;
  }
};

void note_failures(Report& rep, std::int64_t failed, const std::vector<std::string>& notes) {
  if (failed == 0) return;
  rep.records.push_back(json{{"record", "failures"}, {"failed_paths", failed}, {"notes", notes}});
  rep.verdict = Verdict::Fail;
}

Report run_check_assumptions(Context& ctx) {
  Report rep;
  const auto& c = ctx.cfg;
  std::vector<AssumptionReport> reports = {
      check_monotonicity(ctx.model, c.sample_count, c.box_radius, c.seed),
      check_coercivity(ctx.model, c.sample_count, c.box_radius, c.seed + 1),
      check_growth(ctx.model, c.sample_count, c.box_radius, c.seed + 2),
      check_diffusion_lipschitz(ctx.model, c.sample_count, c.box_radius, c.seed + 3),
      check_pseudo_inverse(ctx.model, c.sample_count, c.box_radius, c.seed + 4),
  };
  if (ctx.model.id == "double_well") {
    reports.push_back(check_double_well_identity(ctx.model, c.sample_count, c.box_radius, c.seed + 5));
  }
  for (const auto& a : reports) {
    rep.records.push_back(assumption_json(a));
    if (!a.pass) rep.verdict = Verdict::Fail;
  }
  return rep;
}

Report run_simulate(Context& ctx) {
  Report rep;
  const auto& c = ctx.cfg;
  const TimeGrid grid = time_grid(c);
  const PathEnsemble e = simulate_plain(ctx.model, ctx.z, grid, c.n_paths, c.seed, ctx.ic);
  for (std::size_t k = 0; k < grid.n_obs(); ++k) {
    const auto values = observable_values(e, k, ctx.f, false);
    std::vector<double> norms;
    for (Index p : e.ok_paths()) norms.push_back(ctx.model.space.norm_sq(e.observations[k].col(p)));
    const Estimate fe = Estimate::from_samples(values);
    const Estimate ne = Estimate::from_samples(norms);
    const double t = grid.time(grid.obs_steps[k]);
    rep.records.push_back(json{{"record", "observation"}, {"t", t}, {"f", estimate_json(fe)},
                               {"norm_sq", estimate_json(ne)}});
    rep.rows.push_back({t, fe.mean, fe.std_error, std::numeric_limits<double>::quiet_NaN(), e.failed_count == 0});
  }
  note_failures(rep, e.failed_count, e.failure_notes);
  return rep;
}

Report run_harnack(Context& ctx) {
  Report rep;
  const auto& c = ctx.cfg;
  const CouplingSetup setup = CouplingSetup::make(ctx.model, c.lambda, Frame::UnderQ);
  for (double t : c.harnack_times) {
    rep.add("harnack", harnack_check(ctx.model, setup, ctx.z, ctx.zbar, t, c.dt, ctx.f, c.n_paths, c.seed, ctx.ic,
                                     HarnackOptions{c.allow_oracle}));
  }
  return rep;
}

Report run_contraction(Context& ctx) {
  Report rep;
  const CoupledEnsemble& e = ctx.ensemble(Frame::UnderQ);
  const ContractionReport cr = contraction_check(e, ctx.cfg.rate_tol);
  for (const auto& r : cr.pointwise) rep.add("contraction", r);
  rep.records.push_back(json{{"record", "contraction_rate"},
                             {"slope", cr.slope},
                             {"slope_bound", cr.slope_bound},
                             {"slope_pass", cr.slope_pass},
                             {"trivial", cr.trivial},
                             {"gamma", e.setup.gamma},
                             {"lambda", e.setup.lambda},
                             {"verdict", to_string(cr.verdict)}});
  rep.verdict = worst(rep.verdict, cr.verdict);
  note_failures(rep, e.failed_count, e.failure_notes);
  return rep;
}

Report run_entropy(Context& ctx) {
  Report rep;
  const CoupledEnsemble& e = ctx.ensemble(Frame::UnderQ);
  for (const auto& r : entropy_check(e, ctx.model)) rep.add("entropy", r);
  note_failures(rep, e.failed_count, e.failure_notes);
  return rep;
}

Report run_martingale(Context& ctx) {
  Report rep;
  const CoupledEnsemble& e = ctx.ensemble(Frame::UnderP);
  for (const auto& r : martingale_check(e)) rep.add("martingale", r);
  if (!ctx.f.is_constant()) {
    rep.add("young_decomposition", young_decomposition_check(e, e.grid.n_obs() - 1, ctx.f), false);
  }
  note_failures(rep, e.failed_count, e.failure_notes);
  return rep;
}

Report run_gradient(Context& ctx) {
  Report rep;
  const auto& c = ctx.cfg;
  const CouplingSetup setup = CouplingSetup::make(ctx.model, c.lambda, Frame::UnderQ);
  Vec d = c.direction.realize(ctx.model);
  d /= ctx.model.space.norm(d);
  for (double t : c.gradient_times) {
    rep.add("gradient", gradient_check(ctx.model, setup, ctx.z, d, t, c.dt, ctx.f, c.n_paths, c.seed, ctx.ic));
  }
  return rep;
}

Report run_irreducibility(Context& ctx) {
  Report rep;
  const auto& c = ctx.cfg;
  std::vector<Vec> starts;
  for (const auto& s : c.irr_starts) starts.push_back(s.realize(ctx.model));
  const IrreducibilityReport ir = irreducibility_probe(ctx.model, starts, c.irr_center.realize(ctx.model),
                                                       c.irr_radius, c.irr_epsilon, c.irr_times, c.dt, c.n_paths,
                                                       c.seed, ctx.ic);
  for (const auto& row : ir.rows) {
    rep.records.push_back(json{{"record", "hitting_frequency"},
                               {"start", row.start},
                               {"t", row.t},
                               {"frequency", estimate_json(row.frequency)}});
    rep.rows.push_back({row.t, row.frequency.mean, row.frequency.std_error, 0.0, row.frequency.mean > 0.0});
  }
  rep.records.push_back(json{{"record", "irreducibility"},
                             {"min_final_frequency", ir.min_final_frequency},
                             {"all_positive", ir.all_positive}});
  rep.verdict = ir.all_positive ? Verdict::Pass : Verdict::Fail;
  return rep;
}

Report run_ergodicity(Context& ctx) {
  Report rep;
  const auto& c = ctx.cfg;
  Observable obs = Observable::from(ctx.f);
  if (c.ergodic_observable == "first_coordinate_square") {
    obs = Observable{"first_coordinate_square", [](VecCRef x) { return x[0] * x[0]; }};
  }
  ErgodicityOptions opt;
  opt.time_average_paths = c.ergodic_time_paths;
  opt.stationary_value = c.ergodic_stationary;
  opt.relative_tol = c.ergodic_rel_tol;
  const ErgodicityReport er =
      ergodicity_probe(ctx.model, ctx.z, ctx.zbar, obs, c.ergodic_horizon, c.dt, c.n_paths, c.seed, ctx.ic, opt);
  json j{{"record", "ergodicity"},
         {"observable", obs.name},
         {"horizon", c.ergodic_horizon},
         {"time_average", estimate_json(er.time_average)},
         {"ensemble_z", estimate_json(er.ensemble_z)},
         {"ensemble_zbar", estimate_json(er.ensemble_zbar)},
         {"difference", estimate_json(er.difference)},
         {"chains_agree", er.chains_agree},
         {"stationary_match", er.stationary_match ? json(*er.stationary_match) : json(nullptr)},
         {"uniqueness_precondition", er.uniqueness_precondition},
         {"verdict", to_string(er.verdict)},
         {"notes", er.notes}};
  rep.records.push_back(j);
  rep.rows.push_back({c.ergodic_horizon, er.difference.mean, er.difference.std_error, 0.0, er.chains_agree});
  rep.verdict = er.verdict;
  return rep;
}

Report run_bench(Context& ctx) {
  Report rep;
  const auto& c = ctx.cfg;
  std::vector<ModelSpec> models;
  for (const auto& name : c.bench_models) {
    ExperimentConfig tmp = c;
    tmp.model = name;
    models.push_back(build_model(tmp));
  }
  const auto rows = bench(models, TimeGrid::make(c.horizon, c.dt), c.bench_paths, c.bench_workers, c.seed, ctx.ic);
  for (const auto& r : rows) {
    rep.records.push_back(json{{"record", "bench"},
                               {"model", r.model},
                               {"dims", r.dims},
                               {"dt", r.dt},
                               {"paths", r.paths},
                               {"steps", r.steps},
                               {"wall_seconds", r.wall_seconds},
                               {"path_steps_per_sec", r.path_steps_per_sec},
                               {"workers", r.workers}});
  }
  rep.raw_csv = bench_csv(rows);
  rep.reproducible = false;
  return rep;
}

Report dispatch(const std::string& name, Context& ctx) {
  if (name == "check-assumptions") return run_check_assumptions(ctx);
  if (name == "simulate") return run_simulate(ctx);
  if (name == "harnack") return run_harnack(ctx);
  if (name == "contraction") return run_contraction(ctx);
  if (name == "entropy") return run_entropy(ctx);
  if (name == "martingale") return run_martingale(ctx);
  if (name == "gradient") return run_gradient(ctx);
  if (name == "irreducibility") return run_irreducibility(ctx);
  if (name == "ergodicity") return run_ergodicity(ctx);
  if (name == "bench") return run_bench(ctx);
  throw std::invalid_argument("unknown subcommand '" + name + "'");
}

std::string stem(const std::string& sub) {
  std::string s = sub;
  for (auto& ch : s) {
    if (ch == '-') ch = '_';
  }
  return s;
}

}  // namespace

RunOutcome run_experiment(const std::string& subcommand, const ExperimentConfig& config, bool quiet) {
  if (!is_subcommand(subcommand)) throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
  const std::vector<std::string> parts =
      subcommand == "all" ? check_subcommands() : std::vector<std::string>{subcommand};
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);

  Context ctx(config);
  RunOutcome outcome;
  json files = json::array();
  json timings = json::object();
  for (const auto& name : parts) {
    const auto start = std::chrono::steady_clock::now();
    Report rep = dispatch(name, ctx);
    SubcommandOutput out;
    out.name = name;
    out.verdict = rep.verdict;

    std::string lines = json{{"record", "header"},
                             {"subcommand", name},
                             {"model", config.model},
                             {"dim", ctx.model.dim()},
                             {"seed", config.seed},
                             {"n_paths", config.n_paths},
                             {"dt", config.dt},
                             {"version", kVersion}}
                            .dump() +
                        "\n";
    for (const auto& r : rep.records) lines += r.dump() + "\n";
    lines += json{{"record", "summary"}, {"subcommand", name}, {"verdict", to_string(rep.verdict)}}.dump() + "\n";
    const std::string jsonl = stem(name) + ".jsonl";
    write_file(dir / jsonl, lines);
    out.files.push_back(jsonl);
    if (!rep.rows.empty() || !rep.raw_csv.empty()) {
      const std::string csv = stem(name) + ".csv";
      write_file(dir / csv, rep.raw_csv.empty() ? csv_text(rep.rows) : rep.raw_csv);
      out.files.push_back(csv);
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& fname : out.files) files.push_back(json{{"name", fname}, {"reproducible", rep.reproducible}});
    timings[name] = out.seconds;
    outcome.verdict = worst(outcome.verdict, out.verdict);
    if (!quiet) {
      std::cout << name << ": " << to_string(out.verdict) << " (" << (dir / jsonl).string() << ", "
                << out.seconds << " s)\n";
    }
    outcome.parts.push_back(std::move(out));
  }

  json manifest{{"version", kVersion},
                {"subcommand", subcommand},
                {"seed", config.seed},
                {"config", serialize_config(config)},
                {"files", files},
                {"timings_seconds", timings},
                {"workers", worker_count()},
                {"verdict", to_string(outcome.verdict)}};
  const fs::path mpath = dir / "manifest.json";
  write_file(mpath, manifest.dump(2) + "\n");
  outcome.manifest_path = mpath.string();
  return outcome;
}

int run_cli(const std::string& subcommand, const std::string& config_path, const RunOverrides& overrides,
            bool quiet) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    apply_overrides(cfg, overrides);
    validate_config(cfg);
    if (!is_subcommand(subcommand)) throw ConfigError(0, "", "unknown subcommand '" + subcommand + "'");
    const bool needs_harnack = subcommand == "harnack" || subcommand == "all";
    if (needs_harnack && cfg.tf_form == "exp_linear" && !cfg.allow_oracle) {
      throw ConfigError(0, "test_function.allow_oracle",
                        "the exp_linear family is unbounded; set allow_oracle = true to run harnack with it");
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const RunOutcome out = run_experiment(subcommand, cfg, quiet);
    if (!quiet) std::cout << "verdict: " << to_string(out.verdict) << "\nmanifest: " << out.manifest_path << "\n";
    return exit_code(out.verdict);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}

ReplayResult replay(const std::string& manifest_path, const std::string& out_dir, bool quiet) {
  const std::string text = read_file(manifest_path);
  if (text.empty()) throw std::runtime_error("cannot read manifest '" + manifest_path + "'");
  const json m = json::parse(text);
  ExperimentConfig cfg = parse_config(m.at("config").get<std::string>());
  cfg.out_dir = out_dir;
  validate_config(cfg);
  const std::string sub = m.at("subcommand").get<std::string>();
  if (fs::weakly_canonical(fs::path(manifest_path).parent_path()) == fs::weakly_canonical(fs::path(out_dir))) {
    throw std::invalid_argument("replay output directory must differ from the original");
  }
  run_experiment(sub, cfg, quiet);

  ReplayResult res;
  const fs::path original = fs::path(manifest_path).parent_path();
  for (const auto& f : m.at("files")) {
    if (!f.at("reproducible").get<bool>()) continue;
    const std::string name = f.at("name").get<std::string>();
    res.compared.push_back(name);
    const std::string a = read_file(original / name);
    const std::string b = read_file(fs::path(out_dir) / name);
    if (a.empty() || a != b) res.mismatched.push_back(name);
  }
  res.identical = res.mismatched.empty() && !res.compared.empty();
  return res;
}

}  // namespace monolab
