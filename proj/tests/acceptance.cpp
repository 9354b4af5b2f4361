// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.
#include "monolab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace monolab;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kIdentityTol = 1e-12;
constexpr double kMonoLow = 1.90, kMonoHigh = 2.00;
constexpr double kExactTol = 1e-12;
constexpr double kMartingaleSeMax = 0.05;
constexpr double kOuSlopeTol = 0.05;
constexpr double kRateTol = 0.2;
constexpr double kEntropyFactor = 1.05;
constexpr double kErgodicRelTol = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec vec2(double a, double b) { return (Vec(2) << a, b).finished(); }

// 1. Coercivity identity of the double-well model.
Outcome c1() {
  const auto m = build_double_well();
  const auto rep = check_double_well_identity(m, 100000, 3.0, 2024);
  return {rep.pass && rep.sampled_sup <= kIdentityTol,
          "max |lhs - identity| = " + fmt("%.3g", rep.sampled_sup) + " over 1e5 samples in [-3,3]^2"};
}

// 2. Monotonicity constant recovery.
Outcome c2() {
  const auto dw = build_double_well();
  const auto rep = check_monotonicity(dw, 100000, 3.0, 2025);
  const double rate = 1.3;
  const auto ou = build_ou_oracle(3, rate);
  const auto ro = check_monotonicity(ou, 100000, 3.0, 2026);
  // every OU quotient equals -2 rate; the sampled sup is the largest of them
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double lo = 1e300;
  for (int i = 0; i < 10000; ++i) {
    Vec a(3), b(3);
    for (int k = 0; k < 3; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
    }
    const double q = 2.0 * (ou.drift_at(a) - ou.drift_at(b)).dot(a - b) / (a - b).squaredNorm();
    lo = std::min(lo, q);
  }
  const bool dw_ok = rep.sampled_sup >= kMonoLow && rep.sampled_sup <= kMonoHigh;
  const bool ou_ok = std::abs(ro.sampled_sup + 2.0 * rate) <= kExactTol * 2.0 * rate &&
                     std::abs(lo + 2.0 * rate) <= kExactTol * 2.0 * rate;
  return {dw_ok && ou_ok, "double-well sup " + fmt("%.6f", rep.sampled_sup) + " in [1.90, 2.00]; OU quotient range [" +
                              fmt("%.15g", lo) + ", " + fmt("%.15g", ro.sampled_sup) + "] vs " +
                              fmt("%.15g", -2.0 * rate)};
}

// 3. Girsanov martingale.
Outcome c3() {
  const auto m = build_double_well();
  const auto setup = CouplingSetup::make(m, 2.0, Frame::UnderP);
  const auto e = simulate_coupled(setup, m, vec2(1, 1), vec2(0, 0), TimeGrid::make(1.0, 1e-3, {0.0, 1.0}), 10000, 31);
  const auto reps = martingale_check(e);
  const auto& r = reps.back();
  const double dev = std::abs(r.lhs.mean - 1.0);
  const bool ok = e.failed_count == 0 && dev <= 3.0 * r.lhs.std_error && r.lhs.std_error < kMartingaleSeMax;
  return {ok, "mean R(1) = " + fmt("%.5f", r.lhs.mean) + ", SE = " + fmt("%.5f", r.lhs.std_error) +
                  ", |mean - 1| / SE = " + fmt("%.2f", dev / r.lhs.std_error)};
}

struct DoubleWellQRun {
  CoupledEnsemble e;
  ContractionReport contraction;
  std::vector<CheckReport> entropy;
};

const DoubleWellQRun& double_well_q_run() {
  static const DoubleWellQRun run = [] {
    const auto m = build_double_well();
    const auto setup = CouplingSetup::make(m, 2.0, Frame::UnderQ);
    DoubleWellQRun r{simulate_coupled(setup, m, vec2(1, 1), vec2(0, 0), TimeGrid::uniform(5.0, 5e-3, 20), 10000, 41),
                     {},
                     {}};
    r.contraction = contraction_check(r.e, kRateTol);
    r.entropy = entropy_check(r.e, m);
    return r;
  }();
  return run;
}

// 4. Contraction.
Outcome c4() {
  const auto ou = build_ou_oracle(1, 1.0);
  const auto s = CouplingSetup::make(ou, 1.0, Frame::UnderQ);
  const auto eo = simulate_coupled(s, ou, Vec::Constant(1, 1.0), Vec::Zero(1), TimeGrid::uniform(2.0, 1e-3, 10), 16, 42);
  const auto co = contraction_check(eo, kRateTol);
  const bool a_ok = std::abs(co.slope + s.gamma) <= kOuSlopeTol;

  const auto& dw = double_well_q_run();
  bool pointwise = true;
  for (const auto& r : dw.contraction.pointwise) pointwise = pointwise && r.pass();
  const bool b_ok = dw.e.failed_count == 0 && dw.contraction.slope <= -2.0 + kRateTol && pointwise;
  return {a_ok && b_ok, "(a) OU slope " + fmt("%.6f", co.slope) + " vs -4 +/- 0.05; (b) double-well slope " +
                            fmt("%.4f", dw.contraction.slope) + " <= -1.8, pointwise " +
                            (pointwise ? "all pass" : "violated")};
}

// 5. Entropy bound.
Outcome c5() {
  const auto dw_model = build_double_well();
  const auto& dw = double_well_q_run();
  const double bound = CouplingSetup::make(dw_model, 2.0, Frame::UnderQ).entropy_coefficient(dw_model) * 2.0;
  double sup = 0.0;
  for (const auto& r : dw.entropy) sup = std::max(sup, r.lhs.mean);
  const bool dw_ok = std::abs(bound - 2.0) <= 1e-12 && sup <= bound * kEntropyFactor;

  // OU: deterministic Q-frame cost. The scheme's curve is the discrete closed
  // form; it differs from the continuous curve by at most dt (pinned allowance).
  const double dt = 1e-3;
  const auto ou = build_ou_oracle(1, 1.0);
  const auto s = CouplingSetup::make(ou, 1.0, Frame::UnderQ);
  const auto grid = TimeGrid::uniform(2.0, dt, 10);
  const auto e = simulate_coupled(s, ou, Vec::Constant(1, 1.0), Vec::Zero(1), grid, 64, 51);
  const auto reps = entropy_check(e, ou);
  const double rho = (1.0 - dt) / (1.0 + dt);
  double worst_discrete = 0.0, worst_cont = 0.0;
  bool ou_ok = true;
  for (std::size_t k = 0; k < reps.size(); ++k) {
    const double n = static_cast<double>(grid.obs_steps[k]);
    const double t = grid.time(grid.obs_steps[k]);
    const double discrete = 0.5 * dt * (1.0 - std::pow(rho, 2.0 * n)) / (1.0 - rho * rho);
    const double cont = (1.0 - std::exp(-4.0 * t)) / 8.0;
    const double se = reps[k].lhs.std_error;
    const double dd = std::abs(reps[k].lhs.mean - discrete);
    const double dc = std::abs(reps[k].lhs.mean - cont);
    worst_discrete = std::max(worst_discrete, dd);
    worst_cont = std::max(worst_cont, dc);
    ou_ok = ou_ok && dd <= 3.0 * se + 1e-12 && dc <= 3.0 * se + dt;
  }
  return {dw_ok && ou_ok, "double-well sup entropy " + fmt("%.4f", sup) + " <= " + fmt("%.4f", bound * kEntropyFactor) +
                              " (bound " + fmt("%.6f", bound) + "); OU |mc - discrete| <= " +
                              fmt("%.2g", worst_discrete) + ", |mc - continuous| <= " + fmt("%.2g", worst_cont) +
                              " (allowance dt = 1e-3)"};
}

// 6. Asymptotic log-Harnack inequality.
Outcome c6() {
  const double a = 0.5;
  const auto ou = build_ou_oracle(1, 1.0);
  const auto s = CouplingSetup::make(ou, 1.0, Frame::UnderQ);
  const auto f = TestFunction::exp_linear(ou.space, Vec::Constant(1, a));
  const double lhs = a * std::exp(-1.0);
  const double rhs = a * a * (1.0 - std::exp(-2.0)) / 4.0 + 1.0 / 8.0 + std::exp(-2.0) * a;
  const auto r = harnack_check(ou, s, Vec::Constant(1, 1.0), Vec::Zero(1), 1.0, 1e-3, f, 10000, 61,
                               IntegratorConfig{}, HarnackOptions{true});
  const bool a_ok = lhs <= rhs && r.pass() && std::abs(r.lhs.mean - lhs) <= 3.0 * r.lhs.std_error &&
                    std::abs(r.rhs.mean - rhs) <= 3.0 * r.rhs.std_error;

  const auto dw = build_double_well();
  const auto ds = CouplingSetup::make(dw, 2.0, Frame::UnderQ);
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int passed = 0, total = 0;
  std::string first_bad;
  for (int draw = 0; draw < 20; ++draw) {
    Vec dir;
    do dir = vec2(u(rng), u(rng));
    while (dir.norm() > 1.0);
    const double c = 2.0 * u(rng);
    const Vec z = 2.0 * vec2(u(rng), u(rng));
    Vec zbar;
    do zbar = 2.0 * vec2(u(rng), u(rng));
    while ((z - zbar).norm() > 2.0);
    const auto tf = TestFunction::bounded(dw.space, dir, c);
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      const auto rep = harnack_check(dw, ds, z, zbar, t, 1e-2, tf, 5000, 1000 + draw);
      ++total;
      if (rep.pass()) {
        ++passed;
      } else if (first_bad.empty()) {
        first_bad = "; draw " + std::to_string(draw) + " t=" + fmt("%g", t) + " " + to_string(rep.verdict);
      }
    }
  }
  return {a_ok && passed == total, "(a) analytic " + fmt("%.5f", lhs) + " <= " + fmt("%.5f", rhs) + ", MC " +
                                       fmt("%.5f", r.lhs.mean) + " / " + fmt("%.5f", r.rhs.mean) + "; (b) " +
                                       std::to_string(passed) + "/" + std::to_string(total) + " pass" + first_bad};
}

// 7. Gradient estimate.
Outcome c7() {
  const double a = 0.5, t = 1.0;
  const auto ou = build_ou_oracle(1, 1.0);
  const auto s = CouplingSetup::make(ou, 1.0, Frame::UnderQ);
  const auto f = TestFunction::exp_linear(ou.space, Vec::Constant(1, a));
  const auto r = gradient_check(ou, s, Vec::Constant(1, 1.0), Vec::Ones(1), t, 1e-3, f, 10000, 71);
  const double pf = std::exp(a * std::exp(-t) + a * a * (1.0 - std::exp(-2.0 * t)) / 4.0);
  const double oracle = a * std::exp(-t) * pf;
  const bool a_ok = std::abs(r.lhs.mean - oracle) <= 3.0 * r.lhs.std_error && r.pass();

  const auto dw = build_double_well();
  const auto ds = CouplingSetup::make(dw, 2.0, Frame::UnderQ);
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int passed = 0, total = 0;
  for (int draw = 0; draw < 10; ++draw) {
    Vec dir;
    do dir = vec2(u(rng), u(rng));
    while (dir.norm() > 1.0);
    const double c = 2.0 * u(rng);
    const Vec z = 2.0 * vec2(u(rng), u(rng));
    Vec d = vec2(u(rng), u(rng));
    d /= d.norm();
    const auto tf = TestFunction::bounded(dw.space, dir, c);
    for (double tt : {1.0, 5.0}) {
      ++total;
      if (gradient_check(dw, ds, z, d, tt, 1e-2, tf, 10000, 2000 + draw).pass()) ++passed;
    }
  }
  return {a_ok && passed == total, "(a) OU derivative " + fmt("%.5f", r.lhs.mean) + " vs " + fmt("%.5f", oracle) +
                                       " (SE " + fmt("%.2g", r.lhs.std_error) + "); (b) " + std::to_string(passed) +
                                       "/" + std::to_string(total) + " pass"};
}

// 8. Degenerate two-block mode on the reaction-diffusion pair.
Outcome c8() {
  const Index n = 32;
  const auto m = build_reaction_diffusion_pair(n, {1.0, 0.1});
  const auto s = CouplingSetup::make(m, std::nullopt, Frame::UnderQ);
  const Vec e1 = laplacian_eigenvector(n, 1);
  Vec z(2 * n), zbar = Vec::Zero(2 * n);
  z << e1, e1;
  const auto e = simulate_coupled(s, m, z, zbar, TimeGrid::uniform(1.0, 1e-3, 10), 400, 81);
  const auto cr = contraction_check(e, kRateTol);
  const auto ent = entropy_check(e, m);
  bool ent_ok = true;
  for (const auto& r : ent) ent_ok = ent_ok && r.pass();

  // control depends only on the Y-blocks
  std::mt19937_64 rng(82);
  std::normal_distribution<double> g;
  bool structural = s.mode == CouplingMode::DegenerateTwoBlock && m.split->sigma1_is_zero;
  for (int i = 0; i < 100 && structural; ++i) {
    Vec a(2 * n), b(2 * n);
    for (Index k = 0; k < 2 * n; ++k) {
      a[k] = g(rng);
      b[k] = g(rng);
    }
    Vec b2 = b;
    b2.head(n) = a.head(n) + Vec::Constant(n, 3.0);
    structural = (control_v(s, m, a, b) - control_v(s, m, a, b2)).norm() == 0.0 &&
                 x_block_correction(m, control_v(s, m, a, b)).norm() == 0.0;
  }
  const bool ok = e.failed_count == 0 && cr.verdict == Verdict::Pass && ent_ok && structural;
  return {ok, "gamma " + fmt("%.3f", s.gamma) + ", slope " + fmt("%.3f", cr.slope) + " <= " +
                  fmt("%.3f", cr.slope_bound) + ", contraction " + to_string(cr.verdict) + ", entropy " +
                  (ent_ok ? "pass" : "fail") + ", X-block control " + (structural ? "zero" : "NONZERO")};
}

// 9. Ergodicity probe.
Outcome c9() {
  const auto ou = build_ou_oracle(1, 1.0);
  const Observable sq{"x^2", [](VecCRef x) { return x[0] * x[0]; }};
  ErgodicityOptions opt;
  opt.time_average_paths = 64;
  opt.stationary_value = 0.5;
  opt.relative_tol = kErgodicRelTol;
  const auto ro =
      ergodicity_probe(ou, Vec::Constant(1, 1.0), Vec::Constant(1, -1.0), sq, 200.0, 1e-2, 64, 91, {}, opt);
  const double rel = std::abs(ro.time_average.mean - 0.5) / 0.5;

  const auto dw = build_double_well();
  const auto f = TestFunction::bounded(dw.space, vec2(0.5, 0.5), 1.0);
  const auto rd = ergodicity_probe(dw, vec2(2, 2), vec2(-2, -2), Observable::from(f), 50.0, 1e-2, 2000, 92);
  const bool ok = rel <= kErgodicRelTol && rd.chains_agree;
  return {ok, "OU time average " + fmt("%.4f", ro.time_average.mean) + " (rel. error " + fmt("%.3f", rel) +
                  "); double-well chains " + fmt("%.4f", rd.ensemble_z.mean) + " vs " +
                  fmt("%.4f", rd.ensemble_zbar.mean) + ", diff/SE " +
                  fmt("%.2f", std::abs(rd.difference.mean) / rd.difference.std_error)};
}

// 10. Reproducibility from the manifest with a different worker count.
Outcome c10() {
  const fs::path root = fs::temp_directory_path() / "monolab_acceptance_c10";
  fs::remove_all(root);
  ExperimentConfig c;
  c.lambda = 2.0;
  c.horizon = 1.0;
  c.dt = 1e-2;
  c.n_paths = 500;
  c.harnack_times = {0.5, 1.0};
  c.gradient_times = {1.0};
  c.irr_times = {0.5, 1.0};
  c.sample_count = 2000;
  c.ergodic_horizon = 2.0;
  c.ergodic_time_paths = 8;
  c.out_dir = (root / "first").string();
  set_worker_count(1);
  run_experiment("all", c, true);
  set_worker_count(3);
  const auto r = replay((root / "first" / "manifest.json").string(), (root / "replay").string(), true);
  set_worker_count(0);
  std::string bad;
  for (const auto& f : r.mismatched) bad += " " + f;
  return {r.identical, std::to_string(r.compared.size() - r.mismatched.size()) + "/" +
                           std::to_string(r.compared.size()) + " report files byte-identical (1 vs 3 workers)" +
                           (bad.empty() ? "" : "; differing:" + bad)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "coercivity identity", 1.0, c1},     {2, "monotonicity constants", 5.0, c2},
      {3, "Girsanov martingale", 60.0, c3},    {4, "contraction", 90.0, c4},
      {5, "entropy bound", 60.0, c5},          {6, "asymptotic log-Harnack", 300.0, c6},
      {7, "gradient estimate", 180.0, c7},     {8, "degenerate two-block mode", 300.0, c8},
      {9, "ergodicity probe", 180.0, c9},      {10, "reproducibility", 600.0, c10},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("criterion %2d [%s]: %s - %s; %.2f s (budget %.0f s%s)\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
