#include "monolab/estimators.hpp"

#include "monolab/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace monolab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sum(const std::vector<double>& x) { return pairwise_sum(std::span<const double>(x)); }

std::vector<Index> common_ok(const std::vector<const std::vector<std::uint8_t>*>& flags, Index n) {
  std::vector<Index> ok;
  for (Index p = 0; p < n; ++p) {
    bool good = true;
    for (const auto* f : flags) good = good && !(*f)[p];
    if (good) ok.push_back(p);
  }
  return ok;
}

void require_paths(Index n) {
  if (n < 1) throw std::invalid_argument("n_paths must be positive");
}

}  // namespace

// --- Estimate ------------------------------------------------------------------

Estimate Estimate::from_samples(std::span<const double> x) {
  Estimate e;
  e.n = static_cast<std::int64_t>(x.size());
  if (x.empty()) {
    e.mean = kNaN;
    return e;
  }
  e.mean = pairwise_sum(x) / static_cast<double>(x.size());
  std::vector<double> dev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - e.mean) * (x[i] - e.mean);
  e.m2 = pairwise_sum(dev);
  e.std_error = e.n > 1 ? std::sqrt(e.m2 / static_cast<double>(e.n - 1) / static_cast<double>(e.n)) : 0.0;
  return e;
}

Estimate Estimate::exact(double value) {
  Estimate e;
  e.mean = value;
  e.n = 0;
  return e;
}

Estimate Estimate::merge(const Estimate& o) const {
  if (n == 0) return o;
  if (o.n == 0) return *this;
  Estimate r;
  r.n = n + o.n;
  const double na = static_cast<double>(n), nb = static_cast<double>(o.n), nt = static_cast<double>(r.n);
  const double delta = o.mean - mean;
  r.mean = mean + delta * nb / nt;
  r.m2 = m2 + o.m2 + delta * delta * na * nb / nt;
  r.std_error = r.n > 1 ? std::sqrt(r.m2 / (nt - 1.0) / nt) : 0.0;
  return r;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "fail";
}

Verdict worst(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
  return Verdict::Pass;
}

Verdict one_sided_verdict(double lhs, double rhs, double slack, double allowance) {
  if (!std::isfinite(lhs) || std::isnan(rhs)) return Verdict::Fail;
  if (lhs <= rhs) return Verdict::Pass;
  if (lhs <= rhs + slack) return slack > allowance ? Verdict::Inconclusive : Verdict::Pass;
  return Verdict::Fail;
}

Verdict overall(const std::vector<CheckReport>& reports) {
  Verdict v = Verdict::Pass;
  for (const auto& r : reports) v = worst(v, r.verdict);
  return v;
}

double effective_sample_size(std::span<const double> w) {
  std::vector<double> sq(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) sq[i] = w[i] * w[i];
  const double s = pairwise_sum(w);
  const double s2 = pairwise_sum(sq);
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

// --- semigroup -----------------------------------------------------------------

std::vector<double> observable_values(const PathEnsemble& e, std::size_t obs, const TestFunction& f,
                                      bool apply_log) {
  std::vector<double> v;
  v.reserve(e.n_paths);
  for (Index p = 0; p < e.n_paths; ++p) {
    if (e.failed[p]) continue;
    const auto col = e.observations[obs].col(p);
    v.push_back(apply_log ? f.eval_log(col) : f.eval(col));
  }
  return v;
}

Estimate semigroup_estimate(const ModelSpec& model, VecCRef z, double t, double dt, const TestFunction& f,
                            Index n_paths, std::uint64_t seed, bool apply_log, const IntegratorConfig& config) {
  require_paths(n_paths);
  if (t == 0.0) return Estimate::exact(apply_log ? f.eval_log(z) : f.eval(z));
  const PathEnsemble e = simulate_plain(model, z, TimeGrid::make(t, dt), n_paths, seed, config);
  const auto v = observable_values(e, 0, f, apply_log);
  return Estimate::from_samples(v);
}

// --- Harnack -----------------------------------------------------------------

CheckReport harnack_check(const ModelSpec& model, const CouplingSetup& setup, VecCRef z, VecCRef zbar, double t,
                          double dt, const TestFunction& f, Index n_paths, std::uint64_t seed,
                          const IntegratorConfig& config, HarnackOptions options) {
  require_paths(n_paths);
  if (f.is_oracle() && !options.allow_oracle) {
    throw std::invalid_argument("harnack_check: the exp-linear oracle family needs an explicit override");
  }
  if (t < 0.0) throw std::invalid_argument("t must be nonnegative");
  CheckReport r;
  r.claim = "harnack";
  r.t = t;
  const double dist = model.space.distance(z, zbar);
  const double phi = setup.entropy_coefficient(model) * dist * dist;
  const double psi = std::exp(-setup.gamma * t / 2.0) * f.lip_log_bound() * dist;

  double log_pf = 0.0;
  double log_pf_se = 0.0;
  if (t == 0.0) {
    r.lhs = Estimate::exact(f.eval_log(z));
    log_pf = f.eval_log(zbar);
  } else {
    const TimeGrid grid = TimeGrid::make(t, dt);
    // Same stream for both starting points: common random numbers.
    const PathEnsemble ez = simulate_plain(model, z, grid, n_paths, seed, config);
    const PathEnsemble ezb = simulate_plain(model, zbar, grid, n_paths, seed, config);
    const auto ok = common_ok({&ez.failed, &ezb.failed}, n_paths);
    std::vector<double> logf_z, f_zbar;
    for (Index p : ok) {
      logf_z.push_back(f.eval_log(ez.observations[0].col(p)));
      f_zbar.push_back(f.eval(ezb.observations[0].col(p)));
    }
    r.lhs = Estimate::from_samples(logf_z);
    const Estimate pf = Estimate::from_samples(f_zbar);
    log_pf = std::log(pf.mean);
    log_pf_se = pf.std_error / pf.mean;  // delta method
    r.rhs.n = pf.n;
    if (n_paths - static_cast<Index>(ok.size()) > 0) {
      r.notes.push_back(std::to_string(n_paths - static_cast<Index>(ok.size())) + " failed paths excluded");
    }
    if (z == zbar && !(r.lhs.mean <= log_pf + 1e-14 * (1.0 + std::abs(log_pf)))) {
      r.notes.push_back("empirical Jensen violated beyond roundoff");
    }
  }
  r.rhs.mean = log_pf + phi + psi;
  r.rhs.std_error = log_pf_se;
  r.slack = 3.0 * (r.lhs.std_error + r.rhs.std_error);
  r.allowance = phi + psi;
  r.verdict = one_sided_verdict(r.lhs.mean, r.rhs.mean, r.slack, r.allowance);
  r.trivial = f.is_constant();
  r.inputs = {{"t", t},           {"lambda", setup.lambda}, {"gamma", setup.gamma},
              {"dist", dist},     {"f_gain", f.gain()},     {"f_dir_norm", model.space.norm(f.direction())},
              {"n_paths", static_cast<double>(n_paths)}};
  r.terms = {{"P_t_log_f_z", r.lhs.mean}, {"log_P_t_f_zbar", log_pf}, {"Phi", phi}, {"Psi", psi}};
  if (f.is_oracle()) r.notes.push_back("oracle test function (unbounded; outside the theorem's hypotheses)");
  return r;
}

// --- coupled-ensemble checks ---------------------------------------------------

std::vector<CheckReport> entropy_check(const CoupledEnsemble& e, const ModelSpec& model) {
  const double d0 = model.space.distance(e.z0, e.zbar0);
  const double bound = e.setup.entropy_coefficient(model) * d0 * d0;
  const auto ok = e.ok_paths();
  const auto obs_t = e.grid.obs_times();
  std::vector<CheckReport> out;
  for (std::size_t k = 0; k < e.grid.n_obs(); ++k) {
    CheckReport r;
    r.claim = "entropy";
    r.t = obs_t[k];
    std::vector<double> vals;
    vals.reserve(ok.size());
    if (e.setup.frame == Frame::UnderQ) {
      for (Index p : ok) vals.push_back(0.5 * e.cost(k, p));
      r.lhs = Estimate::from_samples(vals);
      r.notes.push_back("E_Q[log R] = half the mean control cost");
    } else {
      std::vector<double> w;
      for (Index p : ok) {
        const double lr = e.log_r(k, p);
        w.push_back(std::exp(lr));
        vals.push_back(std::exp(lr) * lr);
      }
      r.lhs = Estimate::from_samples(vals);
      r.ess = effective_sample_size(w);
    }
    r.rhs = Estimate::exact(bound);
    r.slack = 3.0 * r.lhs.std_error;
    r.allowance = bound;
    r.verdict = one_sided_verdict(r.lhs.mean, bound, r.slack, r.allowance);
    if (r.ess && *r.ess < 0.1 * static_cast<double>(ok.size())) {
      r.verdict = Verdict::Inconclusive;
      r.notes.push_back("effective sample size below 10% of n");
    }
    r.trivial = d0 == 0.0;
    r.inputs = {{"t", r.t}, {"lambda", e.setup.lambda}, {"gamma", e.setup.gamma}, {"dist", d0},
                {"n_paths", static_cast<double>(ok.size())}};
    r.terms = {{"bound", bound}, {"sigma_inv_bound", e.setup.sigma_inv_bound(model)}};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CheckReport> martingale_check(const CoupledEnsemble& e) {
  if (e.setup.frame != Frame::UnderP) throw std::invalid_argument("martingale_check needs an under-P ensemble");
  const auto ok = e.ok_paths();
  const auto obs_t = e.grid.obs_times();
  std::vector<CheckReport> out;
  for (std::size_t k = 0; k < e.grid.n_obs(); ++k) {
    CheckReport r;
    r.claim = "martingale";
    r.t = obs_t[k];
    std::vector<double> w;
    w.reserve(ok.size());
    for (Index p : ok) w.push_back(std::exp(e.log_r(k, p)));
    r.lhs = Estimate::from_samples(w);
    r.rhs = Estimate::exact(1.0);
    r.two_sided = true;
    r.slack = 3.0 * r.lhs.std_error;
    r.allowance = kInf;
    r.ess = effective_sample_size(w);
    r.verdict = std::abs(r.lhs.mean - 1.0) <= r.slack ? Verdict::Pass : Verdict::Fail;
    if (*r.ess < 0.01 * static_cast<double>(ok.size())) {
      r.verdict = Verdict::Inconclusive;
      r.notes.push_back("effective sample size collapsed below 1% of n");
    }
    r.trivial = e.z0 == e.zbar0;
    r.inputs = {{"t", r.t}, {"lambda", e.setup.lambda}, {"n_paths", static_cast<double>(ok.size())}};
    out.push_back(std::move(r));
  }
  return out;
}

ContractionReport contraction_check(const CoupledEnsemble& e, double rate_tol) {
  if (e.setup.frame != Frame::UnderQ) throw std::invalid_argument("contraction_check needs an under-Q ensemble");
  if (e.grid.n_obs() < 5) throw std::invalid_argument("contraction_check needs at least 5 observation times");
  if (!(rate_tol > 0.0)) throw std::invalid_argument("rate_tol must be positive");
  ContractionReport c;
  const auto ok = e.ok_paths();
  const auto obs_t = e.grid.obs_times();
  if (e.grid.obs_steps.front() != 0) {
    throw std::invalid_argument("contraction_check needs t = 0 among the observation times");
  }
  if (ok.empty()) throw std::runtime_error("no successful paths");
  const double init_sq = e.dist_sq(0, ok.front());
  std::vector<double> ts, logs;
  for (std::size_t k = 0; k < e.grid.n_obs(); ++k) {
    CheckReport r;
    r.claim = "contraction";
    r.t = obs_t[k];
    std::vector<double> vals;
    for (Index p : ok) vals.push_back(e.dist_sq(k, p));
    r.lhs = Estimate::from_samples(vals);
    const double bound = std::exp(-e.setup.gamma * r.t) * init_sq;
    r.rhs = Estimate::exact(bound);
    r.slack = 3.0 * r.lhs.std_error;
    r.allowance = kInf;
    r.verdict = one_sided_verdict(r.lhs.mean, bound, r.slack, r.allowance);
    r.inputs = {{"t", r.t}, {"lambda", e.setup.lambda}, {"gamma", e.setup.gamma}, {"dist_sq_0", init_sq}};
    if (r.lhs.mean > 0.0 && std::isfinite(r.lhs.mean)) {
      ts.push_back(r.t);
      logs.push_back(std::log(r.lhs.mean));
    }
    c.pointwise.push_back(std::move(r));
  }
  c.slope_bound = -e.setup.gamma + rate_tol;
  c.trivial = init_sq == 0.0 || ts.size() < 2;
  if (c.trivial) {
    c.slope = -kInf;
    c.slope_pass = true;
    for (auto& r : c.pointwise) r.trivial = true;
  } else {
    const double n = static_cast<double>(ts.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sx += ts[i];
      sy += logs[i];
      sxx += ts[i] * ts[i];
      sxy += ts[i] * logs[i];
    }
    c.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    c.slope_pass = c.slope <= c.slope_bound;
  }
  c.verdict = overall(c.pointwise);
  if (!c.slope_pass) c.verdict = Verdict::Fail;
  return c;
}

// --- gradient ------------------------------------------------------------------

CheckReport gradient_check(const ModelSpec& model, const CouplingSetup& setup, VecCRef z, VecCRef direction,
                           double t, double dt, const TestFunction& f, Index n_paths, std::uint64_t seed,
                           const IntegratorConfig& config, std::optional<double> epsilon) {
  require_paths(n_paths);
  if (std::abs(model.space.norm(direction) - 1.0) > 1e-9) throw std::invalid_argument("direction must have unit norm");
  const double eps = epsilon.value_or(1e-3 * (1.0 + model.space.norm(z)));
  if (!(eps > 0.0)) throw std::invalid_argument("finite-difference epsilon must be positive");
  const Vec zp = z + eps * direction;
  const Vec zm = z - eps * direction;
  const double c_const = setup.lambda * setup.sigma_inv_bound(model) / std::sqrt(setup.gamma);
  const double decay = std::exp(-setup.gamma * t / 2.0);
  const double grad_inf = f.grad_bound();

  CheckReport r;
  r.claim = "gradient";
  r.t = t;
  double sd = 0.0, sd_se = 0.0, pf = 0.0;
  if (t == 0.0) {
    r.lhs = Estimate::exact((f.eval(zp) - f.eval(zm)) / (2.0 * eps));
    pf = f.eval(z);
  } else {
    const TimeGrid grid = TimeGrid::make(t, dt);
    const PathEnsemble ep = simulate_plain(model, zp, grid, n_paths, seed, config);
    const PathEnsemble em = simulate_plain(model, zm, grid, n_paths, seed, config);
    const PathEnsemble e0 = simulate_plain(model, z, grid, n_paths, seed, config);
    const auto ok = common_ok({&ep.failed, &em.failed, &e0.failed}, n_paths);
    std::vector<double> diff, fz;
    for (Index p : ok) {
      diff.push_back((f.eval(ep.observations[0].col(p)) - f.eval(em.observations[0].col(p))) / (2.0 * eps));
      fz.push_back(f.eval(e0.observations[0].col(p)));
    }
    r.lhs = Estimate::from_samples(diff);
    const Estimate fe = Estimate::from_samples(fz);
    pf = fe.mean;
    const double n = static_cast<double>(fz.size());
    const double var = fe.m2 / n;  // P_t f^2 - (P_t f)^2 on the sample
    sd = std::sqrt(std::max(0.0, var));
    std::vector<double> q4(fz.size());
    for (std::size_t i = 0; i < fz.size(); ++i) q4[i] = std::pow(fz[i] - fe.mean, 4);
    const double m4 = sum(q4) / n;
    if (sd > 0.0) sd_se = std::sqrt(std::max(0.0, m4 - var * var) / n) / (2.0 * sd);
  }
  const double signed_derivative = r.lhs.mean;
  r.lhs.mean = std::abs(r.lhs.mean);
  r.rhs.mean = c_const * sd + decay * grad_inf;
  r.rhs.std_error = c_const * sd_se;
  r.rhs.n = r.lhs.n;
  r.slack = 3.0 * (r.lhs.std_error + r.rhs.std_error);
  r.allowance = r.rhs.mean;
  if (std::isinf(grad_inf)) {
    r.trivial = true;
    r.verdict = Verdict::Pass;
    r.notes.push_back("|grad f|_inf is infinite for the oracle family; bound holds trivially");
  } else {
    r.verdict = one_sided_verdict(r.lhs.mean, r.rhs.mean, r.slack, r.allowance);
    if (r.verdict == Verdict::Inconclusive) r.notes.push_back("finite-difference noise exceeds the bound");
  }
  r.trivial = r.trivial || f.is_constant();
  r.inputs = {{"t", t}, {"lambda", setup.lambda}, {"gamma", setup.gamma}, {"epsilon", eps},
              {"f_gain", f.gain()}, {"n_paths", static_cast<double>(n_paths)}};
  r.terms = {{"derivative", signed_derivative}, {"C", c_const},    {"sd_f", sd},
             {"remainder", decay * grad_inf},   {"P_t_f", pf}};
  return r;
}

// --- irreducibility ------------------------------------------------------------

IrreducibilityReport irreducibility_probe(const ModelSpec& model, const std::vector<Vec>& starts, VecCRef center,
                                          double radius, double epsilon, const std::vector<double>& t_list,
                                          double dt, Index n_paths, std::uint64_t seed,
                                          const IntegratorConfig& config) {
  require_paths(n_paths);
  if (starts.empty() || t_list.empty()) throw std::invalid_argument("starts and t_list must be non-empty");
  if (!(radius >= 0.0) || !(epsilon > 0.0)) throw std::invalid_argument("radius >= 0 and epsilon > 0 required");
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] > 0.0) || (i > 0 && !(t_list[i] > t_list[i - 1]))) {
      throw std::invalid_argument("t_list must be positive and strictly increasing");
    }
  }
  const TimeGrid grid = TimeGrid::make(t_list.back(), dt, t_list);
  IrreducibilityReport rep;
  rep.min_final_frequency = kInf;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const PathEnsemble e = simulate_plain(model, starts[s], grid, n_paths, seed, config);
    for (std::size_t k = 0; k < grid.n_obs(); ++k) {
      std::vector<double> hit;
      for (Index p = 0; p < n_paths; ++p) {
        if (e.failed[p]) continue;
        hit.push_back(model.space.distance(e.observations[k].col(p), center) < radius + epsilon ? 1.0 : 0.0);
      }
      IrreducibilityRow row{s, grid.time(grid.obs_steps[k]), Estimate::from_samples(hit)};
      if (k + 1 == grid.n_obs()) rep.min_final_frequency = std::min(rep.min_final_frequency, row.frequency.mean);
      rep.rows.push_back(row);
    }
  }
  rep.all_positive = rep.min_final_frequency > 0.0;
  return rep;
}

// --- ergodicity ----------------------------------------------------------------

Observable Observable::from(const TestFunction& f) {
  return Observable{"test_function", [f](VecCRef x) { return f.eval(x); }};
}

ErgodicityReport ergodicity_probe(const ModelSpec& model, VecCRef z, VecCRef zbar, const Observable& f,
                                  double horizon, double dt, Index n_paths, std::uint64_t seed,
                                  const IntegratorConfig& config, const ErgodicityOptions& options) {
  require_paths(n_paths);
  require_paths(options.time_average_paths);
  ErgodicityReport rep;
  rep.uniqueness_precondition = model.constants.eta_for_coercivity() < 0.0;
  if (!rep.uniqueness_precondition) {
    rep.notes.push_back("coercivity eta >= 0: uniqueness of the invariant measure is not covered");
  }

  // (a) time averages along long paths, one per path, averaged over paths.
  TimeGrid every = TimeGrid::make(horizon, dt);
  every.obs_steps.resize(every.steps);
  for (std::int64_t s = 0; s < every.steps; ++s) every.obs_steps[s] = s + 1;
  const Index m = options.time_average_paths;
  std::vector<double> averages(m, kNaN);
  std::vector<std::uint8_t> failed(m, 0);
  const NoiseSource plain(seed, StreamPurpose::Plain);
  parallel_for(m, [&](Index begin, Index end) {
    StepWorkspace ws(model);
    std::vector<double> values(every.steps);
    for (Index p = begin; p < end; ++p) {
      const StepResult r = simulate_path(model, z, every, static_cast<std::uint64_t>(p), plain, config, ws,
                                         [&](std::size_t k, VecCRef x) { values[k] = f.eval(x); });
      if (!r.ok) {
        failed[p] = 1;
        continue;
      }
      averages[p] = pairwise_sum(std::span<const double>(values)) / static_cast<double>(every.steps);
    }
  });
  std::vector<double> good;
  for (Index p = 0; p < m; ++p) {
    if (!failed[p]) good.push_back(averages[p]);
  }
  rep.time_average = Estimate::from_samples(good);

  // (b) ensemble averages at T from both starting points on independent streams.
  const TimeGrid end_grid = TimeGrid::make(horizon, dt);
  const PathEnsemble ez = simulate_plain(model, z, end_grid, n_paths, seed, config, StreamPurpose::Plain);
  const PathEnsemble ezb = simulate_plain(model, zbar, end_grid, n_paths, seed, config, StreamPurpose::SecondChain);
  auto values_of = [&](const PathEnsemble& e) {
    std::vector<double> v;
    for (Index p = 0; p < e.n_paths; ++p) {
      if (!e.failed[p]) v.push_back(f.eval(e.observations[0].col(p)));
    }
    return v;
  };
  rep.ensemble_z = Estimate::from_samples(values_of(ez));
  rep.ensemble_zbar = Estimate::from_samples(values_of(ezb));
  rep.difference.mean = rep.ensemble_z.mean - rep.ensemble_zbar.mean;
  rep.difference.std_error = std::hypot(rep.ensemble_z.std_error, rep.ensemble_zbar.std_error);
  rep.difference.n = std::min(rep.ensemble_z.n, rep.ensemble_zbar.n);
  rep.chains_agree = std::abs(rep.difference.mean) <= 3.0 * rep.difference.std_error;
  if (options.stationary_value) {
    const double target = *options.stationary_value;
    rep.stationary_match = std::abs(rep.time_average.mean - target) <= options.relative_tol * std::abs(target);
  }
  rep.verdict = rep.chains_agree && rep.stationary_match.value_or(true) ? Verdict::Pass : Verdict::Fail;
  return rep;
}

// --- Young decomposition -------------------------------------------------------

CheckReport young_decomposition_check(const CoupledEnsemble& e, std::size_t obs, const TestFunction& f) {
  if (e.setup.frame != Frame::UnderP) throw std::invalid_argument("young_decomposition_check needs an under-P ensemble");
  if (obs >= e.grid.n_obs()) throw std::out_of_range("observation index out of range");
  const auto ok = e.ok_paths();
  if (ok.empty()) throw std::runtime_error("no successful paths");
  const double n = static_cast<double>(ok.size());
  double max_lr = -kInf;
  for (Index p : ok) max_lr = std::max(max_lr, e.log_r(obs, p));
  std::vector<double> u, raw, fv;
  for (Index p : ok) {
    u.push_back(std::exp(e.log_r(obs, p) - max_lr));
    raw.push_back(std::exp(e.log_r(obs, p)));
    fv.push_back(f.eval(e.z[obs].col(p)));
  }
  const double total = sum(u);
  std::vector<double> wlogf, wlogw;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = u[i] / total;
    wlogf.push_back(w * f.eval_log(e.z[obs].col(ok[i])));
    wlogw.push_back(w > 0.0 ? w * std::log(n * w) : 0.0);
  }
  CheckReport r;
  r.claim = "young";
  r.t = e.grid.time(e.grid.obs_steps[obs]);
  const double entropy = sum(wlogw);
  const double log_mean_f = std::log(sum(fv) / n);
  r.lhs = Estimate::exact(sum(wlogf));
  r.rhs = Estimate::exact(log_mean_f + entropy);
  r.allowance = kInf;
  const double tol = 1e-12 * (1.0 + std::abs(r.lhs.mean) + std::abs(r.rhs.mean));
  r.verdict = r.lhs.mean <= r.rhs.mean + tol ? Verdict::Pass : Verdict::Fail;
  r.ess = effective_sample_size(raw);
  const Estimate raw_mean = Estimate::from_samples(raw);
  if (std::abs(raw_mean.mean - 1.0) > 3.0 * raw_mean.std_error) {
    r.notes.push_back("raw weight mean " + std::to_string(raw_mean.mean) + " deviates from 1 beyond 3 SE");
  }
  if (*r.ess < 0.01 * n) {
    r.verdict = Verdict::Inconclusive;
    r.notes.push_back("effective sample size collapsed below 1% of n");
  }
  r.trivial = f.is_constant();
  r.terms = {{"weighted_log_f", r.lhs.mean}, {"log_mean_f", log_mean_f}, {"weighted_entropy", entropy}};
  r.inputs = {{"t", r.t}, {"lambda", e.setup.lambda}, {"n_paths", n}};
  return r;
}

}  // namespace monolab
