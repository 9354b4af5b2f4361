#include "monolab/integrate.hpp"

#include "monolab/summation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <span>
#include <stdexcept>
#include <thread>

namespace monolab {

// --- time grid -----------------------------------------------------------------

namespace {

std::int64_t grid_index(double t, double dt, double horizon) {
  const double r = t / dt;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-9 * std::max(1.0, std::abs(r)) || t < 0.0 || t > horizon * (1.0 + 1e-12)) {
    throw std::invalid_argument("observation time " + std::to_string(t) + " is not a grid node");
  }
  return static_cast<std::int64_t>(k);
}

}  // namespace

TimeGrid TimeGrid::make(double horizon, double dt, const std::vector<double>& obs_times) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon T must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  const double r = std::round(horizon / dt);
  if (r < 1.0) throw std::invalid_argument("time grid has zero steps (dt > T)");
  if (r > 4.0e9) throw std::invalid_argument("time grid has too many steps");
  TimeGrid g;
  g.horizon = horizon;
  g.dt = dt;
  g.steps = static_cast<std::int64_t>(r);
  if (std::abs(static_cast<double>(g.steps) * dt - horizon) > 1e-12 * std::max(1.0, horizon)) {
    throw std::invalid_argument("dt does not divide T (steps * dt must equal T to 1e-12)");
  }
  if (obs_times.empty()) {
    g.obs_steps = {g.steps};
  } else {
    for (double t : obs_times) g.obs_steps.push_back(grid_index(t, dt, horizon));
    std::sort(g.obs_steps.begin(), g.obs_steps.end());
    g.obs_steps.erase(std::unique(g.obs_steps.begin(), g.obs_steps.end()), g.obs_steps.end());
  }
  return g;
}

TimeGrid TimeGrid::uniform(double horizon, double dt, int count, bool include_zero) {
  if (count < 1) throw std::invalid_argument("observation count must be positive");
  TimeGrid g = make(horizon, dt);
  g.obs_steps.clear();
  if (include_zero) g.obs_steps.push_back(0);
  for (int k = 1; k <= count; ++k) {
    const std::int64_t s = (g.steps * k) / count;
    if (g.obs_steps.empty() || s > g.obs_steps.back()) g.obs_steps.push_back(s);
  }
  return g;
}

std::vector<double> TimeGrid::obs_times() const {
  std::vector<double> t;
  t.reserve(obs_steps.size());
  for (auto s : obs_steps) t.push_back(time(s));
  return t;
}

// --- Newton solver ---------------------------------------------------------------

StepWorkspace::StepWorkspace(const ModelSpec& model) {
  const Index d = model.dim();
  residual.resize(d);
  trial.resize(d);
  trial_residual.resize(d);
  delta.resize(d);
  drift.resize(d);
  increment.resize(d);
  noise.resize(model.noise_dim);
  jac_ = Mat::Zero(d, d);
  band_ = Mat::Zero(d, d);
  rhs_.resize(d);
  order_ = model.band.ordering;
  if (order_.empty()) {
    order_.resize(d);
    for (Index i = 0; i < d; ++i) order_[i] = i;
  }
  if (static_cast<Index>(order_.size()) != d) throw std::invalid_argument("band ordering has wrong size");
}

namespace {

inline double pull_diag(const ImplicitPull* pull, Index i) {
  return pull && i >= pull->begin && i < pull->end ? pull->rate : 0.0;
}

// F(y) = y - base - dt (b(y) + pull(y))
void step_residual(const ModelSpec& model, VecCRef base, double dt, VecCRef y, const ImplicitPull* pull,
                   VecRef drift, VecRef out) {
  model.drift(y, drift);
  out = y - base - dt * drift;
  if (pull) {
    for (Index i = pull->begin; i < pull->end; ++i) out[i] -= dt * pull->rate * ((*pull->target)[i] - y[i]);
  }
}

double inf_norm(VecCRef v) {
  double m = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (!(a <= m)) m = a;  // propagates NaN
  }
  return m;
}

}  // namespace

bool StepWorkspace::factor_and_solve(const ModelSpec& model, double dt, const ImplicitPull* pull) {
  const Index d = static_cast<Index>(order_.size());
  const Index kl = std::min(model.band.lower, d - 1);
  const Index ku = std::min(model.band.upper, d - 1);
  // Banded LU without pivoting on P (I - dt J) P^T; solves for -residual.
  for (Index i = 0; i < d; ++i) {
    const Index lo = std::max<Index>(0, i - kl);
    const Index hi = std::min<Index>(d - 1, i + ku);
    for (Index j = lo; j <= hi; ++j) band_(i, j) = -dt * jac_(order_[i], order_[j]);
    band_(i, i) += 1.0 + dt * pull_diag(pull, order_[i]);
    rhs_[i] = -residual[order_[i]];
  }
  bool stable = true;
  for (Index k = 0; k < d && stable; ++k) {
    const double piv = band_(k, k);
    double row_scale = 0.0;
    for (Index j = k; j <= std::min(d - 1, k + ku); ++j) row_scale = std::max(row_scale, std::abs(band_(k, j)));
    if (!(std::abs(piv) > 1e-12 * row_scale)) {
      stable = false;
      break;
    }
    const Index imax = std::min(d - 1, k + kl);
    const Index jmax = std::min(d - 1, k + ku);
    for (Index i = k + 1; i <= imax; ++i) {
      const double l = band_(i, k) / piv;
      if (l == 0.0) continue;
      band_(i, k) = l;
      for (Index j = k + 1; j <= jmax; ++j) band_(i, j) -= l * band_(k, j);
      rhs_[i] -= l * rhs_[k];
    }
  }
  if (stable) {
    for (Index i = d - 1; i >= 0; --i) {
      double s = rhs_[i];
      for (Index j = i + 1; j <= std::min(d - 1, i + ku); ++j) s -= band_(i, j) * rhs_[j];
      rhs_[i] = s / band_(i, i);
    }
    for (Index i = 0; i < d; ++i) delta[order_[i]] = rhs_[i];
    return true;
  }
  // Tiny pivot: dense LU with partial pivoting on the full matrix.
  Mat a = -dt * jac_;
  for (Index i = 0; i < d; ++i) a(i, i) += 1.0 + dt * pull_diag(pull, i);
  Eigen::PartialPivLU<Mat> lu(a);
  delta = lu.solve(-residual);
  return delta.allFinite();
}

StepResult solve_implicit(const ModelSpec& model, VecCRef base, double dt, VecRef y, const IntegratorConfig& config,
                          StepWorkspace& ws, const ImplicitPull* pull) {
  if (!(config.newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  StepResult res;
  step_residual(model, base, dt, y, pull, ws.drift, ws.residual);
  double norm = inf_norm(ws.residual);
  for (int it = 0;; ++it) {
    res.iterations = it;
    res.residual = norm;
    if (norm <= config.newton_tol) return res;
    if (!std::isfinite(norm)) {
      res.ok = false;
      res.diagnostic = "non-finite residual";
      return res;
    }
    if (it >= config.newton_max_iter) {
      res.ok = false;
      res.diagnostic = "Newton did not converge in " + std::to_string(config.newton_max_iter) +
                       " iterations (residual " + std::to_string(norm) + ")";
      return res;
    }
    model.drift_jacobian(y, ws.jac_);
    if (!ws.factor_and_solve(model, dt, pull)) {
      res.ok = false;
      res.diagnostic = "singular Newton matrix";
      return res;
    }
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 40; ++halving) {
      ws.trial = y + step * ws.delta;
      step_residual(model, base, dt, ws.trial, pull, ws.drift, ws.trial_residual);
      const double trial_norm = inf_norm(ws.trial_residual);
      if (trial_norm <= (1.0 - 1e-4 * step) * norm || (!config.damped_fallback && std::isfinite(trial_norm))) {
        y = ws.trial;
        ws.residual = ws.trial_residual;
        norm = trial_norm;
        accepted = true;
        break;
      }
      if (!config.damped_fallback) break;
      step *= 0.5;
    }
    if (!accepted) {
      res.ok = false;
      res.iterations = it + 1;
      res.diagnostic = "damped Newton line search stalled at residual " + std::to_string(norm);
      return res;
    }
  }
}

StepResult advance(const ModelSpec& model, VecCRef z, double dt, VecCRef dW, const IntegratorConfig& config,
                   StepWorkspace& ws, VecRef out) {
  model.diffusion_apply(z, dW, ws.increment);
  model.drift(z, ws.drift);
  if (config.scheme == Scheme::TamedExplicitEuler) {
    const double scale = dt / (1.0 + dt * model.space.norm(ws.drift));
    out = z + scale * ws.drift + ws.increment;
    StepResult r;
    if (!out.allFinite()) {
      r.ok = false;
      r.diagnostic = "non-finite tamed step";
    }
    return r;
  }
  ws.increment += z;  // base point z + sigma(z) dW
  out = ws.increment + dt * ws.drift;
  return solve_implicit(model, ws.increment, dt, out, config, ws);
}

StepOutcome implicit_step(const ModelSpec& model, VecCRef z, double dt, VecCRef dW, const IntegratorConfig& config) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  StepWorkspace ws(model);
  StepOutcome o;
  o.state.resize(model.dim());
  IntegratorConfig c = config;
  c.scheme = Scheme::DriftImplicitEuler;
  o.result = advance(model, z, dt, dW, c, ws, o.state);
  return o;
}

// --- worker pool ---------------------------------------------------------------

namespace {
int g_worker_override = 0;
}

int worker_count() {
  if (g_worker_override > 0) return g_worker_override;
  if (const char* env = std::getenv("MONOLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_worker_count(int workers) { g_worker_override = std::max(0, workers); }

void parallel_for(Index n, const std::function<void(Index begin, Index end)>& body) {
  if (n <= 0) return;
  const Index workers = std::min<Index>(worker_count(), n);
  if (workers == 1) {
    body(0, n);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (Index w = 0; w < workers; ++w) {
    const Index begin = n * w / workers;
    const Index end = n * (w + 1) / workers;
    threads.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// --- plain ensembles -----------------------------------------------------------

std::vector<Index> PathEnsemble::ok_paths() const {
  std::vector<Index> ok;
  for (Index p = 0; p < n_paths; ++p) {
    if (!failed[p]) ok.push_back(p);
  }
  return ok;
}

StepResult simulate_path(const ModelSpec& model, VecCRef z0, const TimeGrid& grid, std::uint64_t path,
                         const NoiseSource& noise, const IntegratorConfig& config, StepWorkspace& ws,
                         const PathObserver& observer) {
  if (z0.size() != model.dim()) throw std::invalid_argument("initial state has wrong dimension");
  Vec z = z0;
  Vec next(model.dim());
  const double sqdt = std::sqrt(grid.dt);
  std::size_t k = 0;
  if (k < grid.n_obs() && grid.obs_steps[k] == 0) observer(k++, z);
  StepResult total;
  for (std::int64_t s = 0; s < grid.steps; ++s) {
    noise.fill(path, static_cast<std::uint64_t>(s), sqdt, std::span<double>(ws.noise.data(), ws.noise.size()));
    const StepResult r = advance(model, z, grid.dt, ws.noise, config, ws, next);
    total.iterations += r.iterations;
    if (!r.ok) {
      total.ok = false;
      total.residual = r.residual;
      total.diagnostic = "path " + std::to_string(path) + " step " + std::to_string(s) + ": " + r.diagnostic;
      return total;
    }
    total.residual = std::max(total.residual, r.residual);
    z.swap(next);
    while (k < grid.n_obs() && grid.obs_steps[k] == s + 1) observer(k++, z);
  }
  return total;
}

PathEnsemble simulate_plain(const ModelSpec& model, VecCRef z0, const TimeGrid& grid, Index n_paths,
                            std::uint64_t seed, const IntegratorConfig& config, StreamPurpose purpose) {
  if (n_paths < 1) throw std::invalid_argument("n_paths must be positive");
  PathEnsemble e;
  e.model_id = model.id;
  e.grid = grid;
  e.seed = seed;
  e.purpose = purpose;
  e.n_paths = n_paths;
  e.observations.assign(grid.n_obs(), Mat(model.dim(), n_paths));
  e.failed.assign(n_paths, 0);
  std::vector<std::string> notes(n_paths);
  const NoiseSource noise(seed, purpose);
  parallel_for(n_paths, [&](Index begin, Index end) {
    StepWorkspace ws(model);
    for (Index p = begin; p < end; ++p) {
      const StepResult r = simulate_path(model, z0, grid, static_cast<std::uint64_t>(p), noise, config, ws,
                                         [&](std::size_t k, VecCRef z) { e.observations[k].col(p) = z; });
      if (!r.ok) {
        e.failed[p] = 1;
        notes[p] = r.diagnostic;
        for (auto& m : e.observations) m.col(p).setConstant(std::numeric_limits<double>::quiet_NaN());
      }
    }
  });
  for (Index p = 0; p < n_paths; ++p) {
    if (!e.failed[p]) continue;
    ++e.failed_count;
    if (e.failure_notes.size() < 5) e.failure_notes.push_back(notes[p]);
  }
  return e;
}

StrongOrderTable strong_order_probe(const ModelSpec& model, VecCRef z0, double horizon,
                                    const std::vector<double>& dt_list, Index n_paths, std::uint64_t seed,
                                    const IntegratorConfig& config) {
  if (dt_list.empty()) throw std::invalid_argument("dt_list must not be empty");
  if (n_paths < 1) throw std::invalid_argument("n_paths must be positive");
  for (std::size_t i = 1; i < dt_list.size(); ++i) {
    if (!(dt_list[i] < dt_list[i - 1])) throw std::invalid_argument("dt_list must be strictly descending");
  }
  const double fine_dt = dt_list.back() / 4.0;
  const TimeGrid fine = TimeGrid::make(horizon, fine_dt);
  std::vector<std::int64_t> ratios;
  for (double dt : dt_list) {
    TimeGrid::make(horizon, dt);  // validates that dt divides T
    const double r = std::round(dt / fine_dt);
    if (std::abs(dt / fine_dt - r) > 1e-9 * r) throw std::invalid_argument("dt_list entries must be commensurate");
    ratios.push_back(static_cast<std::int64_t>(r));
  }
  const std::size_t nd = dt_list.size();
  const Index m = model.noise_dim;
  std::vector<double> sq_err(nd * n_paths, 0.0);
  const NoiseSource noise(seed, StreamPurpose::Reference);
  parallel_for(n_paths, [&](Index begin, Index end) {
    StepWorkspace ws(model);
    Mat dw(m, fine.steps);
    Vec z(model.dim()), next(model.dim()), coarse_dw(m);
    for (Index p = begin; p < end; ++p) {
      for (std::int64_t s = 0; s < fine.steps; ++s) {
        noise.fill(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(s), std::sqrt(fine_dt),
                   std::span<double>(dw.col(s).data(), m));
      }
      z = z0;
      bool ok = true;
      for (std::int64_t s = 0; s < fine.steps && ok; ++s) {
        ok = advance(model, z, fine_dt, dw.col(s), config, ws, next).ok;
        z.swap(next);
      }
      if (!ok) throw std::runtime_error("reference path failed in strong_order_probe");
      const Vec reference = z;
      for (std::size_t i = 0; i < nd; ++i) {
        z = z0;
        const std::int64_t r = ratios[i];
        for (std::int64_t s = 0; s < fine.steps; s += r) {
          coarse_dw = dw.middleCols(s, r).rowwise().sum();
          if (!advance(model, z, dt_list[i], coarse_dw, config, ws, next).ok) {
            throw std::runtime_error("coarse path failed in strong_order_probe");
          }
          z.swap(next);
        }
        sq_err[i * n_paths + p] = model.space.norm_sq(z - reference);
      }
    }
  });
  StrongOrderTable t;
  t.reference_dt = fine_dt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t i = 0; i < nd; ++i) {
    const double mean = pairwise_sum(std::span<const double>(sq_err.data() + i * n_paths, n_paths)) /
                        static_cast<double>(n_paths);
    const double rms = std::sqrt(mean);
    t.rows.push_back({dt_list[i], rms});
    if (rms > 0.0) {
      const double x = std::log(dt_list[i]), y = std::log(rms);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++used;
    }
  }
  t.exact = used == 0;
  if (used >= 2) t.slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
  return t;
}

}  // namespace monolab
