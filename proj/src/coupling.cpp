#include "monolab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace monolab {

const char* to_string(CouplingMode mode) {
  return mode == CouplingMode::NonDegenerate ? "non_degenerate" : "degenerate_two_block";
}

const char* to_string(Frame frame) { return frame == Frame::UnderP ? "under_P" : "under_Q"; }

double CouplingSetup::default_lambda(const ModelSpec& model) {
  return std::max(model.constants.eta, 0.0) / 2.0 + 1.0;
}

CouplingSetup CouplingSetup::make(const ModelSpec& model, std::optional<double> lambda, Frame frame,
                                  std::optional<CouplingMode> mode) {
  CouplingSetup s;
  s.eta = model.constants.eta;
  s.lambda = lambda.value_or(default_lambda(model));
  s.frame = frame;
  s.mode = mode.value_or(model.degenerate() ? CouplingMode::DegenerateTwoBlock : CouplingMode::NonDegenerate);
  if (!std::isfinite(s.lambda) || !(s.lambda > s.eta / 2.0)) {
    throw std::invalid_argument("lambda = " + std::to_string(s.lambda) + " must exceed eta/2 = " +
                                std::to_string(s.eta / 2.0));
  }
  if (s.mode == CouplingMode::DegenerateTwoBlock && !model.degenerate()) {
    throw std::invalid_argument("degenerate coupling needs a model with a block split");
  }
  if (s.mode == CouplingMode::NonDegenerate && !model.diffusion_pinv_apply) {
    throw std::invalid_argument("model " + model.id + " has no pseudo-inverse of sigma; use the degenerate mode");
  }
  s.gamma = 2.0 * s.lambda - s.eta;
  return s;
}

double CouplingSetup::sigma_inv_bound(const ModelSpec& model) const {
  if (mode == CouplingMode::DegenerateTwoBlock) return model.split->sigma2_inv_bound;
  return model.constants.sigma_inv_bound;
}

double CouplingSetup::entropy_coefficient(const ModelSpec& model) const {
  const double s = sigma_inv_bound(model);
  return lambda * lambda * s * s / (2.0 * gamma);
}

void control_v(const CouplingSetup& setup, const ModelSpec& model, VecCRef z, VecCRef zbar, VecRef v) {
  if (setup.mode == CouplingMode::DegenerateTwoBlock) {
    if (!model.split) throw std::invalid_argument("degenerate control needs a block split");
    const Index ny = model.split->dim_y;
    const Vec dy = z.tail(ny) - zbar.tail(ny);
    model.split->sigma2_pinv_apply(z, dy, v);
  } else {
    const Vec dz = z - zbar;
    model.diffusion_pinv_apply(z, dz, v);
  }
  v *= setup.lambda;
}

Vec control_v(const CouplingSetup& setup, const ModelSpec& model, VecCRef z, VecCRef zbar) {
  Vec v(model.noise_dim);
  control_v(setup, model, z, zbar, v);
  return v;
}

Vec x_block_correction(const ModelSpec& model, VecCRef v) {
  if (!model.split) throw std::invalid_argument("x_block_correction needs a block split");
  Vec out = Vec::Zero(model.split->dim_x);
  if (!model.split->sigma1_is_zero) model.split->sigma1_apply(v, out);
  return out;
}

CouplingWorkspace::CouplingWorkspace(const ModelSpec& model)
    : step(model),
      v(model.noise_dim),
      shifted_noise(model.noise_dim),
      base(model.dim()),
      z_next(model.dim()),
      zbar_next(model.dim()),
      scratch(model.dim()) {}

namespace {

// out = root of y = base + dt (b(y) + pull), starting from the explicit predictor at `from`.
StepResult implicit_from_base(const ModelSpec& model, VecCRef from, double dt, const IntegratorConfig& config,
                              CouplingWorkspace& ws, VecRef out, const ImplicitPull* pull) {
  model.drift(from, ws.step.drift);
  out = ws.base + dt * ws.step.drift;
  if (pull) {
    for (Index i = pull->begin; i < pull->end; ++i) out[i] += dt * pull->rate * ((*pull->target)[i] - from[i]);
  }
  return solve_implicit(model, ws.base, dt, out, config, ws.step, pull);
}

void subtract_sigma1(const ModelSpec& model, VecCRef v, double dt, CouplingWorkspace& ws) {
  if (model.split->sigma1_is_zero) return;
  const Index nx = model.split->dim_x;
  Vec corr(nx);
  model.split->sigma1_apply(v, corr);
  ws.base.head(nx) -= dt * corr;
}

StepResult fail_with(StepResult r, const char* which) {
  r.diagnostic = std::string(which) + ": " + r.diagnostic;
  return r;
}

}  // namespace

StepResult coupled_step(const CouplingSetup& setup, const ModelSpec& model, VecRef z, VecRef zbar, double dt,
                        VecCRef dW, CouplingAccumulators& acc, const IntegratorConfig& config,
                        CouplingWorkspace& ws) {
  const bool coalesced = z == zbar;
  StepResult rz, rzbar;
  const bool under_p = setup.frame == Frame::UnderP;

  if (coalesced) {
    // Identical states see identical dynamics and noise: the pair stays together.
    rz = advance(model, z, dt, dW, config, ws.step, ws.z_next);
    if (!rz.ok) return fail_with(rz, "Z");
    z = ws.z_next;
    zbar = ws.z_next;
    return rz;
  }

  control_v(setup, model, z, zbar, ws.v);
  const double v_sq = ws.v.squaredNorm();
  const double v_dw = ws.v.dot(dW);

  if (setup.mode == CouplingMode::NonDegenerate) {
    if (under_p) {
      rz = advance(model, z, dt, dW, config, ws.step, ws.z_next);
      if (!rz.ok) return fail_with(rz, "Z");
      ws.shifted_noise = dW + dt * ws.v;
      rzbar = advance(model, zbar, dt, ws.shifted_noise, config, ws.step, ws.zbar_next);
      if (!rzbar.ok) return fail_with(rzbar, "Zbar");
    } else {
      model.diffusion_apply(z, dW, ws.base);
      ws.base += z - dt * setup.lambda * (z - zbar);
      rz = implicit_from_base(model, z, dt, config, ws, ws.z_next, nullptr);
      if (!rz.ok) return fail_with(rz, "Z");
      rzbar = advance(model, zbar, dt, dW, config, ws.step, ws.zbar_next);
      if (!rzbar.ok) return fail_with(rzbar, "Zbar");
    }
  } else {
    const auto& split = *model.split;
    const Index nx = split.dim_x;
    const Index ny = split.dim_y;
    const ImplicitPull pull{setup.lambda, 0, nx, &ws.z_next};
    if (under_p) {
      rz = advance(model, z, dt, dW, config, ws.step, ws.z_next);
      if (!rz.ok) return fail_with(rz, "Z");
      ws.shifted_noise = dW + dt * ws.v;
      model.diffusion_apply(zbar, ws.shifted_noise, ws.base);
      ws.base += zbar;
      subtract_sigma1(model, ws.v, dt, ws);  // X-bar is driven by sigma_1 dW, not by the shifted noise
      rzbar = implicit_from_base(model, zbar, dt, config, ws, ws.zbar_next, &pull);
      if (!rzbar.ok) return fail_with(rzbar, "Zbar");
    } else {
      model.diffusion_apply(z, dW, ws.base);
      ws.base += z;
      subtract_sigma1(model, ws.v, dt, ws);
      ws.base.tail(ny) -= dt * setup.lambda * (z.tail(ny) - zbar.tail(ny));
      rz = implicit_from_base(model, z, dt, config, ws, ws.z_next, nullptr);
      if (!rz.ok) return fail_with(rz, "Z");
      model.diffusion_apply(zbar, dW, ws.base);
      ws.base += zbar;
      subtract_sigma1(model, ws.v, dt, ws);
      rzbar = implicit_from_base(model, zbar, dt, config, ws, ws.zbar_next, &pull);
      if (!rzbar.ok) return fail_with(rzbar, "Zbar");
    }
  }

  acc.log_r += under_p ? -v_dw - 0.5 * v_sq * dt : -v_dw + 0.5 * v_sq * dt;
  acc.cost += v_sq * dt;
  z = ws.z_next;
  zbar = ws.zbar_next;
  rz.iterations += rzbar.iterations;
  rz.residual = std::max(rz.residual, rzbar.residual);
  return rz;
}

std::vector<Index> CoupledEnsemble::ok_paths() const {
  std::vector<Index> ok;
  for (Index p = 0; p < n_paths; ++p) {
    if (!failed[p]) ok.push_back(p);
  }
  return ok;
}

CoupledEnsemble simulate_coupled(const CouplingSetup& setup, const ModelSpec& model, VecCRef z0, VecCRef zbar0,
                                 const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                                 const IntegratorConfig& config) {
  if (n_paths < 1) throw std::invalid_argument("n_paths must be positive");
  if (z0.size() != model.dim() || zbar0.size() != model.dim()) {
    throw std::invalid_argument("initial states have wrong dimension");
  }
  if (config.scheme != Scheme::DriftImplicitEuler) {
    throw std::invalid_argument("coupled simulation requires the drift-implicit scheme");
  }
  if (!(setup.lambda * grid.dt < 1.0)) {
    throw std::invalid_argument("coupled simulation requires lambda * dt < 1");
  }
  CoupledEnsemble e;
  e.model_id = model.id;
  e.grid = grid;
  e.setup = setup;
  e.seed = seed;
  e.n_paths = n_paths;
  e.z0 = z0;
  e.zbar0 = zbar0;
  const Index n_obs = static_cast<Index>(grid.n_obs());
  e.z.assign(n_obs, Mat(model.dim(), n_paths));
  e.zbar.assign(n_obs, Mat(model.dim(), n_paths));
  e.log_r = Mat::Zero(n_obs, n_paths);
  e.cost = Mat::Zero(n_obs, n_paths);
  e.dist_sq = Mat::Zero(n_obs, n_paths);
  e.failed.assign(n_paths, 0);
  std::vector<std::string> notes(n_paths);
  const NoiseSource noise(seed, StreamPurpose::Coupled);
  const double sqdt = std::sqrt(grid.dt);

  parallel_for(n_paths, [&](Index begin, Index end) {
    CouplingWorkspace ws(model);
    Vec z(model.dim()), zbar(model.dim()), dw(model.noise_dim);
    for (Index p = begin; p < end; ++p) {
      z = z0;
      zbar = zbar0;
      CouplingAccumulators acc;
      std::size_t k = 0;
      auto record = [&] {
        e.z[k].col(p) = z;
        e.zbar[k].col(p) = zbar;
        e.log_r(k, p) = acc.log_r;
        e.cost(k, p) = acc.cost;
        e.dist_sq(k, p) = model.space.norm_sq(z - zbar);
        ++k;
      };
      if (k < grid.n_obs() && grid.obs_steps[k] == 0) record();
      for (std::int64_t s = 0; s < grid.steps; ++s) {
        noise.fill(static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(s), sqdt,
                   std::span<double>(dw.data(), dw.size()));
        const StepResult r = coupled_step(setup, model, z, zbar, grid.dt, dw, acc, config, ws);
        if (!r.ok) {
          e.failed[p] = 1;
          notes[p] = "path " + std::to_string(p) + " step " + std::to_string(s) + ": " + r.diagnostic;
          break;
        }
        while (k < grid.n_obs() && grid.obs_steps[k] == s + 1) record();
      }
      if (e.failed[p]) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (Index j = 0; j < n_obs; ++j) {
          e.z[j].col(p).setConstant(nan);
          e.zbar[j].col(p).setConstant(nan);
          e.log_r(j, p) = e.cost(j, p) = e.dist_sq(j, p) = nan;
        }
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

}  // namespace monolab
