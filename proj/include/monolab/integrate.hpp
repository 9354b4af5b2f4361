#pragma once

#include "monolab/models.hpp"
#include "monolab/random.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace monolab {

/// Uniform grid 0 = t_0 < ... < t_steps = T with observation nodes.
struct TimeGrid {
  double horizon = 0.0;
  double dt = 0.0;
  std::int64_t steps = 0;
  std::vector<std::int64_t> obs_steps;  // strictly increasing grid indices

  /// Throws unless steps = round(T/dt) >= 1 reproduces T to 1e-12 and every
  /// observation time is a grid node. Empty `obs_times` observes only T.
  static TimeGrid make(double horizon, double dt, const std::vector<double>& obs_times = {});
  /// `count` equally spaced observation nodes ending at T (plus t = 0 if `include_zero`).
  static TimeGrid uniform(double horizon, double dt, int count, bool include_zero = true);

  double time(std::int64_t step) const { return static_cast<double>(step) * dt; }
  std::size_t n_obs() const { return obs_steps.size(); }
  std::vector<double> obs_times() const;
};

enum class Scheme { DriftImplicitEuler, TamedExplicitEuler };

struct IntegratorConfig {
  Scheme scheme = Scheme::DriftImplicitEuler;
  double newton_tol = 1e-10;  // on the infinity norm of the step residual
  int newton_max_iter = 50;
  bool damped_fallback = true;  // backtracking line search when a full Newton step does not reduce the residual
};

struct StepResult {
  bool ok = true;
  int iterations = 0;
  double residual = 0.0;
  std::string diagnostic;
};

/// Linear relaxation rate * (target - y) on coordinates [begin, end), solved
/// implicitly together with the drift.
struct ImplicitPull {
  double rate = 0.0;
  Index begin = 0;
  Index end = 0;
  const Vec* target = nullptr;
};

/// Scratch space for one worker; not shareable between threads.
class StepWorkspace {
 public:
  explicit StepWorkspace(const ModelSpec& model);

  Vec residual, trial, trial_residual, delta, drift, increment, noise;

 private:
  friend StepResult solve_implicit(const ModelSpec&, VecCRef, double, VecRef, const IntegratorConfig&,
                                   StepWorkspace&, const ImplicitPull*);
  bool factor_and_solve(const ModelSpec& model, double dt, const ImplicitPull* pull);

  Mat jac_;    // model ordering; entries outside the declared pattern stay zero
  Mat band_;   // I - dt J in band ordering
  Vec rhs_;
  std::vector<Index> order_;
};

/// Solves y = base + dt * (b(y) + pull) by Newton's method. On entry `y`
/// holds the initial guess; on success it holds the root with
/// |residual|_inf <= config.newton_tol.
StepResult solve_implicit(const ModelSpec& model, VecCRef base, double dt, VecRef y, const IntegratorConfig& config,
                          StepWorkspace& ws, const ImplicitPull* pull = nullptr);

/// One step z -> z' of the configured scheme with noise increment dW
/// (coordinates in U, already scaled by sqrt(dt)).
StepResult advance(const ModelSpec& model, VecCRef z, double dt, VecCRef dW, const IntegratorConfig& config,
                   StepWorkspace& ws, VecRef out);

struct StepOutcome {
  Vec state;
  StepResult result;
};

/// z' = z + b(z') dt + sigma(z) dW, diffusion explicit.
StepOutcome implicit_step(const ModelSpec& model, VecCRef z, double dt, VecCRef dW,
                          const IntegratorConfig& config = {});

// --- worker pool ------------------------------------------------------------

/// Worker count: explicit override if set, else MONOLAB_WORKERS, else hardware concurrency.
int worker_count();
void set_worker_count(int workers);  // 0 restores the default policy

/// Splits [0, n) into contiguous static chunks, one per worker. The
/// partition never influences results because every path owns its stream.
void parallel_for(Index n, const std::function<void(Index begin, Index end)>& body);

// --- plain ensembles ----------------------------------------------------------

struct PathEnsemble {
  std::string model_id;
  TimeGrid grid;
  std::uint64_t seed = 0;
  StreamPurpose purpose = StreamPurpose::Plain;
  Index n_paths = 0;
  std::vector<Mat> observations;  // per observation time: dim x n_paths
  std::vector<std::uint8_t> failed;
  std::int64_t failed_count = 0;
  std::vector<std::string> failure_notes;  // first few diagnostics

  std::vector<Index> ok_paths() const;
};

using PathObserver = std::function<void(std::size_t obs_index, VecCRef state)>;

/// Simulates path `path` from z0; calls `observer` at every observation node.
StepResult simulate_path(const ModelSpec& model, VecCRef z0, const TimeGrid& grid, std::uint64_t path,
                         const NoiseSource& noise, const IntegratorConfig& config, StepWorkspace& ws,
                         const PathObserver& observer);

PathEnsemble simulate_plain(const ModelSpec& model, VecCRef z0, const TimeGrid& grid, Index n_paths,
                            std::uint64_t seed, const IntegratorConfig& config = {},
                            StreamPurpose purpose = StreamPurpose::Plain);

struct StrongOrderRow {
  double dt = 0.0;
  double rms_error = 0.0;
};

struct StrongOrderTable {
  double reference_dt = 0.0;
  std::vector<StrongOrderRow> rows;
  double slope = 0.0;  // least-squares slope of log error vs log dt; 0 when every error vanishes
  bool exact = false;  // every error is zero
};

/// RMS error at T against a reference grid with dt_min / 4, each coarse
/// increment being the sum of the reference increments it covers.
StrongOrderTable strong_order_probe(const ModelSpec& model, VecCRef z0, double horizon,
                                    const std::vector<double>& dt_list, Index n_paths, std::uint64_t seed,
                                    const IntegratorConfig& config = {});

}  // namespace monolab
