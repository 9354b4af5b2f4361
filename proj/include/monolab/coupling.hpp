#pragma once

#include "monolab/integrate.hpp"

#include <optional>

namespace monolab {

enum class CouplingMode { NonDegenerate, DegenerateTwoBlock };
enum class Frame { UnderP, UnderQ };

const char* to_string(CouplingMode mode);
const char* to_string(Frame frame);

struct CouplingSetup {
  double lambda = 1.0;
  double gamma = 2.0;  // 2 lambda - eta
  double eta = 0.0;    // model monotonicity constant the setup was built against
  CouplingMode mode = CouplingMode::NonDegenerate;
  Frame frame = Frame::UnderQ;

  /// lambda defaults to max(eta, 0)/2 + 1; the mode defaults to the model's
  /// structure. Throws std::invalid_argument unless lambda > eta/2, or when a
  /// degenerate mode is requested for a model without a block split.
  static CouplingSetup make(const ModelSpec& model, std::optional<double> lambda, Frame frame,
                            std::optional<CouplingMode> mode = std::nullopt);
  static double default_lambda(const ModelSpec& model);

  /// |sigma^{-1}|_inf, or |sigma_2^{-1}|_inf in degenerate mode.
  double sigma_inv_bound(const ModelSpec& model) const;
  /// lambda^2 |sigma^{-1}|^2 / (2 gamma): the entropy and Harnack coefficient of |z - zbar|^2.
  double entropy_coefficient(const ModelSpec& model) const;
};

/// v = lambda sigma^{-1}(z)(z - zbar), or lambda sigma_2^{-1}(z)(y - ybar) in
/// degenerate mode (depends on the Y-blocks only).
void control_v(const CouplingSetup& setup, const ModelSpec& model, VecCRef z, VecCRef zbar, VecRef v);
Vec control_v(const CouplingSetup& setup, const ModelSpec& model, VecCRef z, VecCRef zbar);

/// First-block Girsanov correction sigma_1 v of the degenerate frames; zero when sigma_1 = 0.
Vec x_block_correction(const ModelSpec& model, VecCRef v);

struct CouplingAccumulators {
  double log_r = 0.0;
  double cost = 0.0;  // integral of |v|_U^2
};

struct CouplingWorkspace {
  explicit CouplingWorkspace(const ModelSpec& model);
  StepWorkspace step;
  Vec v, shifted_noise, base, z_next, zbar_next, scratch;
};

/// One step of the coupled pair in the setup's frame. `dW` is the Brownian
/// increment of that frame (W under P, W~ = W + int v under Q). The control is
/// frozen at the start of the step, which makes the discrete Girsanov density
/// exact for the scheme.
StepResult coupled_step(const CouplingSetup& setup, const ModelSpec& model, VecRef z, VecRef zbar, double dt,
                        VecCRef dW, CouplingAccumulators& acc, const IntegratorConfig& config,
                        CouplingWorkspace& ws);

struct CoupledEnsemble {
  std::string model_id;
  TimeGrid grid;
  CouplingSetup setup;
  std::uint64_t seed = 0;
  Index n_paths = 0;
  Vec z0, zbar0;
  std::vector<Mat> z, zbar;  // per observation: dim x n_paths
  Mat log_r;                 // n_obs x n_paths
  Mat cost;                  // n_obs x n_paths
  Mat dist_sq;               // n_obs x n_paths, |Z_t - Zbar_t|^2 in the model geometry
  std::vector<std::uint8_t> failed;
  std::int64_t failed_count = 0;
  std::vector<std::string> failure_notes;

  std::vector<Index> ok_paths() const;
};

/// Requires the drift-implicit scheme and lambda * dt < 1.
CoupledEnsemble simulate_coupled(const CouplingSetup& setup, const ModelSpec& model, VecCRef z0, VecCRef zbar0,
                                 const TimeGrid& grid, Index n_paths, std::uint64_t seed,
                                 const IntegratorConfig& config = {});

}  // namespace monolab
