#pragma once

#include "monolab/spaces.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace monolab {

// Noise vectors are coordinate vectors in an orthonormal basis of U, so
// <v, w>_U is the plain dot product.
using DriftFn = std::function<void(VecCRef z, VecRef out)>;
using JacobianFn = std::function<void(VecCRef z, Eigen::Ref<Mat> jac)>;
using DiffusionApplyFn = std::function<void(VecCRef z, VecCRef xi, VecRef out)>;
using PinvApplyFn = std::function<void(VecCRef z, VecCRef h, VecRef xi)>;
using ScalarFn = std::function<double(VecCRef z)>;
using PairScalarFn = std::function<double(VecCRef u, VecCRef v)>;

struct ModelConstants {
  double eta = 0.0;  // monotonicity constant
  double alpha = 2.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double c4 = 1.0;
  double l_sigma = 0.0;
  double sigma_inv_bound = 1.0;  // sup_z |sigma^{-1}(z)|, or of sigma_2^{-1} for split models
  // eta used in the coercivity inequality when a sharper value than `eta` is known.
  std::optional<double> coercive_eta;

  double eta_for_coercivity() const { return coercive_eta.value_or(eta); }
};

/// Two-block structure dZ = (b_1, b_2) dt + (sigma_1, sigma_2(Z)) dW with
/// constant sigma_1. The state is (x, y) with x in the first dim_x coordinates.
struct DegenerateSplit {
  Index dim_x = 0;
  Index dim_y = 0;
  std::function<void(VecCRef xi, VecRef out_x)> sigma1_apply;
  double sigma1_hs_norm_sq = 0.0;
  bool sigma1_is_zero = true;
  DiffusionApplyFn sigma2_apply;    // (z, xi) -> H_2
  PinvApplyFn sigma2_pinv_apply;    // (z, h_2) -> xi
  double sigma2_inv_bound = 1.0;
};

enum class GrowthNormKind { StateNorm, DiscreteDual };

/// Band structure of the drift Jacobian after a symmetric reordering; lets
/// the Newton solver factor I - dt J in O(n * band^2).
struct JacobianBand {
  std::vector<Index> ordering;  // empty = identity
  Index lower = 0;
  Index upper = 0;
};

struct ModelSpec {
  ModelSpec(std::string model_id, Space state_space) : id(std::move(model_id)), space(std::move(state_space)) {}

  std::string id;
  Space space;
  Index noise_dim = 0;

  DriftFn drift;
  JacobianFn drift_jacobian;
  DiffusionApplyFn diffusion_apply;
  ScalarFn diffusion_hs_norm_sq;
  PairScalarFn diffusion_hs_dist_sq;  // |sigma(u) - sigma(v)|_HS^2
  PinvApplyFn diffusion_pinv_apply;    // absent for split models

  ModelConstants constants;
  std::optional<DegenerateSplit> split;

  GrowthNormKind growth_norm = GrowthNormKind::StateNorm;
  std::string growth_norm_label = "H";
  ScalarFn dual_norm;  // |b|_{V*} or its discrete surrogate
  ScalarFn v_norm;     // |w|_V or its discrete surrogate

  JacobianBand band;
  bool additive_noise = false;

  Index dim() const { return space.dim(); }
  bool degenerate() const { return split.has_value(); }

  Vec drift_at(VecCRef z) const;
  Vec diffusion_at(VecCRef z, VecCRef xi) const;
};

struct NoiseParams {
  double a = 1.0;    // sigma_kk = a + b_s tanh(z_k), requires a > |b_s|
  double b_s = 0.5;
};

ModelSpec build_double_well();
ModelSpec build_dissipative_poly(double alpha_c, double beta_c, Index dim_x, Index dim_y);
ModelSpec build_p_laplacian(double q, double c, double q_tilde, Index grid_points, NoiseParams noise);
ModelSpec build_porous_media(double q, double eta_c, Index grid_points, NoiseParams noise);
ModelSpec build_reaction_diffusion_pair(Index grid_points, NoiseParams noise);
ModelSpec build_ou_oracle(Index dim, double rate);

// --- test functions ---------------------------------------------------------

enum class TestFunctionForm { BoundedTanh, ExpLinearOracle };

/// f(x) = exp(c tanh((a, x))) or, for the Gaussian oracle family,
/// f(x) = exp((a, x)). The oracle family is unbounded and sits outside the
/// hypotheses of the Harnack-type estimates.
class TestFunction {
 public:
  static TestFunction bounded(Space space, Vec a, double c);
  static TestFunction exp_linear(Space space, Vec a);

  double eval(VecCRef x) const;
  double eval_log(VecCRef x) const;

  /// Bound on sup |grad log f|.
  double lip_log_bound() const { return lip_log_bound_; }
  /// Bound on sup |grad f|: |c| |a| e^{|c|} for the tanh family, +inf for the oracle.
  double grad_bound() const;
  /// Riesz representative of grad f at x.
  Vec gradient(VecCRef x) const;

  bool is_oracle() const { return form_ == TestFunctionForm::ExpLinearOracle; }
  bool is_constant() const;
  TestFunctionForm form() const { return form_; }
  const Vec& direction() const { return a_; }
  double gain() const { return c_; }

 private:
  TestFunction(Space space, Vec a, double c, TestFunctionForm form);

  Space space_;
  Vec a_;
  double c_;
  TestFunctionForm form_;
  double a_norm_;
  double lip_log_bound_;
};

// --- assumption checkers ----------------------------------------------------

struct AssumptionReport {
  std::string quantity;
  double sampled_sup = 0.0;
  double declared = 0.0;
  double margin = 0.0;
  std::int64_t sample_count = 0;
  bool pass = false;
  std::string norm_label;
};

/// sup over sampled pairs of
///   [2 (b(u)-b(v), u-v) + |sigma(u)-sigma(v)|_HS^2] / |u-v|^2
/// against the declared eta. Half the pairs are concentrated near the origin
/// at separations 1e-3, 1e-2, 1e-1; the rest are uniform in the box.
AssumptionReport check_monotonicity(const ModelSpec& model, std::int64_t sample_count, double box_radius,
                                    std::uint64_t seed = 1);

/// sup of 2 (b(w), w) + |sigma(w)|_HS^2 - (C1 + eta |w|^2 - C2 |w|^alpha); declared 0.
AssumptionReport check_coercivity(const ModelSpec& model, std::int64_t sample_count, double box_radius,
                                  std::uint64_t seed = 2);

/// sup of |b(w)|_{V*} / (C3 + C4 |w|_V^{alpha-1}); declared 1.
AssumptionReport check_growth(const ModelSpec& model, std::int64_t sample_count, double box_radius,
                              std::uint64_t seed = 3);

/// sup of |sigma(u)-sigma(v)|_HS^2 / |u-v|^2 against L_sigma^2.
AssumptionReport check_diffusion_lipschitz(const ModelSpec& model, std::int64_t sample_count,
                                           double box_radius, std::uint64_t seed = 4);

/// sup of |sigma(z) sigma^{-1}(z) h - h| / |h| (sigma_2 on H_2 for split models); declared 0.
AssumptionReport check_pseudo_inverse(const ModelSpec& model, std::int64_t sample_count, double box_radius,
                                      std::uint64_t seed = 5);

/// Max deviation between 2 (b(w), w) + |sigma|_HS^2 and -2|w|^2 - 2(w_2^2 - 1)^2 + 3
/// for the double-well model, over uniform samples in [-box, box]^2.
AssumptionReport check_double_well_identity(const ModelSpec& model, std::int64_t sample_count,
                                            double box_radius, std::uint64_t seed = 6);

/// |sigma(u)|_HS^2 summed over the noise basis; independent of the model's
/// closed-form diffusion_hs_norm_sq.
double hs_norm_sq_by_basis(const ModelSpec& model, VecCRef z);
double hs_dist_sq_by_basis(const ModelSpec& model, VecCRef u, VecCRef v);

}  // namespace monolab
