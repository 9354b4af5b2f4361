#pragma once

#include "monolab/coupling.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace monolab {

/// Sample mean with standard error. `m2` is the sum of squared deviations,
/// kept so that batches merge exactly (Chan et al.).
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
  double m2 = 0.0;

  static Estimate from_samples(std::span<const double> x);
  static Estimate exact(double value);
  Estimate merge(const Estimate& other) const;
  double ci95() const { return 1.96 * std_error; }
  double sample_variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);
Verdict worst(Verdict a, Verdict b);

/// lhs <= rhs passes; lhs within the 3-SE slack above rhs passes unless the
/// slack exceeds `allowance` (the claim's own additive terms), in which case
/// the comparison is noise-dominated and reported inconclusive.
Verdict one_sided_verdict(double lhs, double rhs, double slack, double allowance);

struct CheckReport {
  std::string claim;
  double t = 0.0;
  Estimate lhs;
  Estimate rhs;
  double slack = 0.0;      // 3 (se_lhs + se_rhs)
  double allowance = 0.0;  // claim-specific additive terms (inf when not applicable)
  bool two_sided = false;  // |lhs - rhs| <= slack
  Verdict verdict = Verdict::Fail;
  bool trivial = false;
  std::optional<double> ess;
  std::vector<std::pair<std::string, double>> inputs;
  std::vector<std::pair<std::string, double>> terms;
  std::vector<std::string> notes;

  bool pass() const { return verdict == Verdict::Pass; }
};

Verdict overall(const std::vector<CheckReport>& reports);

/// Values f(Z_t) (or log f) over the non-failed paths of an observation.
std::vector<double> observable_values(const PathEnsemble& e, std::size_t obs, const TestFunction& f, bool apply_log);

/// Monte Carlo estimate of P_t f(z) or P_t log f(z); t = 0 returns f(z) exactly.
Estimate semigroup_estimate(const ModelSpec& model, VecCRef z, double t, double dt, const TestFunction& f,
                            Index n_paths, std::uint64_t seed, bool apply_log, const IntegratorConfig& config = {});

struct HarnackOptions {
  bool allow_oracle = false;  // the exp-linear family lies outside the theorem's hypotheses
};

/// P_t log f(z) <= log P_t f(zbar) + Phi + Psi with Phi = lambda^2 |sigma^{-1}|^2 |z-zbar|^2/(2 gamma),
/// Psi = e^{-gamma t/2} |grad log f|_inf |z-zbar|, from two plain ensembles
/// driven by common random numbers.
CheckReport harnack_check(const ModelSpec& model, const CouplingSetup& setup, VecCRef z, VecCRef zbar, double t,
                          double dt, const TestFunction& f, Index n_paths, std::uint64_t seed,
                          const IntegratorConfig& config = {}, HarnackOptions options = {});

/// Entropy E[R log R](t) per observation time against lambda^2 |sigma^{-1}|^2 |z-zbar|^2/(2 gamma).
/// Under Q it is half the mean control cost; under P the weighted mean of R log R.
std::vector<CheckReport> entropy_check(const CoupledEnsemble& e, const ModelSpec& model);

/// E_P[R(t)] = 1 per observation time (two-sided, 3 SE).
std::vector<CheckReport> martingale_check(const CoupledEnsemble& e);

struct ContractionReport {
  std::vector<CheckReport> pointwise;
  double slope = 0.0;
  double slope_bound = 0.0;  // -gamma + rate_tol
  bool slope_pass = false;
  bool trivial = false;  // z = zbar or every distance underflowed
  Verdict verdict = Verdict::Fail;
};

/// Mean |Z_t - Zbar_t|^2 <= e^{-gamma t}|z - zbar|^2 pointwise, plus a
/// least-squares decay rate of the log mean against -gamma + rate_tol.
ContractionReport contraction_check(const CoupledEnsemble& e, double rate_tol = 0.2);

/// |d/de P_t f(z + e d)| <= C sqrt(Var f(Z_t)) + e^{-gamma t/2} |grad f|_inf with
/// C = lambda |sigma^{-1}|_inf / sqrt(gamma); central differences with common random numbers.
CheckReport gradient_check(const ModelSpec& model, const CouplingSetup& setup, VecCRef z, VecCRef direction,
                           double t, double dt, const TestFunction& f, Index n_paths, std::uint64_t seed,
                           const IntegratorConfig& config = {}, std::optional<double> epsilon = std::nullopt);

struct IrreducibilityRow {
  std::size_t start = 0;
  double t = 0.0;
  Estimate frequency;
};

struct IrreducibilityReport {
  std::vector<IrreducibilityRow> rows;
  double min_final_frequency = 0.0;  // over starts at the largest t
  bool all_positive = false;
};

/// Fraction of paths with dist(Z_t, ball(center, radius)) < epsilon.
IrreducibilityReport irreducibility_probe(const ModelSpec& model, const std::vector<Vec>& starts, VecCRef center,
                                          double radius, double epsilon, const std::vector<double>& t_list,
                                          double dt, Index n_paths, std::uint64_t seed,
                                          const IntegratorConfig& config = {});

struct Observable {
  std::string name;
  std::function<double(VecCRef)> eval;
  static Observable from(const TestFunction& f);
};

struct ErgodicityOptions {
  Index time_average_paths = 64;
  std::optional<double> stationary_value;  // known invariant mean of the observable
  double relative_tol = 0.05;
};

struct ErgodicityReport {
  Estimate time_average;     // mean over paths of (1/T) int_0^T f(Z_s) ds from z
  Estimate ensemble_z;       // E f(Z_T^z)
  Estimate ensemble_zbar;    // E f(Z_T^zbar), independent stream
  Estimate difference;       // ensemble_z - ensemble_zbar
  bool chains_agree = false;
  std::optional<bool> stationary_match;
  bool uniqueness_precondition = false;  // coercive eta < 0
  Verdict verdict = Verdict::Fail;
  std::vector<std::string> notes;
};

ErgodicityReport ergodicity_probe(const ModelSpec& model, VecCRef z, VecCRef zbar, const Observable& f,
                                  double horizon, double dt, Index n_paths, std::uint64_t seed,
                                  const IntegratorConfig& config = {}, const ErgodicityOptions& options = {});

/// E_w[log f(Z_t)] <= log mean f(Z_t) + E_w[log(n w)] with self-normalized
/// weights w = R / sum R, exact on the empirical measure.
CheckReport young_decomposition_check(const CoupledEnsemble& e, std::size_t obs, const TestFunction& f);

double effective_sample_size(std::span<const double> weights);

}  // namespace monolab
