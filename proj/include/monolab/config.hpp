#pragma once

#include "monolab/coupling.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace monolab {

/// Malformed or invalid configuration; carries the offending line (0 when
/// the problem is semantic) and the section.key field name.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// A state vector given as an explicit list, a constant field ("constant c")
/// or a scaled Laplacian eigenmode ("mode k amp", applied per block).
struct VectorSpec {
  enum class Kind { List, Constant, Mode };
  Kind kind = Kind::List;
  std::vector<double> values;

  static VectorSpec parse(const std::string& text);
  static VectorSpec list(std::vector<double> v);
  std::string to_string() const;
  Vec realize(const ModelSpec& model) const;
  bool empty() const { return kind == Kind::List && values.empty(); }
  bool operator==(const VectorSpec&) const = default;
};

struct ExperimentConfig {
  // [model]
  std::string model = "double_well";
  Index dim = 1;
  double rate = 1.0;
  double alpha_c = 1.0;
  double beta_c = 1.0;
  Index dim_x = 1;
  Index dim_y = 1;
  double q = 3.0;
  double c = 1.0;
  double q_tilde = 2.0;
  double eta_c = -1.0;
  Index grid_points = 32;
  double noise_a = 1.0;
  double noise_b = 0.5;

  // [coupling]
  std::optional<double> lambda;  // unset: max(eta, 0)/2 + 1

  // [grid]
  double horizon = 1.0;
  double dt = 1e-3;
  int observations = 10;          // uniform observation nodes after t = 0
  std::vector<double> obs_times;  // overrides `observations` when non-empty

  // [run]
  Index n_paths = 1000;
  std::uint64_t seed = 1;
  std::string scheme = "drift_implicit";
  double newton_tol = 1e-10;
  int newton_max_iter = 50;

  // [points]
  VectorSpec z = VectorSpec::list({1.0, 1.0});
  VectorSpec zbar = VectorSpec::list({0.0, 0.0});

  // [test_function]
  std::string tf_form = "tanh";
  VectorSpec tf_a = VectorSpec::list({0.5, 0.5});
  double tf_c = 1.0;
  bool allow_oracle = false;

  // [checks]
  std::vector<double> harnack_times = {0.5, 1.0, 2.0};
  std::vector<double> gradient_times = {1.0};
  VectorSpec direction = VectorSpec::list({0.0, 1.0});
  double rate_tol = 0.2;
  Index sample_count = 10000;
  double box_radius = 3.0;
  VectorSpec irr_center = VectorSpec::list({0.0, 1.0});
  double irr_radius = 0.5;
  double irr_epsilon = 0.5;
  std::vector<VectorSpec> irr_starts = {VectorSpec::list({0.0, 2.0}), VectorSpec::list({0.0, -2.0})};
  std::vector<double> irr_times = {1.0, 5.0, 10.0};
  double ergodic_horizon = 50.0;
  Index ergodic_time_paths = 64;
  std::string ergodic_observable = "test_function";  // test_function | first_coordinate_square
  std::optional<double> ergodic_stationary;
  double ergodic_rel_tol = 0.05;
  std::vector<std::string> bench_models = {"double_well"};
  std::vector<Index> bench_paths = {256, 512};
  std::vector<int> bench_workers = {1};

  // [output]
  std::string out_dir = "monolab_out";

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Every field, one per line, doubles printed with 17 significant digits;
/// parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Semantic validation: builds the model, checks dimensions, positivity of
/// tolerances and lambda > eta/2. Throws ConfigError.
void validate_config(const ExperimentConfig& config);

ModelSpec build_model(const ExperimentConfig& config);
IntegratorConfig integrator_config(const ExperimentConfig& config);
TimeGrid time_grid(const ExperimentConfig& config);
TestFunction test_function(const ExperimentConfig& config, const ModelSpec& model);

std::string format_double(double v);

}  // namespace monolab
