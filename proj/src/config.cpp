#include "monolab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace monolab {

ConfigError::ConfigError(int line, std::string field, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? std::string() : field + ": ") + message),
      line_(line),
      field_(std::move(field)) {}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) throw std::invalid_argument("expected a number, got an empty value");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw std::invalid_argument("expected a finite number, got '" + t + "'");
  }
  return v;
}

long long parse_integer(const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw std::invalid_argument("expected an integer, got '" + t + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  if (t.empty() || t[0] == '-') throw std::invalid_argument("expected a nonnegative integer, got '" + t + "'");
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw std::invalid_argument("expected a nonnegative integer, got '" + t + "'");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  const std::string t = trim(s);
  if (t == "true") return true;
  if (t == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + t + "'");
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> v;
  if (trim(s).empty()) return v;
  for (const auto& item : split(s, ',')) v.push_back(parse_double(item));
  return v;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

template <typename T>
std::string join_ints(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out;
}

std::vector<std::string> parse_words(const std::string& s) {
  std::vector<std::string> v;
  if (trim(s).empty()) return v;
  for (const auto& item : split(s, ',')) {
    if (item.empty()) throw std::invalid_argument("empty list entry");
    v.push_back(item);
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s, const char* none_word) {
  if (trim(s) == none_word) return std::nullopt;
  return parse_double(s);
}

struct Field {
  const char* section;
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define DOUBLE_FIELD(sec, key, member)                                                   \
  Field {                                                                                 \
    sec, key, [](ExperimentConfig& c, const std::string& v) { c.member = parse_double(v); }, \
        [](const ExperimentConfig& c) { return format_double(c.member); }                \
  }
#define INT_FIELD(sec, key, member)                                                                         \
  Field {                                                                                                    \
    sec, key, [](ExperimentConfig& c, const std::string& v) { c.member = static_cast<decltype(c.member)>(parse_integer(v)); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }                                    \
  }
#define STRING_FIELD(sec, key, member)                                                 \
  Field {                                                                               \
    sec, key, [](ExperimentConfig& c, const std::string& v) { c.member = trim(v); },   \
        [](const ExperimentConfig& c) { return c.member; }                             \
  }
#define VECTOR_FIELD(sec, key, member)                                                          \
  Field {                                                                                        \
    sec, key, [](ExperimentConfig& c, const std::string& v) { c.member = VectorSpec::parse(v); }, \
        [](const ExperimentConfig& c) { return c.member.to_string(); }                          \
  }
#define DOUBLES_FIELD(sec, key, member)                                                        \
  Field {                                                                                       \
    sec, key, [](ExperimentConfig& c, const std::string& v) { c.member = parse_doubles(v); },  \
        [](const ExperimentConfig& c) { return join_doubles(c.member); }                       \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      STRING_FIELD("model", "name", model),
      INT_FIELD("model", "dim", dim),
      DOUBLE_FIELD("model", "rate", rate),
      DOUBLE_FIELD("model", "alpha_c", alpha_c),
      DOUBLE_FIELD("model", "beta_c", beta_c),
      INT_FIELD("model", "dim_x", dim_x),
      INT_FIELD("model", "dim_y", dim_y),
      DOUBLE_FIELD("model", "q", q),
      DOUBLE_FIELD("model", "c", c),
      DOUBLE_FIELD("model", "q_tilde", q_tilde),
      DOUBLE_FIELD("model", "eta_c", eta_c),
      INT_FIELD("model", "grid_points", grid_points),
      DOUBLE_FIELD("model", "noise_a", noise_a),
      DOUBLE_FIELD("model", "noise_b", noise_b),
      Field{"coupling", "lambda",
            [](ExperimentConfig& c, const std::string& v) { c.lambda = parse_optional(v, "default"); },
            [](const ExperimentConfig& c) { return c.lambda ? format_double(*c.lambda) : std::string("default"); }},
      DOUBLE_FIELD("grid", "T", horizon),
      DOUBLE_FIELD("grid", "dt", dt),
      INT_FIELD("grid", "observations", observations),
      DOUBLES_FIELD("grid", "obs_times", obs_times),
      INT_FIELD("run", "n_paths", n_paths),
      Field{"run", "seed", [](ExperimentConfig& c, const std::string& v) { c.seed = parse_u64(v); },
            [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
      STRING_FIELD("run", "scheme", scheme),
      DOUBLE_FIELD("run", "newton_tol", newton_tol),
      INT_FIELD("run", "newton_max_iter", newton_max_iter),
      VECTOR_FIELD("points", "z", z),
      VECTOR_FIELD("points", "zbar", zbar),
      STRING_FIELD("test_function", "form", tf_form),
      VECTOR_FIELD("test_function", "a", tf_a),
      DOUBLE_FIELD("test_function", "c", tf_c),
      Field{"test_function", "allow_oracle",
            [](ExperimentConfig& c, const std::string& v) { c.allow_oracle = parse_bool(v); },
            [](const ExperimentConfig& c) { return std::string(c.allow_oracle ? "true" : "false"); }},
      DOUBLES_FIELD("checks", "harnack_times", harnack_times),
      DOUBLES_FIELD("checks", "gradient_times", gradient_times),
      VECTOR_FIELD("checks", "direction", direction),
      DOUBLE_FIELD("checks", "rate_tol", rate_tol),
      INT_FIELD("checks", "sample_count", sample_count),
      DOUBLE_FIELD("checks", "box_radius", box_radius),
      VECTOR_FIELD("checks", "irreducibility_center", irr_center),
      DOUBLE_FIELD("checks", "irreducibility_radius", irr_radius),
      DOUBLE_FIELD("checks", "irreducibility_epsilon", irr_epsilon),
      Field{"checks", "irreducibility_starts",
            [](ExperimentConfig& c, const std::string& v) {
              c.irr_starts.clear();
              for (const auto& item : split(v, ';')) c.irr_starts.push_back(VectorSpec::parse(item));
            },
            [](const ExperimentConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.irr_starts.size(); ++i) out += (i ? "; " : "") + c.irr_starts[i].to_string();
              return out;
            }},
      DOUBLES_FIELD("checks", "irreducibility_times", irr_times),
      DOUBLE_FIELD("checks", "ergodicity_T", ergodic_horizon),
      INT_FIELD("checks", "ergodicity_time_paths", ergodic_time_paths),
      STRING_FIELD("checks", "ergodicity_observable", ergodic_observable),
      Field{"checks", "ergodicity_stationary",
            [](ExperimentConfig& c, const std::string& v) { c.ergodic_stationary = parse_optional(v, "none"); },
            [](const ExperimentConfig& c) {
              return c.ergodic_stationary ? format_double(*c.ergodic_stationary) : std::string("none");
            }},
      DOUBLE_FIELD("checks", "ergodicity_rel_tol", ergodic_rel_tol),
      Field{"checks", "bench_models", [](ExperimentConfig& c, const std::string& v) { c.bench_models = parse_words(v); },
            [](const ExperimentConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.bench_models.size(); ++i) out += (i ? ", " : "") + c.bench_models[i];
              return out;
            }},
      Field{"checks", "bench_paths",
            [](ExperimentConfig& c, const std::string& v) {
              c.bench_paths.clear();
              for (const auto& w : parse_words(v)) c.bench_paths.push_back(static_cast<Index>(parse_integer(w)));
            },
            [](const ExperimentConfig& c) { return join_ints(c.bench_paths); }},
      Field{"checks", "bench_workers",
            [](ExperimentConfig& c, const std::string& v) {
              c.bench_workers.clear();
              for (const auto& w : parse_words(v)) c.bench_workers.push_back(static_cast<int>(parse_integer(w)));
            },
            [](const ExperimentConfig& c) { return join_ints(c.bench_workers); }},
      STRING_FIELD("output", "dir", out_dir),
  };
  return table;
}

#undef DOUBLE_FIELD
#undef INT_FIELD
#undef STRING_FIELD
#undef VECTOR_FIELD
#undef DOUBLES_FIELD

}  // namespace

// --- VectorSpec ----------------------------------------------------------------

VectorSpec VectorSpec::list(std::vector<double> v) {
  VectorSpec s;
  s.values = std::move(v);
  return s;
}

VectorSpec VectorSpec::parse(const std::string& text) {
  const std::string t = trim(text);
  VectorSpec s;
  auto words = [&](std::size_t skip) {
    std::istringstream in(t.substr(skip));
    std::vector<std::string> w;
    for (std::string x; in >> x;) w.push_back(x);
    return w;
  };
  if (t.rfind("constant", 0) == 0) {
    const auto w = words(8);
    if (w.size() != 1) throw std::invalid_argument("expected 'constant <value>'");
    s.kind = Kind::Constant;
    s.values = {parse_double(w[0])};
  } else if (t.rfind("mode", 0) == 0) {
    const auto w = words(4);
    if (w.size() != 2) throw std::invalid_argument("expected 'mode <k> <amplitude>'");
    s.kind = Kind::Mode;
    const double k = parse_double(w[0]);
    if (k < 1 || k != std::floor(k)) throw std::invalid_argument("mode index must be a positive integer");
    s.values = {k, parse_double(w[1])};
  } else {
    s.values = parse_doubles(t);
  }
  return s;
}

std::string VectorSpec::to_string() const {
  switch (kind) {
    case Kind::Constant:
      return "constant " + format_double(values.at(0));
    case Kind::Mode:
      return "mode " + format_double(values.at(0)) + " " + format_double(values.at(1));
    case Kind::List:
      break;
  }
  return join_doubles(values);
}

Vec VectorSpec::realize(const ModelSpec& model) const {
  const Index d = model.dim();
  switch (kind) {
    case Kind::Constant:
      return Vec::Constant(d, values.at(0));
    case Kind::Mode: {
      const auto k = static_cast<Index>(values.at(0));
      const double amp = values.at(1);
      auto block = [&](const StateSpace& s) {
        if (!s.is_grid()) throw std::invalid_argument("'mode' vectors need a grid model");
        if (k > s.dim()) throw std::invalid_argument("mode index exceeds grid size");
        return Vec(amp * laplacian_eigenvector(s.dim(), k));
      };
      if (model.space.is_product()) {
        Vec v(d);
        v << block(model.space.product().first()), block(model.space.product().second());
        return v;
      }
      return block(model.space.single());
    }
    case Kind::List:
      break;
  }
  if (static_cast<Index>(values.size()) != d) {
    throw std::invalid_argument("vector has " + std::to_string(values.size()) + " entries, model dimension is " +
                                std::to_string(d));
  }
  return Eigen::Map<const Vec>(values.data(), d);
}

// --- parse / serialize -----------------------------------------------------------

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, const Field*> index;
  std::set<std::string> sections;
  for (const auto& f : fields()) {
    index[std::string(f.section) + "." + f.key] = &f;
    sections.insert(f.section);
  }
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!sections.count(section)) throw ConfigError(line_no, section, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(line_no, key, "field outside of any section");
    const std::string name = section + "." + key;
    const auto it = index.find(name);
    if (it == index.end()) throw ConfigError(line_no, name, "unknown field");
    if (!seen.insert(name).second) throw ConfigError(line_no, name, "duplicate field");
    try {
      it->second->set(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(line_no, name, e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(config) + "\n";
  }
  return out;
}

// --- builders ---------------------------------------------------------------------

ModelSpec build_model(const ExperimentConfig& c) {
  const NoiseParams noise{c.noise_a, c.noise_b};
  if (c.model == "double_well") return build_double_well();
  if (c.model == "ou") return build_ou_oracle(c.dim, c.rate);
  if (c.model == "dissipative_poly") return build_dissipative_poly(c.alpha_c, c.beta_c, c.dim_x, c.dim_y);
  if (c.model == "p_laplacian") return build_p_laplacian(c.q, c.c, c.q_tilde, c.grid_points, noise);
  if (c.model == "porous_media") return build_porous_media(c.q, c.eta_c, c.grid_points, noise);
  if (c.model == "reaction_diffusion") return build_reaction_diffusion_pair(c.grid_points, noise);
  throw std::invalid_argument("unknown model '" + c.model +
                              "' (double_well, ou, dissipative_poly, p_laplacian, porous_media, reaction_diffusion)");
}

IntegratorConfig integrator_config(const ExperimentConfig& c) {
  IntegratorConfig ic;
  if (c.scheme == "drift_implicit") {
    ic.scheme = Scheme::DriftImplicitEuler;
  } else if (c.scheme == "tamed_explicit") {
    ic.scheme = Scheme::TamedExplicitEuler;
  } else {
    throw std::invalid_argument("unknown scheme '" + c.scheme + "' (drift_implicit, tamed_explicit)");
  }
  ic.newton_tol = c.newton_tol;
  ic.newton_max_iter = c.newton_max_iter;
  return ic;
}

TimeGrid time_grid(const ExperimentConfig& c) {
  if (!c.obs_times.empty()) return TimeGrid::make(c.horizon, c.dt, c.obs_times);
  return TimeGrid::uniform(c.horizon, c.dt, c.observations, true);
}

TestFunction test_function(const ExperimentConfig& c, const ModelSpec& model) {
  if (c.tf_form == "tanh") return TestFunction::bounded(model.space, c.tf_a.realize(model), c.tf_c);
  if (c.tf_form == "exp_linear") return TestFunction::exp_linear(model.space, c.tf_a.realize(model));
  throw std::invalid_argument("unknown test-function form '" + c.tf_form + "' (tanh, exp_linear)");
}

void validate_config(const ExperimentConfig& c) {
  auto guard = [](const char* field, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(0, field, e.what());
    }
  };
  auto require = [](bool ok, const char* field, const char* msg) {
    if (!ok) throw ConfigError(0, field, msg);
  };
  std::optional<ModelSpec> model;
  guard("model.name", [&] { model.emplace(build_model(c)); });
  require(c.n_paths >= 1, "run.n_paths", "must be at least 1");
  require(c.newton_tol > 0.0, "run.newton_tol", "must be positive");
  require(c.newton_max_iter >= 1, "run.newton_max_iter", "must be at least 1");
  guard("run.scheme", [&] { integrator_config(c); });
  guard("grid.dt", [&] { time_grid(c); });
  guard("coupling.lambda", [&] { CouplingSetup::make(*model, c.lambda, Frame::UnderQ); });
  const double lambda = c.lambda.value_or(CouplingSetup::default_lambda(*model));
  require(lambda * c.dt < 1.0, "coupling.lambda", "lambda * dt must be below 1");
  guard("points.z", [&] { c.z.realize(*model); });
  guard("points.zbar", [&] { c.zbar.realize(*model); });
  guard("test_function.a", [&] { test_function(c, *model); });
  guard("checks.direction", [&] {
    const Vec d = c.direction.realize(*model);
    if (!(model->space.norm(d) > 0.0)) throw std::invalid_argument("direction must be nonzero");
  });
  require(c.rate_tol > 0.0, "checks.rate_tol", "must be positive");
  require(c.sample_count >= 1, "checks.sample_count", "must be at least 1");
  require(c.box_radius > 0.0, "checks.box_radius", "must be positive");
  for (double t : c.harnack_times) {
    guard("checks.harnack_times", [&] {
      if (t < 0.0) throw std::invalid_argument("times must be nonnegative");
      if (t > 0.0) TimeGrid::make(t, c.dt);
    });
  }
  for (double t : c.gradient_times) {
    guard("checks.gradient_times", [&] {
      if (t < 0.0) throw std::invalid_argument("times must be nonnegative");
      if (t > 0.0) TimeGrid::make(t, c.dt);
    });
  }
  guard("checks.irreducibility_center", [&] { c.irr_center.realize(*model); });
  require(c.irr_radius >= 0.0, "checks.irreducibility_radius", "must be nonnegative");
  require(c.irr_epsilon > 0.0, "checks.irreducibility_epsilon", "must be positive");
  require(!c.irr_starts.empty(), "checks.irreducibility_starts", "must list at least one start");
  for (const auto& s : c.irr_starts) guard("checks.irreducibility_starts", [&] { s.realize(*model); });
  require(!c.irr_times.empty(), "checks.irreducibility_times", "must not be empty");
  guard("checks.irreducibility_times", [&] {
    for (std::size_t i = 0; i < c.irr_times.size(); ++i) {
      if (!(c.irr_times[i] > 0.0) || (i && !(c.irr_times[i] > c.irr_times[i - 1]))) {
        throw std::invalid_argument("times must be positive and strictly increasing");
      }
    }
    TimeGrid::make(c.irr_times.back(), c.dt, c.irr_times);
  });
  guard("checks.ergodicity_T", [&] { TimeGrid::make(c.ergodic_horizon, c.dt); });
  require(c.ergodic_time_paths >= 1, "checks.ergodicity_time_paths", "must be at least 1");
  require(c.ergodic_observable == "test_function" || c.ergodic_observable == "first_coordinate_square",
          "checks.ergodicity_observable", "expected test_function or first_coordinate_square");
  require(c.ergodic_rel_tol > 0.0, "checks.ergodicity_rel_tol", "must be positive");
  require(!c.bench_models.empty(), "checks.bench_models", "must not be empty");
  for (const auto& m : c.bench_models) {
    guard("checks.bench_models", [&] {
      ExperimentConfig tmp = c;
      tmp.model = m;
      build_model(tmp);
    });
  }
  require(!c.bench_paths.empty(), "checks.bench_paths", "must not be empty");
  for (Index p : c.bench_paths) require(p >= 1, "checks.bench_paths", "entries must be at least 1");
  require(!c.bench_workers.empty(), "checks.bench_workers", "must not be empty");
  for (int w : c.bench_workers) require(w >= 1, "checks.bench_workers", "entries must be at least 1");
  require(!c.out_dir.empty(), "output.dir", "must not be empty");
}

}  // namespace monolab
