#include "monolab/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace monolab {

Vec ModelSpec::drift_at(VecCRef z) const {
  Vec out(dim());
  drift(z, out);
  return out;
}

Vec ModelSpec::diffusion_at(VecCRef z, VecCRef xi) const {
  Vec out(dim());
  diffusion_apply(z, xi, out);
  return out;
}

namespace {

// Solves (-L) w = r for the Dirichlet Laplacian in O(n) (Thomas algorithm).
Vec solve_neg_laplacian(VecCRef r) {
  const Index n = r.size();
  const double h = mesh_width(n);
  const double off = -1.0 / (h * h);
  const double diag = 2.0 / (h * h);
  Vec c(n), d(n);
  c[0] = off / diag;
  d[0] = r[0] / diag;
  for (Index i = 1; i < n; ++i) {
    const double m = diag - off * c[i - 1];
    c[i] = off / m;
    d[i] = (r[i] - off * d[i - 1]) / m;
  }
  Vec w(n);
  w[n - 1] = d[n - 1];
  for (Index i = n - 2; i >= 0; --i) w[i] = d[i] - c[i] * w[i + 1];
  return w;
}

// Discrete H^{-1} norm sqrt(h (G b, b)).
double discrete_h_minus_one_norm(VecCRef b) {
  const double h = mesh_width(b.size());
  return std::sqrt(std::max(0.0, h * b.dot(solve_neg_laplacian(b))));
}

// (h * sum_{j=0}^{n} |D^+ w_j|^p)^{1/p} with zero boundary values.
double discrete_gradient_lp_norm(VecCRef w, double p) {
  const Index n = w.size();
  const double h = mesh_width(n);
  double acc = 0.0;
  for (Index j = 0; j <= n; ++j) {
    const double left = j > 0 ? w[j - 1] : 0.0;
    const double right = j < n ? w[j] : 0.0;
    acc += std::pow(std::abs((right - left) / h), p);
  }
  return std::pow(h * acc, 1.0 / p);
}

double discrete_lp_norm(VecCRef w, double p, double h) {
  double acc = 0.0;
  for (Index i = 0; i < w.size(); ++i) acc += std::pow(std::abs(w[i]), p);
  return std::pow(h * acc, 1.0 / p);
}

// |t|^{p-2} t with the value 0 at t = 0 for every p >= 1.
inline double signed_power(double t, double p) {
  if (t == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

// d/dt |t|^{p-2} t = (p-1)|t|^{p-2}; the singular value at t = 0 for p < 2 is replaced by 0.
inline double signed_power_derivative(double t, double p) {
  if (t == 0.0) return p == 2.0 ? 1.0 : 0.0;
  return (p - 1.0) * std::pow(std::abs(t), p - 2.0);
}

void validate_noise(const NoiseParams& noise) {
  if (!(noise.a > std::abs(noise.b_s))) {
    throw std::invalid_argument("diffusion requires a > |b_s| (otherwise the pseudo-inverse is unbounded)");
  }
}

void validate_grid(Index grid_points, Index max_points) {
  if (grid_points < 2 || grid_points > max_points) {
    throw std::invalid_argument("grid_points must lie in [2, " + std::to_string(max_points) + "]");
  }
}

// sigma(z) = diag(a + b_s tanh(z_k)) acting on U = discrete L^2, so a noise
// coordinate xi_k produces the nodal value s_k xi_k / sqrt(h).
struct DiagonalNoise {
  NoiseParams p;
  double inv_sqrt_h;

  double s(double zk) const { return p.a + p.b_s * std::tanh(zk); }

  void apply(VecCRef zblock, VecCRef xi, VecRef out) const {
    for (Index k = 0; k < zblock.size(); ++k) out[k] = s(zblock[k]) * xi[k] * inv_sqrt_h;
  }
  void pinv(VecCRef zblock, VecCRef h, VecRef xi) const {
    for (Index k = 0; k < zblock.size(); ++k) xi[k] = h[k] / (s(zblock[k]) * inv_sqrt_h);
  }
};

}  // namespace

// --- double well -------------------------------------------------------------

ModelSpec build_double_well() {
  ModelSpec m("double_well", ProductSpace(StateSpace::euclidean(1), StateSpace::euclidean(1)));
  m.noise_dim = 1;
  m.drift = [](VecCRef z, VecRef out) {
    out[0] = -z[0];
    out[1] = z[1] - z[1] * z[1] * z[1];
  };
  m.drift_jacobian = [](VecCRef z, Eigen::Ref<Mat> j) {
    j(0, 0) = -1.0;
    j(1, 1) = 1.0 - 3.0 * z[1] * z[1];
  };
  m.diffusion_apply = [](VecCRef, VecCRef xi, VecRef out) {
    out[0] = 0.0;
    out[1] = xi[0];
  };
  m.diffusion_hs_norm_sq = [](VecCRef) { return 1.0; };
  m.diffusion_hs_dist_sq = [](VecCRef, VecCRef) { return 0.0; };

  DegenerateSplit split;
  split.dim_x = 1;
  split.dim_y = 1;
  split.sigma1_apply = [](VecCRef, VecRef out) { out.setZero(); };
  split.sigma2_apply = [](VecCRef, VecCRef xi, VecRef out) { out[0] = xi[0]; };
  split.sigma2_pinv_apply = [](VecCRef, VecCRef h, VecRef xi) { xi[0] = h[0]; };
  split.sigma2_inv_bound = 1.0;
  m.split = split;

  m.constants = ModelConstants{.eta = 2.0,
                               .alpha = 4.0,
                               .c1 = 3.0,
                               .c2 = 0.0,
                               .c3 = std::sqrt(2.0),
                               .c4 = 2.0 * std::sqrt(2.0),
                               .l_sigma = 0.0,
                               .sigma_inv_bound = 1.0,
                               .coercive_eta = -2.0};
  m.dual_norm = [space = m.space](VecCRef b) { return space.norm(b); };
  m.v_norm = m.dual_norm;
  m.additive_noise = true;
  return m;
}

// --- dissipative polynomial ----------------------------------------------------

ModelSpec build_dissipative_poly(double alpha_c, double beta_c, Index dim_x, Index dim_y) {
  if (!(beta_c > 0.0)) throw std::invalid_argument("beta_c must be positive");
  if (!(alpha_c > 0.0)) throw std::invalid_argument("alpha_c must be positive");
  if (dim_x < 1 || dim_y < 1) throw std::invalid_argument("dissipative_poly needs dim_x, dim_y >= 1");
  const Index d = dim_x + dim_y;
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  // <p(w), w> <= kappa sqrt(d) |w| <= alpha_c + |w|^4 holds when
  // (3/4) s^{4/3} 4^{-1/3} <= alpha_c with s = kappa sqrt(d); take half of the largest s.
  const double s_max = std::pow((4.0 / 3.0) * std::cbrt(4.0) * alpha_c, 0.75);
  const double kappa = 0.5 * s_max / sqrt_d;
  const double s = kappa * sqrt_d;

  ModelSpec m("dissipative_poly", ProductSpace(StateSpace::euclidean(dim_x), StateSpace::euclidean(dim_y)));
  m.noise_dim = dim_y;
  m.drift = [beta_c, kappa, d](VecCRef w, VecRef out) {
    const double r2 = w.squaredNorm();
    for (Index i = 0; i < d; ++i) {
      out[i] = -beta_c * w[i] - w[i] * r2 + kappa * std::sin(w[(i + 1) % d]);
    }
  };
  m.drift_jacobian = [beta_c, kappa, d](VecCRef w, Eigen::Ref<Mat> j) {
    const double r2 = w.squaredNorm();
    j.noalias() = -2.0 * w * w.transpose();
    j.diagonal().array() -= beta_c + r2;
    for (Index i = 0; i < d; ++i) j(i, (i + 1) % d) += kappa * std::cos(w[(i + 1) % d]);
  };
  m.diffusion_apply = [dim_x, dim_y](VecCRef, VecCRef xi, VecRef out) {
    out.head(dim_x).setZero();
    out.tail(dim_y) = xi;
  };
  m.diffusion_hs_norm_sq = [dim_y](VecCRef) { return static_cast<double>(dim_y); };
  m.diffusion_hs_dist_sq = [](VecCRef, VecCRef) { return 0.0; };

  DegenerateSplit split;
  split.dim_x = dim_x;
  split.dim_y = dim_y;
  split.sigma1_apply = [](VecCRef, VecRef out) { out.setZero(); };
  split.sigma2_apply = [](VecCRef, VecCRef xi, VecRef out) { out = xi; };
  split.sigma2_pinv_apply = [](VecCRef, VecCRef h, VecRef xi) { xi = h; };
  split.sigma2_inv_bound = 1.0;
  m.split = split;

  const double coercive_slack = 1.5 * s * std::cbrt(s / 2.0);
  m.constants = ModelConstants{.eta = 2.0 * kappa - 2.0 * beta_c,
                               .alpha = 4.0,
                               .c1 = static_cast<double>(dim_y) + coercive_slack,
                               .c2 = 1.0,
                               .c3 = beta_c + s,
                               .c4 = 1.0 + beta_c,
                               .l_sigma = 0.0,
                               .sigma_inv_bound = 1.0,
                               .coercive_eta = -2.0 * beta_c};
  m.dual_norm = [space = m.space](VecCRef b) { return space.norm(b); };
  m.v_norm = m.dual_norm;
  m.band = JacobianBand{{}, d - 1, d - 1};
  m.additive_noise = true;
  return m;
}

// --- p-Laplacian -----------------------------------------------------------

ModelSpec build_p_laplacian(double q, double c, double q_tilde, Index n, NoiseParams noise) {
  if (!(q >= 2.0)) throw std::invalid_argument("p-Laplacian requires q >= 2");
  if (!(c >= 0.0)) throw std::invalid_argument("p-Laplacian requires c >= 0");
  if (!(q_tilde >= 1.0 && q_tilde <= q)) throw std::invalid_argument("p-Laplacian requires q_tilde in [1, q]");
  validate_grid(n, 256);
  validate_noise(noise);
  const double h = mesh_width(n);
  const DiagonalNoise sig{noise, 1.0 / std::sqrt(h)};

  ModelSpec m("p_laplacian", StateSpace::discrete_l2(n));
  m.noise_dim = n;
  m.drift = [q, c, q_tilde, n, h](VecCRef u, VecRef out) {
    double flux_left = signed_power(u[0] / h, q);  // D^+ u_0 with u_0 = 0 boundary value
    for (Index i = 0; i < n; ++i) {
      const double right = i + 1 < n ? u[i + 1] : 0.0;
      const double flux_right = signed_power((right - u[i]) / h, q);
      out[i] = (flux_right - flux_left) / h - c * signed_power(u[i], q_tilde);
      flux_left = flux_right;
    }
  };
  m.drift_jacobian = [q, c, q_tilde, n, h](VecCRef u, Eigen::Ref<Mat> j) {
    const double inv_h2 = 1.0 / (h * h);
    double k_left = signed_power_derivative(u[0] / h, q);
    for (Index i = 0; i < n; ++i) {
      const double right = i + 1 < n ? u[i + 1] : 0.0;
      const double k_right = signed_power_derivative((right - u[i]) / h, q);
      j(i, i) = -(k_left + k_right) * inv_h2 - c * signed_power_derivative(u[i], q_tilde);
      if (i > 0) j(i, i - 1) = k_left * inv_h2;
      if (i + 1 < n) j(i, i + 1) = k_right * inv_h2;
      k_left = k_right;
    }
  };
  m.diffusion_apply = [sig](VecCRef z, VecCRef xi, VecRef out) { sig.apply(z, xi, out); };
  m.diffusion_pinv_apply = [sig](VecCRef z, VecCRef hv, VecRef xi) { sig.pinv(z, hv, xi); };
  m.diffusion_hs_norm_sq = [sig](VecCRef z) {
    double acc = 0.0;
    for (Index k = 0; k < z.size(); ++k) acc += sig.s(z[k]) * sig.s(z[k]);
    return acc;
  };
  m.diffusion_hs_dist_sq = [sig](VecCRef u, VecCRef v) {
    double acc = 0.0;
    for (Index k = 0; k < u.size(); ++k) {
      const double d = sig.s(u[k]) - sig.s(v[k]);
      acc += d * d;
    }
    return acc;
  };

  const double mu1 = laplacian_eigenvalue(n, 1);
  const double l_sigma_sq = noise.b_s * noise.b_s / h;
  const double amp = noise.a + std::abs(noise.b_s);
  m.constants = ModelConstants{.eta = l_sigma_sq,
                               .alpha = q,
                               .c1 = static_cast<double>(n) * amp * amp,
                               .c2 = 2.0 * std::pow(mu1, q / 2.0),
                               .c3 = 1.0 + c / std::sqrt(mu1),
                               .c4 = std::pow(h, 0.5 - (q - 1.0) / q) + c / std::sqrt(mu1),
                               .l_sigma = std::sqrt(l_sigma_sq),
                               .sigma_inv_bound = 1.0 / (noise.a - std::abs(noise.b_s)),
                               .coercive_eta = std::nullopt};
  m.growth_norm = GrowthNormKind::DiscreteDual;
  m.growth_norm_label = "discrete H^-1 dual norm vs discrete W^{1,q} seminorm";
  m.dual_norm = [](VecCRef b) { return discrete_h_minus_one_norm(b); };
  m.v_norm = [q](VecCRef w) { return discrete_gradient_lp_norm(w, q); };
  m.band = JacobianBand{{}, 1, 1};
  return m;
}

// --- porous media --------------------------------------------------------------

ModelSpec build_porous_media(double q, double eta_c, Index n, NoiseParams noise) {
  if (!(q >= 2.0)) throw std::invalid_argument("porous media requires q >= 2");
  validate_grid(n, 256);
  validate_noise(noise);
  const double h = mesh_width(n);
  const DiagonalNoise sig{noise, 1.0 / std::sqrt(h)};
  const StateSpace space = StateSpace::inverse_laplacian(n);
  const Vec g_diag = space.weight_operator().diagonal();

  ModelSpec m("porous_media", space);
  m.noise_dim = n;
  m.drift = [q, eta_c, n](VecCRef u, VecRef out) {
    Vec psi(n);
    for (Index i = 0; i < n; ++i) psi[i] = signed_power(u[i], q);
    apply_dirichlet_laplacian(psi, out);
    out += eta_c * u;
  };
  m.drift_jacobian = [q, eta_c, n, h](VecCRef u, Eigen::Ref<Mat> j) {
    const double s = 1.0 / (h * h);
    for (Index i = 0; i < n; ++i) {
      j(i, i) = -2.0 * s * signed_power_derivative(u[i], q) + eta_c;
      if (i > 0) j(i, i - 1) = s * signed_power_derivative(u[i - 1], q);
      if (i + 1 < n) j(i, i + 1) = s * signed_power_derivative(u[i + 1], q);
    }
  };
  m.diffusion_apply = [sig](VecCRef z, VecCRef xi, VecRef out) { sig.apply(z, xi, out); };
  m.diffusion_pinv_apply = [sig](VecCRef z, VecCRef hv, VecRef xi) { sig.pinv(z, hv, xi); };
  // A noise basis vector e_k maps to s_k h^{-1/2} delta_k, whose H^{-1} norm^2 is s_k^2 G_kk.
  m.diffusion_hs_norm_sq = [sig, g_diag](VecCRef z) {
    double acc = 0.0;
    for (Index k = 0; k < z.size(); ++k) acc += sig.s(z[k]) * sig.s(z[k]) * g_diag[k];
    return acc;
  };
  m.diffusion_hs_dist_sq = [sig, g_diag](VecCRef u, VecCRef v) {
    double acc = 0.0;
    for (Index k = 0; k < u.size(); ++k) {
      const double d = sig.s(u[k]) - sig.s(v[k]);
      acc += d * d * g_diag[k];
    }
    return acc;
  };

  const double mu1 = laplacian_eigenvalue(n, 1);
  const double mu_max = laplacian_eigenvalue(n, n);
  const double l_sigma_sq = noise.b_s * noise.b_s * g_diag.maxCoeff() * mu_max / h;
  const double amp = noise.a + std::abs(noise.b_s);
  m.constants = ModelConstants{.eta = 2.0 * eta_c + l_sigma_sq,
                               .alpha = q,
                               .c1 = amp * amp * g_diag.sum(),
                               .c2 = 2.0 * std::pow(mu1, q / 2.0),
                               .c3 = 1.0 + std::abs(eta_c) / 4.0,
                               .c4 = 1.0 + std::abs(eta_c) / 4.0,
                               .l_sigma = std::sqrt(l_sigma_sq),
                               .sigma_inv_bound = std::sqrt(mu_max) / (noise.a - std::abs(noise.b_s)),
                               .coercive_eta = std::nullopt};
  m.growth_norm = GrowthNormKind::DiscreteDual;
  m.growth_norm_label = "discrete L^{q*} norm of G b vs discrete L^q norm";
  const double q_star = q / (q - 1.0);
  m.dual_norm = [q_star, h](VecCRef b) { return discrete_lp_norm(solve_neg_laplacian(b), q_star, h); };
  m.v_norm = [q, h](VecCRef w) { return discrete_lp_norm(w, q, h); };
  m.band = JacobianBand{{}, 1, 1};
  return m;
}

// --- reaction-diffusion pair -------------------------------------------------

ModelSpec build_reaction_diffusion_pair(Index n, NoiseParams noise) {
  validate_grid(n, 128);
  validate_noise(noise);
  const double h = mesh_width(n);
  const DiagonalNoise sig{noise, 1.0 / std::sqrt(h)};

  ModelSpec m("reaction_diffusion", ProductSpace(StateSpace::discrete_l2(n), StateSpace::discrete_l2(n)));
  m.noise_dim = n;
  m.drift = [n](VecCRef z, VecRef out) {
    const auto x = z.head(n);
    const auto y = z.tail(n);
    apply_dirichlet_laplacian(x, out.head(n));
    apply_dirichlet_laplacian(y, out.tail(n));
    for (Index i = 0; i < n; ++i) {
      out[i] += y[i] + 2.0 * x[i] - x[i] * x[i] * x[i];
      out[n + i] += x[i] + 2.0 * y[i] - y[i] * y[i] * y[i];
    }
  };
  m.drift_jacobian = [n, h](VecCRef z, Eigen::Ref<Mat> j) {
    const double s = 1.0 / (h * h);
    for (Index blk = 0; blk < 2; ++blk) {
      const Index o = blk * n;
      for (Index i = 0; i < n; ++i) {
        j(o + i, o + i) = -2.0 * s + 2.0 - 3.0 * z[o + i] * z[o + i];
        if (i > 0) j(o + i, o + i - 1) = s;
        if (i + 1 < n) j(o + i, o + i + 1) = s;
        j(o + i, (o + n + i) % (2 * n)) = 1.0;
      }
    }
  };
  m.diffusion_apply = [sig, n](VecCRef z, VecCRef xi, VecRef out) {
    out.head(n).setZero();
    sig.apply(z.tail(n), xi, out.tail(n));
  };
  m.diffusion_hs_norm_sq = [sig, n](VecCRef z) {
    double acc = 0.0;
    for (Index k = 0; k < n; ++k) acc += sig.s(z[n + k]) * sig.s(z[n + k]);
    return acc;
  };
  m.diffusion_hs_dist_sq = [sig, n](VecCRef u, VecCRef v) {
    double acc = 0.0;
    for (Index k = 0; k < n; ++k) {
      const double d = sig.s(u[n + k]) - sig.s(v[n + k]);
      acc += d * d;
    }
    return acc;
  };

  DegenerateSplit split;
  split.dim_x = n;
  split.dim_y = n;
  split.sigma1_apply = [](VecCRef, VecRef out) { out.setZero(); };
  split.sigma2_apply = [sig, n](VecCRef z, VecCRef xi, VecRef out) { sig.apply(z.tail(n), xi, out); };
  split.sigma2_pinv_apply = [sig, n](VecCRef z, VecCRef hv, VecRef xi) { sig.pinv(z.tail(n), hv, xi); };
  split.sigma2_inv_bound = 1.0 / (noise.a - std::abs(noise.b_s));
  m.split = split;

  const double mu1 = laplacian_eigenvalue(n, 1);
  const double amp = noise.a + std::abs(noise.b_s);
  const double l_sigma_sq = noise.b_s * noise.b_s / h;
  m.constants = ModelConstants{.eta = 2.0 * (3.0 - mu1) + l_sigma_sq,
                               .alpha = 4.0,
                               .c1 = static_cast<double>(n) * amp * amp,
                               .c2 = 1.0,
                               .c3 = 2.0 + 6.0 / std::sqrt(mu1),
                               .c4 = 2.0 + 8.0 / std::sqrt(mu1),
                               .l_sigma = std::sqrt(l_sigma_sq),
                               .sigma_inv_bound = split.sigma2_inv_bound,
                               .coercive_eta = std::nullopt};
  m.growth_norm = GrowthNormKind::DiscreteDual;
  m.growth_norm_label = "discrete H^-1 dual norm vs max(|Dw|_{L^2}, |w|_{L^6})";
  m.dual_norm = [n](VecCRef b) {
    const double nx = discrete_h_minus_one_norm(b.head(n));
    const double ny = discrete_h_minus_one_norm(b.tail(n));
    return std::sqrt(nx * nx + ny * ny);
  };
  m.v_norm = [n, h](VecCRef w) {
    const double gx = discrete_gradient_lp_norm(w.head(n), 2.0);
    const double gy = discrete_gradient_lp_norm(w.tail(n), 2.0);
    return std::max(std::sqrt(gx * gx + gy * gy), discrete_lp_norm(w, 6.0, h));
  };
  // Interleaving (x_k, y_k) turns the two coupled tridiagonal blocks into a band of width 2.
  JacobianBand band;
  band.ordering.resize(2 * n);
  for (Index k = 0; k < n; ++k) {
    band.ordering[2 * k] = k;
    band.ordering[2 * k + 1] = n + k;
  }
  band.lower = 2;
  band.upper = 2;
  m.band = band;
  return m;
}

// --- Ornstein-Uhlenbeck oracle -----------------------------------------------

ModelSpec build_ou_oracle(Index dim, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("OU rate must be positive");
  ModelSpec m("ou", StateSpace::euclidean(dim));
  m.noise_dim = dim;
  m.drift = [rate](VecCRef z, VecRef out) { out = -rate * z; };
  m.drift_jacobian = [rate](VecCRef, Eigen::Ref<Mat> j) { j.diagonal().setConstant(-rate); };
  m.diffusion_apply = [](VecCRef, VecCRef xi, VecRef out) { out = xi; };
  m.diffusion_pinv_apply = [](VecCRef, VecCRef hv, VecRef xi) { xi = hv; };
  m.diffusion_hs_norm_sq = [dim](VecCRef) { return static_cast<double>(dim); };
  m.diffusion_hs_dist_sq = [](VecCRef, VecCRef) { return 0.0; };
  const double delta = 1e-3 * rate;
  m.constants = ModelConstants{.eta = -2.0 * rate,
                               .alpha = 2.0,
                               .c1 = static_cast<double>(dim),
                               .c2 = delta,
                               .c3 = 1.0,
                               .c4 = rate,
                               .l_sigma = 0.0,
                               .sigma_inv_bound = 1.0,
                               .coercive_eta = -2.0 * rate + delta};
  m.dual_norm = [space = m.space](VecCRef b) { return space.norm(b); };
  m.v_norm = m.dual_norm;
  m.additive_noise = true;
  return m;
}

// --- test functions ------------------------------------------------------------

TestFunction::TestFunction(Space space, Vec a, double c, TestFunctionForm form)
    : space_(std::move(space)), a_(std::move(a)), c_(c), form_(form) {
  if (a_.size() != space_.dim()) throw std::invalid_argument("test-function direction has wrong dimension");
  a_norm_ = space_.norm(a_);
  lip_log_bound_ = form_ == TestFunctionForm::BoundedTanh ? std::abs(c_) * a_norm_ : a_norm_;
}

TestFunction TestFunction::bounded(Space space, Vec a, double c) {
  return TestFunction(std::move(space), std::move(a), c, TestFunctionForm::BoundedTanh);
}

TestFunction TestFunction::exp_linear(Space space, Vec a) {
  return TestFunction(std::move(space), std::move(a), 1.0, TestFunctionForm::ExpLinearOracle);
}

double TestFunction::eval_log(VecCRef x) const {
  const double s = space_.inner(a_, x);
  return form_ == TestFunctionForm::BoundedTanh ? c_ * std::tanh(s) : s;
}

double TestFunction::eval(VecCRef x) const { return std::exp(eval_log(x)); }

double TestFunction::grad_bound() const {
  if (form_ == TestFunctionForm::ExpLinearOracle) {
    return a_norm_ == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::abs(c_) * a_norm_ * std::exp(std::abs(c_));
}

Vec TestFunction::gradient(VecCRef x) const {
  const double s = space_.inner(a_, x);
  if (form_ == TestFunctionForm::ExpLinearOracle) return std::exp(s) * a_;
  const double sech = 1.0 / std::cosh(s);
  return std::exp(c_ * std::tanh(s)) * c_ * sech * sech * a_;
}

bool TestFunction::is_constant() const {
  return a_norm_ == 0.0 || (form_ == TestFunctionForm::BoundedTanh && c_ == 0.0);
}

// --- checkers ------------------------------------------------------------------

namespace {

Vec uniform_box(std::mt19937_64& rng, Index dim, double radius) {
  std::uniform_real_distribution<double> u(-radius, radius);
  Vec w(dim);
  for (Index i = 0; i < dim; ++i) w[i] = u(rng);
  return w;
}

Vec random_unit(std::mt19937_64& rng, Index dim) {
  std::normal_distribution<double> g;
  Vec d(dim);
  do {
    for (Index i = 0; i < dim; ++i) d[i] = g(rng);
  } while (d.norm() == 0.0);
  return d / d.norm();
}

AssumptionReport make_report(std::string quantity, double sup, double declared, double margin,
                             std::int64_t count, std::string label) {
  AssumptionReport r;
  r.quantity = std::move(quantity);
  r.sampled_sup = sup;
  r.declared = declared;
  r.margin = margin;
  r.sample_count = count;
  r.pass = sup <= declared + margin;
  r.norm_label = std::move(label);
  return r;
}

void require_samples(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("sample_count must be at least 1");
}

}  // namespace

double hs_norm_sq_by_basis(const ModelSpec& model, VecCRef z) {
  Vec xi = Vec::Zero(model.noise_dim);
  Vec img(model.dim());
  double acc = 0.0;
  for (Index k = 0; k < model.noise_dim; ++k) {
    xi[k] = 1.0;
    model.diffusion_apply(z, xi, img);
    acc += model.space.norm_sq(img);
    xi[k] = 0.0;
  }
  return acc;
}

double hs_dist_sq_by_basis(const ModelSpec& model, VecCRef u, VecCRef v) {
  Vec xi = Vec::Zero(model.noise_dim);
  Vec iu(model.dim()), iv(model.dim());
  double acc = 0.0;
  for (Index k = 0; k < model.noise_dim; ++k) {
    xi[k] = 1.0;
    model.diffusion_apply(u, xi, iu);
    model.diffusion_apply(v, xi, iv);
    acc += model.space.norm_sq(iu - iv);
    xi[k] = 0.0;
  }
  return acc;
}

AssumptionReport check_monotonicity(const ModelSpec& model, std::int64_t sample_count, double box_radius,
                                    std::uint64_t seed) {
  require_samples(sample_count);
  std::mt19937_64 rng(seed);
  const Index d = model.dim();
  constexpr double kSeparations[] = {1e-3, 1e-2, 1e-1};
  const double center_radius = 1e-2 * std::min(1.0, box_radius);
  Vec bu(d), bv(d);
  double sup = -std::numeric_limits<double>::infinity();
  double inf = std::numeric_limits<double>::infinity();
  std::int64_t used = 0;
  for (std::int64_t i = 0; i < sample_count; ++i) {
    Vec u, v;
    if (i < sample_count / 2 || sample_count == 1) {
      const Vec c = uniform_box(rng, d, center_radius);
      Vec dir;
      if (i % 4 == 0) {
        dir = Vec::Zero(d);
        dir[(i / 4) % d] = 1.0;
      } else {
        dir = random_unit(rng, d);
      }
      const double sep = kSeparations[i % 3];
      u = c + 0.5 * sep * dir;
      v = c - 0.5 * sep * dir;
    } else {
      u = uniform_box(rng, d, box_radius);
      v = uniform_box(rng, d, box_radius);
    }
    const double dist_sq = model.space.norm_sq(u - v);
    if (dist_sq == 0.0) continue;  // coincident pair
    model.drift(u, bu);
    model.drift(v, bv);
    const double quotient =
        (2.0 * model.space.inner(bu - bv, u - v) + model.diffusion_hs_dist_sq(u, v)) / dist_sq;
    sup = std::max(sup, quotient);
    inf = std::min(inf, quotient);
    ++used;
  }
  const double eta = model.constants.eta;
  auto r = make_report("monotonicity quotient", sup, eta, 1e-6 * std::max(1.0, std::abs(eta)), used,
                       "H");
  r.quantity += " (sampled inf " + std::to_string(inf) + ")";
  return r;
}

AssumptionReport check_coercivity(const ModelSpec& model, std::int64_t sample_count, double box_radius,
                                  std::uint64_t seed) {
  require_samples(sample_count);
  std::mt19937_64 rng(seed);
  const auto& k = model.constants;
  const double eta = k.eta_for_coercivity();
  Vec b(model.dim());
  double sup = -std::numeric_limits<double>::infinity();
  double scale = 1.0;
  for (std::int64_t i = 0; i < sample_count; ++i) {
    const Vec w = i == 0 ? Vec::Zero(model.dim()) : uniform_box(rng, model.dim(), box_radius);
    model.drift(w, b);
    const double lhs = 2.0 * model.space.inner(b, w) + model.diffusion_hs_norm_sq(w);
    const double nw = model.space.norm(w);
    const double rhs = k.c1 + eta * nw * nw - k.c2 * std::pow(nw, k.alpha);
    sup = std::max(sup, lhs - rhs);
    scale = std::max(scale, std::abs(lhs) + std::abs(rhs));
  }
  return make_report("coercivity excess 2(b(w),w)+|sigma(w)|_HS^2-(C1+eta|w|^2-C2|w|^alpha)", sup, 0.0,
                     1e-12 * scale, sample_count, "H");
}

AssumptionReport check_growth(const ModelSpec& model, std::int64_t sample_count, double box_radius,
                              std::uint64_t seed) {
  require_samples(sample_count);
  std::mt19937_64 rng(seed);
  const auto& k = model.constants;
  Vec b(model.dim());
  double sup = 0.0;
  for (std::int64_t i = 0; i < sample_count; ++i) {
    const Vec w = i == 0 ? Vec::Zero(model.dim()) : uniform_box(rng, model.dim(), box_radius);
    model.drift(w, b);
    const double bound = k.c3 + k.c4 * std::pow(model.v_norm(w), k.alpha - 1.0);
    sup = std::max(sup, model.dual_norm(b) / bound);
  }
  const std::string label = model.growth_norm == GrowthNormKind::StateNorm
                                ? std::string("H norm (V* = H)")
                                : "surrogate: " + model.growth_norm_label;
  return make_report("growth ratio |b(w)|_{V*}/(C3+C4|w|^{alpha-1})", sup, 1.0, 1e-9, sample_count, label);
}

AssumptionReport check_diffusion_lipschitz(const ModelSpec& model, std::int64_t sample_count,
                                           double box_radius, std::uint64_t seed) {
  require_samples(sample_count);
  std::mt19937_64 rng(seed);
  double sup = 0.0;
  std::int64_t used = 0;
  for (std::int64_t i = 0; i < sample_count; ++i) {
    const Vec u = uniform_box(rng, model.dim(), box_radius);
    const Vec v = i % 2 == 0 ? Vec(u + 1e-2 * random_unit(rng, model.dim()))
                             : uniform_box(rng, model.dim(), box_radius);
    const double dist_sq = model.space.norm_sq(u - v);
    if (dist_sq == 0.0) continue;
    sup = std::max(sup, model.diffusion_hs_dist_sq(u, v) / dist_sq);
    ++used;
  }
  const double l2 = model.constants.l_sigma * model.constants.l_sigma;
  return make_report("|sigma(u)-sigma(v)|_HS^2/|u-v|^2", sup, l2, 1e-9 * std::max(1.0, l2), used, "H");
}

AssumptionReport check_pseudo_inverse(const ModelSpec& model, std::int64_t sample_count, double box_radius,
                                      std::uint64_t seed) {
  require_samples(sample_count);
  std::mt19937_64 rng(seed);
  double sup = 0.0;
  Vec xi(model.noise_dim);
  for (std::int64_t i = 0; i < sample_count; ++i) {
    const Vec z = uniform_box(rng, model.dim(), box_radius);
    if (model.split) {
      const auto& s = *model.split;
      const Vec h = uniform_box(rng, s.dim_y, 1.0);
      Vec back(s.dim_y);
      s.sigma2_pinv_apply(z, h, xi);
      s.sigma2_apply(z, xi, back);
      sup = std::max(sup, (back - h).norm() / h.norm());
    } else {
      const Vec h = uniform_box(rng, model.dim(), 1.0);
      Vec back(model.dim());
      model.diffusion_pinv_apply(z, h, xi);
      model.diffusion_apply(z, xi, back);
      sup = std::max(sup, (back - h).norm() / h.norm());
    }
  }
  return make_report("relative |sigma sigma^{-1} h - h|", sup, 0.0, 1e-10, sample_count, "coordinates");
}

AssumptionReport check_double_well_identity(const ModelSpec& model, std::int64_t sample_count,
                                            double box_radius, std::uint64_t seed) {
  require_samples(sample_count);
  if (model.dim() != 2) throw std::invalid_argument("double-well identity needs a 2-dimensional model");
  std::mt19937_64 rng(seed);
  Vec b(2);
  double sup = 0.0;
  for (std::int64_t i = 0; i < sample_count; ++i) {
    const Vec w = uniform_box(rng, 2, box_radius);
    model.drift(w, b);
    const double lhs = 2.0 * model.space.inner(b, w) + model.diffusion_hs_norm_sq(w);
    const double w2sq = w[1] * w[1];
    const double rhs = -2.0 * w.squaredNorm() - 2.0 * (w2sq - 1.0) * (w2sq - 1.0) + 3.0;
    sup = std::max(sup, std::abs(lhs - rhs));
  }
  return make_report("|2(b(w),w)+|sigma|^2 - (-2|w|^2-2(w_2^2-1)^2+3)|", sup, 0.0, 1e-12, sample_count,
                     "R^2");
}

}  // namespace monolab
