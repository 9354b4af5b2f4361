#include "monolab/models.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace monolab;

namespace {

std::vector<ModelSpec> all_models() {
  std::vector<ModelSpec> m;
  m.push_back(build_double_well());
  m.push_back(build_ou_oracle(3, 1.5));
  m.push_back(build_dissipative_poly(1.0, 1.0, 2, 3));
  m.push_back(build_p_laplacian(3.0, 1.0, 2.0, 16, {1.0, 0.5}));
  m.push_back(build_porous_media(3.0, -1.0, 16, {1.0, 0.3}));
  m.push_back(build_reaction_diffusion_pair(12, {1.0, 0.2}));
  return m;
}

Vec random_vec(std::mt19937_64& rng, Index n, double r) {
  std::uniform_real_distribution<double> u(-r, r);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

TEST_CASE("double-well drift and the coercivity identity") {
  const auto m = build_double_well();
  const Vec b = m.drift_at(Vec::Ones(2));
  CHECK(b[0] == -1.0);
  CHECK(b[1] == 0.0);
  auto lhs = [&](VecCRef w) { return 2.0 * m.space.inner(m.drift_at(w), w) + m.diffusion_hs_norm_sq(w); };
  auto paper = [](VecCRef w) {
    const double y2 = w[1] * w[1];
    return -2.0 * w.squaredNorm() - 2.0 * (y2 - 1.0) * (y2 - 1.0) + 3.0;
  };
  CHECK(lhs(Vec::Zero(2)) == 1.0);
  CHECK(paper(Vec::Zero(2)) == 1.0);
  CHECK(lhs(Vec::Ones(2)) == -1.0);
  CHECK(paper(Vec::Ones(2)) == -1.0);
  const auto rep = check_double_well_identity(m, 100000, 3.0);
  CHECK(rep.pass);
  CHECK(rep.sampled_sup <= 1e-12);
}

TEST_CASE("double-well monotonicity quotient approaches 2 near the origin") {
  const auto m = build_double_well();
  for (double eps : {1e-3, 1e-2, 1e-1}) {
    const Vec u = (Vec(2) << 0, eps).finished();
    const Vec v = -u;
    const double q = 2.0 * m.space.inner(m.drift_at(u) - m.drift_at(v), u - v) / m.space.norm_sq(u - v);
    CHECK(q == doctest::Approx(2.0 * (1.0 - eps * eps)).epsilon(1e-12));
  }
  const auto rep = check_monotonicity(m, 20000, 3.0);
  CHECK(rep.sampled_sup >= 1.90);
  CHECK(rep.sampled_sup <= 2.00);
  CHECK(rep.pass);
}

TEST_CASE("OU oracle drift and exact monotonicity quotient") {
  const auto m = build_ou_oracle(4, 1.0);
  CHECK(m.drift_at(Vec::Ones(4)) == -Vec::Ones(4));
  const auto m2 = build_ou_oracle(2, 1.7);
  const auto rep = check_monotonicity(m2, 5000, 3.0);
  CHECK(rep.sampled_sup == doctest::Approx(-3.4).epsilon(1e-12));
  CHECK(m2.constants.eta == -3.4);
  CHECK(rep.pass);
  // 2<b(w),w> + |sigma|^2 = -2 rate |w|^2 + dim
  const Vec w = (Vec(2) << 0.3, -1.2).finished();
  CHECK(2.0 * w.dot(m2.drift_at(w)) + m2.diffusion_hs_norm_sq(w) ==
        doctest::Approx(-3.4 * w.squaredNorm() + 2.0).epsilon(1e-14));
}

TEST_CASE("dissipative polynomial bound <b(w), w> <= alpha_c - beta_c |w|^2") {
  const auto m = build_dissipative_poly(1.0, 1.0, 2, 2);
  CHECK(m.space.inner(m.drift_at(Vec::Zero(4)), Vec::Zero(4)) == 0.0);
  std::mt19937_64 rng(5);
  double worst = -1e300;
  for (int i = 0; i < 100000; ++i) {
    const Vec w = random_vec(rng, 4, 5.0);
    worst = std::max(worst, w.dot(m.drift_at(w)) + w.squaredNorm() - 1.0);
  }
  CHECK(worst <= 0.0);
  CHECK(check_monotonicity(m, 20000, 5.0).pass);
}

TEST_CASE("p-Laplacian reduces to the discrete Laplacian for q = 2, c = 0") {
  const Index n = 20;
  const auto m = build_p_laplacian(2.0, 0.0, 2.0, n, {1.0, 0.5});
  CHECK(m.drift_at(Vec::Zero(n)).norm() == 0.0);
  std::mt19937_64 rng(1);
  const Vec u = random_vec(rng, n, 1.0);
  const Vec oracle = dirichlet_laplacian(n) * u;
  CHECK((m.drift_at(u) - oracle).lpNorm<Eigen::Infinity>() < 1e-9 * oracle.lpNorm<Eigen::Infinity>());
}

TEST_CASE("p-Laplacian drift is monotone") {
  const Index n = 16;
  const auto m = build_p_laplacian(3.0, 1.0, 2.0, n, {1.0, 0.5});
  std::mt19937_64 rng(2);
  double worst = -1e300;
  for (int i = 0; i < 10000; ++i) {
    const Vec u = random_vec(rng, n, 2.0);
    const Vec v = random_vec(rng, n, 2.0);
    worst = std::max(worst, m.space.inner(m.drift_at(u) - m.drift_at(v), u - v));
  }
  CHECK(worst <= 0.0);
  const auto rep = check_monotonicity(m, 5000, 2.0);
  CHECK(rep.pass);
  CHECK(rep.sampled_sup <= m.constants.eta);
}

TEST_CASE("porous media drift for q = 2 and H^-1 monotonicity") {
  const Index n = 16;
  const auto lin = build_porous_media(2.0, -0.7, n, {1.0, 0.3});
  std::mt19937_64 rng(3);
  const Vec u = random_vec(rng, n, 1.0);
  const Vec oracle = (dirichlet_laplacian(n) - 0.7 * Mat::Identity(n, n)) * u;
  CHECK((lin.drift_at(u) - oracle).lpNorm<Eigen::Infinity>() < 1e-9 * oracle.lpNorm<Eigen::Infinity>());
  CHECK(lin.drift_at(Vec::Zero(n)).norm() == 0.0);

  const auto m = build_porous_media(3.0, -1.0, n, {1.0, 0.3});
  double worst = -1e300;
  for (int i = 0; i < 10000; ++i) {
    const Vec a = random_vec(rng, n, 2.0);
    const Vec b = random_vec(rng, n, 2.0);
    const Vec d = a - b;
    worst = std::max(worst, m.space.inner(m.drift_at(a) - m.drift_at(b), d) - (-1.0) * m.space.norm_sq(d));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("reaction-diffusion drift: linear and cubic parts") {
  const Index n = 10;
  const auto m = build_reaction_diffusion_pair(n, {1.0, 0.1});
  CHECK(m.drift_at(Vec::Zero(2 * n)).norm() == 0.0);
  const Mat l = dirichlet_laplacian(n);
  Mat block(2 * n, 2 * n);
  block << l + 2.0 * Mat::Identity(n, n), Mat::Identity(n, n), Mat::Identity(n, n), l + 2.0 * Mat::Identity(n, n);
  std::mt19937_64 rng(4);
  const Vec z = random_vec(rng, 2 * n, 1.0);
  const Vec cubic = z.array().cube();
  const Vec oracle = block * z - cubic;
  CHECK((m.drift_at(z) - oracle).lpNorm<Eigen::Infinity>() < 1e-9 * oracle.lpNorm<Eigen::Infinity>());

  Vec ones(2 * n);
  ones << Vec::Ones(n), Vec::Zero(n);
  const Vec b = m.drift_at(ones);
  const Vec l1 = l * Vec::Ones(n);
  for (Index i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(l1[i] + 2.0 - 1.0));
  CHECK(m.degenerate());
  CHECK(m.split->sigma1_is_zero);
}

TEST_CASE("drift Jacobians match central differences") {
  std::mt19937_64 rng(6);
  for (const auto& m : all_models()) {
    CAPTURE(m.id);
    const Index d = m.dim();
    const Vec z = random_vec(rng, d, 1.0);
    Mat j = Mat::Zero(d, d);
    m.drift_jacobian(z, j);
    Mat fd(d, d);
    for (Index k = 0; k < d; ++k) {
      const double e = 1e-6 * std::max(1.0, std::abs(z[k]));
      Vec zp = z, zm = z;
      zp[k] += e;
      zm[k] -= e;
      fd.col(k) = (m.drift_at(zp) - m.drift_at(zm)) / (2.0 * e);
    }
    CHECK((j - fd).lpNorm<Eigen::Infinity>() <= 1e-5 * std::max(1.0, fd.lpNorm<Eigen::Infinity>()));
  }
}

TEST_CASE("every model passes its own assumption checkers") {
  for (const auto& m : all_models()) {
    CAPTURE(m.id);
    const double box = m.id == "dissipative_poly" ? 5.0 : 2.0;
    const auto mono = check_monotonicity(m, 4000, box);
    const auto coer = check_coercivity(m, 4000, box);
    const auto grow = check_growth(m, 4000, box);
    const auto lip = check_diffusion_lipschitz(m, 4000, box);
    const auto pinv = check_pseudo_inverse(m, 1000, box);
    CAPTURE(mono.quantity);
    CHECK(mono.pass);
    CHECK(coer.pass);
    CHECK(grow.pass);
    CHECK(lip.pass);
    CHECK(pinv.pass);
  }
}

TEST_CASE("closed-form HS norms match the basis sum") {
  std::mt19937_64 rng(8);
  for (const auto& m : all_models()) {
    CAPTURE(m.id);
    const Vec u = random_vec(rng, m.dim(), 1.5);
    const Vec v = random_vec(rng, m.dim(), 1.5);
    CHECK(m.diffusion_hs_norm_sq(u) == doctest::Approx(hs_norm_sq_by_basis(m, u)).epsilon(1e-12));
    CHECK(m.diffusion_hs_dist_sq(u, v) ==
          doctest::Approx(hs_dist_sq_by_basis(m, u, v)).epsilon(1e-10).scale(1e-14));
  }
}

TEST_CASE("invalid model parameters are rejected") {
  CHECK_THROWS(build_p_laplacian(1.5, 1.0, 1.0, 16, {1.0, 0.5}));
  CHECK_THROWS(build_p_laplacian(3.0, 1.0, 2.0, 16, {0.5, 0.5}));
  CHECK_THROWS(build_porous_media(3.0, -1.0, 1, {1.0, 0.3}));
  CHECK_THROWS(build_dissipative_poly(1.0, 0.0, 1, 1));
  CHECK_THROWS(build_ou_oracle(0, 1.0));
}

TEST_CASE("bounded test function") {
  const Space s = StateSpace::euclidean(2);
  const Vec a = (Vec(2) << 0.6, -0.8).finished();
  const auto f = TestFunction::bounded(s, a, 1.3);
  CHECK(f.eval(Vec::Zero(2)) == 1.0);
  CHECK(f.eval_log(Vec::Zero(2)) == 0.0);
  const auto one = TestFunction::bounded(s, a, 0.0);
  CHECK(one.is_constant());
  CHECK(one.lip_log_bound() == 0.0);
  CHECK(one.eval((Vec(2) << 5, 7).finished()) == 1.0);

  std::mt19937_64 rng(9);
  const double bound = 1.3 * 1.0 * (1.0 + 1e-6);
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_vec(rng, 2, 3.0);
    Vec g(2), gf(2);
    for (Index k = 0; k < 2; ++k) {
      Vec xp = x, xm = x;
      xp[k] += 1e-6;
      xm[k] -= 1e-6;
      g[k] = (f.eval_log(xp) - f.eval_log(xm)) / 2e-6;
      gf[k] = (f.eval(xp) - f.eval(xm)) / 2e-6;
    }
    CHECK(g.norm() <= bound);
    CHECK((f.gradient(x) - gf).norm() < 1e-6);
    CHECK(f.gradient(x).norm() <= f.grad_bound());
  }
}

TEST_CASE("exp-linear oracle test function") {
  const Space s = StateSpace::euclidean(1);
  const auto f = TestFunction::exp_linear(s, Vec::Constant(1, 0.5));
  CHECK(f.is_oracle());
  CHECK(f.eval(Vec::Constant(1, 2.0)) == doctest::Approx(std::exp(1.0)));
  CHECK(std::isinf(f.grad_bound()));
  CHECK_THROWS(TestFunction::exp_linear(s, Vec::Zero(2)));
}
