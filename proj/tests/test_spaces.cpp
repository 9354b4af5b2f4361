#include "monolab/spaces.hpp"

#include <doctest.h>

#include <cmath>

using namespace monolab;

TEST_CASE("euclidean inner products") {
  const auto s = StateSpace::euclidean(2);
  CHECK(s.inner(Vec::Unit(2, 0), Vec::Unit(2, 1)) == 0.0);
  const Vec u = (Vec(2) << 3, 4).finished();
  CHECK(s.inner(u, u) == 25.0);
  CHECK(s.distance(Vec::Ones(2), Vec::Zero(2)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s.distance(u, u) == 0.0);
}

TEST_CASE("dimension mismatch is rejected") {
  const auto s = StateSpace::euclidean(2);
  CHECK_THROWS(s.inner(Vec::Zero(3), Vec::Zero(3)));
  CHECK_THROWS(s.norm(Vec::Zero(1)));
}

TEST_CASE("discrete L2 uses the mesh weight") {
  const auto s = StateSpace::discrete_l2(31);
  const double h = 1.0 / 32.0;
  CHECK(mesh_width(31) == h);
  CHECK(s.norm_sq(Vec::Ones(31)) == doctest::Approx(31 * h));
  const Vec e1 = laplacian_eigenvector(31, 1);
  CHECK(s.norm_sq(e1) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("H^-1 norm of the first eigenvector against a dense solve") {
  const Index n = 31;
  const auto s = StateSpace::inverse_laplacian(n);
  const Vec e1 = laplacian_eigenvector(n, 1);
  const double h = mesh_width(n);
  const Mat neg_l = -dirichlet_laplacian(n);
  const Vec w = neg_l.fullPivLu().solve(e1);
  const double oracle = h * w.dot(e1);
  const double mu1 = (2.0 / (h * h)) * (1.0 - std::cos(M_PI * h));
  CHECK(laplacian_eigenvalue(n, 1) == doctest::Approx(mu1).epsilon(1e-14));
  CHECK(oracle == doctest::Approx(1.0 / mu1).epsilon(1e-12));
  CHECK(s.inner(e1, e1) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("sparse Laplacian apply matches the dense matrix") {
  const Index n = 17;
  Vec u = Vec::LinSpaced(n, -1.0, 2.0);
  u = u.array().sin();
  Vec out(n);
  apply_dirichlet_laplacian(u, out);
  const Vec dense = dirichlet_laplacian(n) * u;
  CHECK((out - dense).lpNorm<Eigen::Infinity>() < 1e-10 * dense.lpNorm<Eigen::Infinity>());
}

TEST_CASE("eigenvectors of the Dirichlet Laplacian") {
  const Index n = 20;
  const Mat l = dirichlet_laplacian(n);
  for (Index k : {1, 2, 7}) {
    const Vec v = laplacian_eigenvector(n, k);
    CHECK((l * v + laplacian_eigenvalue(n, k) * v).norm() < 1e-9 * laplacian_eigenvalue(n, k));
  }
}

TEST_CASE("product space norm") {
  const ProductSpace p(StateSpace::euclidean(1), StateSpace::euclidean(1));
  const Vec u = (Vec(2) << 3, 4).finished();
  CHECK(p.distance(u, Vec::Zero(2)) == 5.0);
  const Space s(p);
  CHECK(s.is_product());
  CHECK(s.dim() == 2);
  CHECK(s.norm(u) == 5.0);
}
