#include "monolab/spaces.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace monolab {

double mesh_width(Index grid_points) {
  if (grid_points < 1) throw std::invalid_argument("grid_points must be positive");
  return 1.0 / static_cast<double>(grid_points + 1);
}

Mat dirichlet_laplacian(Index n) {
  const double h = mesh_width(n);
  const double s = 1.0 / (h * h);
  Mat l = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    l(i, i) = -2.0 * s;
    if (i > 0) l(i, i - 1) = s;
    if (i + 1 < n) l(i, i + 1) = s;
  }
  return l;
}

void apply_dirichlet_laplacian(VecCRef u, VecRef out) {
  const Index n = u.size();
  const double h = mesh_width(n);
  const double s = 1.0 / (h * h);
  for (Index i = 0; i < n; ++i) {
    const double left = i > 0 ? u[i - 1] : 0.0;
    const double right = i + 1 < n ? u[i + 1] : 0.0;
    out[i] = s * (left - 2.0 * u[i] + right);
  }
}

double laplacian_eigenvalue(Index n, Index k) {
  const double h = mesh_width(n);
  return (2.0 / (h * h)) * (1.0 - std::cos(static_cast<double>(k) * std::numbers::pi * h));
}

Vec laplacian_eigenvector(Index n, Index k) {
  const double h = mesh_width(n);
  Vec e(n);
  for (Index i = 0; i < n; ++i) {
    e[i] = std::sin(static_cast<double>(k) * std::numbers::pi * h * static_cast<double>(i + 1));
  }
  return e / std::sqrt(h * e.squaredNorm());
}

StateSpace::StateSpace(Index dim, MetricKind metric, double weight, bool grid,
                       std::shared_ptr<const Mat> g)
    : dim_(dim), metric_(metric), weight_(weight), grid_(grid), g_(std::move(g)) {}

StateSpace StateSpace::euclidean(Index dim, double weight) {
  if (dim < 1) throw std::invalid_argument("space dimension must be positive");
  if (!(weight > 0.0)) throw std::invalid_argument("quadrature weight must be positive");
  return StateSpace(dim, MetricKind::Euclidean, weight, false, nullptr);
}

StateSpace StateSpace::discrete_l2(Index grid_points) {
  StateSpace s = euclidean(grid_points, mesh_width(grid_points));
  s.grid_ = true;
  return s;
}

StateSpace StateSpace::inverse_laplacian(Index grid_points) {
  if (grid_points < 1 || grid_points > 256) {
    throw std::invalid_argument("inverse-Laplacian space supports 1..256 grid points");
  }
  const Mat neg_l = -dirichlet_laplacian(grid_points);
  Eigen::LLT<Mat> llt(neg_l);
  if (llt.info() != Eigen::Success) throw std::runtime_error("-L is not positive definite");
  Mat g = llt.solve(Mat::Identity(grid_points, grid_points));
  g = 0.5 * (g + g.transpose()).eval();
  return StateSpace(grid_points, MetricKind::InverseLaplacianWeighted, mesh_width(grid_points), true,
                    std::make_shared<const Mat>(std::move(g)));
}

const Mat& StateSpace::weight_operator() const {
  if (!g_) throw std::logic_error("Euclidean space has no weight operator");
  return *g_;
}

void StateSpace::require_dim(VecCRef u) const {
  if (u.size() != dim_) {
    throw std::invalid_argument("dimension mismatch: expected " + std::to_string(dim_) + ", got " +
                                std::to_string(u.size()));
  }
}

double StateSpace::inner(VecCRef u, VecCRef v) const {
  require_dim(u);
  require_dim(v);
  if (metric_ == MetricKind::Euclidean) return weight_ * u.dot(v);
  return weight_ * (*g_ * u).dot(v);
}

double StateSpace::norm_sq(VecCRef u) const {
  require_dim(u);
  if (metric_ == MetricKind::Euclidean) return weight_ * u.squaredNorm();
  return weight_ * u.dot(*g_ * u);
}

double StateSpace::norm(VecCRef u) const { return std::sqrt(norm_sq(u)); }

double StateSpace::distance(VecCRef u, VecCRef v) const {
  require_dim(u);
  require_dim(v);
  if (metric_ == MetricKind::Euclidean) return std::sqrt(weight_ * (u - v).squaredNorm());
  const Vec d = u - v;
  return std::sqrt(std::max(0.0, weight_ * d.dot(*g_ * d)));
}

ProductSpace::ProductSpace(StateSpace first, StateSpace second)
    : first_(std::move(first)), second_(std::move(second)) {}

void ProductSpace::require_dim(VecCRef u) const {
  if (u.size() != dim()) {
    throw std::invalid_argument("dimension mismatch: expected " + std::to_string(dim()) + ", got " +
                                std::to_string(u.size()));
  }
}

double ProductSpace::inner(VecCRef u, VecCRef v) const {
  require_dim(u);
  require_dim(v);
  const Index n1 = first_.dim();
  const Index n2 = second_.dim();
  return first_.inner(u.head(n1), v.head(n1)) + second_.inner(u.tail(n2), v.tail(n2));
}

double ProductSpace::norm_sq(VecCRef u) const {
  require_dim(u);
  return first_.norm_sq(u.head(first_.dim())) + second_.norm_sq(u.tail(second_.dim()));
}

double ProductSpace::norm(VecCRef u) const { return std::sqrt(norm_sq(u)); }

double ProductSpace::distance(VecCRef u, VecCRef v) const {
  require_dim(u);
  require_dim(v);
  const Index n1 = first_.dim();
  const Index n2 = second_.dim();
  const double d1 = first_.distance(u.head(n1), v.head(n1));
  const double d2 = second_.distance(u.tail(n2), v.tail(n2));
  return std::sqrt(d1 * d1 + d2 * d2);
}

Index Space::dim() const {
  return std::visit([](const auto& s) { return s.dim(); }, impl_);
}

double Space::inner(VecCRef u, VecCRef v) const {
  return std::visit([&](const auto& s) { return s.inner(u, v); }, impl_);
}

double Space::norm_sq(VecCRef u) const {
  return std::visit([&](const auto& s) { return s.norm_sq(u); }, impl_);
}

double Space::norm(VecCRef u) const {
  return std::visit([&](const auto& s) { return s.norm(u); }, impl_);
}

double Space::distance(VecCRef u, VecCRef v) const {
  return std::visit([&](const auto& s) { return s.distance(u, v); }, impl_);
}

}  // namespace monolab
