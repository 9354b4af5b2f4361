#pragma once

#include <Eigen/Dense>

#include <memory>
#include <variant>

namespace monolab {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecCRef = Eigen::Ref<const Vec>;
using VecRef = Eigen::Ref<Vec>;

// Uniform interior grid of (0,1) with homogeneous Dirichlet boundary.
double mesh_width(Index grid_points);

/// Dense second-difference Dirichlet Laplacian L (negative definite), scaled by 1/h^2.
Mat dirichlet_laplacian(Index grid_points);

/// out = L u in O(n), with u_0 = u_{n+1} = 0.
void apply_dirichlet_laplacian(VecCRef u, VecRef out);

/// k-th smallest eigenvalue of -L (k is 1-based): (2/h^2)(1 - cos(k pi h)).
double laplacian_eigenvalue(Index grid_points, Index k);

/// k-th eigenvector of -L normalized in the discrete L^2 norm h * sum u_i^2.
Vec laplacian_eigenvector(Index grid_points, Index k);

enum class MetricKind { Euclidean, InverseLaplacianWeighted };

/// Finite-dimensional stand-in for the pivot Hilbert space.
///
/// Euclidean carries a quadrature weight (1 for plain R^d, the mesh width for
/// discrete L^2). InverseLaplacianWeighted realizes the discrete H^{-1} inner
/// product h * (G u, v) with G = (-L)^{-1} factorized once at construction.
/// Instances are immutable; copies share the cached weight operator.
class StateSpace {
 public:
  static StateSpace euclidean(Index dim, double weight = 1.0);
  static StateSpace discrete_l2(Index grid_points);
  static StateSpace inverse_laplacian(Index grid_points);

  Index dim() const { return dim_; }
  MetricKind metric() const { return metric_; }
  double weight() const { return weight_; }
  bool is_grid() const { return grid_; }

  /// G = (-L)^{-1}; throws for Euclidean spaces.
  const Mat& weight_operator() const;

  double inner(VecCRef u, VecCRef v) const;
  double norm_sq(VecCRef u) const;
  double norm(VecCRef u) const;
  double distance(VecCRef u, VecCRef v) const;

 private:
  StateSpace(Index dim, MetricKind metric, double weight, bool grid,
             std::shared_ptr<const Mat> g);
  void require_dim(VecCRef u) const;

  Index dim_;
  MetricKind metric_;
  double weight_;
  bool grid_;
  std::shared_ptr<const Mat> g_;
};

/// H_1 x H_2 with ((x,y),(x',y')) = (x,x')_1 + (y,y')_2. Vectors are stored
/// concatenated: the first block occupies [0, dim_1).
class ProductSpace {
 public:
  ProductSpace(StateSpace first, StateSpace second);

  const StateSpace& first() const { return first_; }
  const StateSpace& second() const { return second_; }
  Index dim() const { return first_.dim() + second_.dim(); }

  double inner(VecCRef u, VecCRef v) const;
  double norm_sq(VecCRef u) const;
  double norm(VecCRef u) const;
  double distance(VecCRef u, VecCRef v) const;

 private:
  void require_dim(VecCRef u) const;

  StateSpace first_;
  StateSpace second_;
};

/// Either a single space or a two-block product space.
class Space {
 public:
  Space(StateSpace s) : impl_(std::move(s)) {}
  Space(ProductSpace p) : impl_(std::move(p)) {}

  Index dim() const;
  double inner(VecCRef u, VecCRef v) const;
  double norm_sq(VecCRef u) const;
  double norm(VecCRef u) const;
  double distance(VecCRef u, VecCRef v) const;

  bool is_product() const { return std::holds_alternative<ProductSpace>(impl_); }
  const ProductSpace& product() const { return std::get<ProductSpace>(impl_); }
  const StateSpace& single() const { return std::get<StateSpace>(impl_); }

 private:
  std::variant<StateSpace, ProductSpace> impl_;
};

}  // namespace monolab
