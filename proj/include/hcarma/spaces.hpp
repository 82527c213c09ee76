#pragma once

// Coordinate representation of truncated separable Hilbert spaces.
//
// Every space is spanned by its first N basis elements. The Gram matrix of
// that basis is diagonal and stored as a weight sequence, so the same
// coefficient vector means the same function whatever norm the space carries
// (e.g. the energy space of the wave equation versus L2(0,1)).
//
// Component indices are 0-based: project(x, 0) is the first projection.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace hcarma {

enum class BasisKind { abstract, sine_on_unit_interval };

struct SpaceSpec {
  std::string label;
  Eigen::Index dim = 0;
  Eigen::VectorXd weights;  // Gram diagonal, all > 0
  BasisKind basis = BasisKind::abstract;

  // Throws DimensionError when dim < 1 or a weight is not finite and positive.
  void validate() const;

  // Structural equality: dimension, basis kind and weights. Labels are names
  // only, so H2 = H3 = L2(0,1) compare equal.
  bool same_as(const SpaceSpec& other) const;
};

using Space = std::shared_ptr<const SpaceSpec>;

Space make_space(std::string label, Eigen::Index dim,
                 BasisKind basis = BasisKind::abstract);
Space make_space(std::string label, Eigen::VectorXd weights,
                 BasisKind basis = BasisKind::abstract);
// L2(0,1) in the sine basis e_n(x) = sqrt(2) sin(pi n x), orthonormal.
Space make_sine_space(std::string label, Eigen::Index modes);
// Sine basis with |f|^2 = pi^2 sum n^2 <f,e_n>^2, the displacement space of
// the wave equation.
Space make_wave_energy_space(std::string label, Eigen::Index modes);

// Ordered list of component spaces H_1 x ... x H_p. A single space is a
// layout with one component.
class Layout {
 public:
  Layout() = default;
  Layout(Space single);  // NOLINT(google-explicit-constructor)
  explicit Layout(std::vector<Space> spaces);

  std::size_t size() const { return spaces_.size(); }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index offset(std::size_t component) const;
  Eigen::Index component_dim(std::size_t component) const;
  const Space& operator[](std::size_t component) const;
  const std::vector<Space>& spaces() const { return spaces_; }

  // Concatenated Gram diagonal of the product space.
  const Eigen::VectorXd& weights() const { return weights_; }

  // Components [from, size()).
  Layout tail(std::size_t from) const;

  bool same_as(const Layout& other) const;

 private:
  std::vector<Space> spaces_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd weights_;
  Eigen::Index dim_ = 0;
};

struct HVector {
  Space space;
  Eigen::VectorXd coords;

  static HVector zero(Space space);
};

// Flat storage of (x_1, ..., x_p); component(i) extracts x_{i+1}.
struct ProductVector {
  Layout layout;
  Eigen::VectorXd coords;

  static ProductVector zero(Layout layout);
  HVector component(std::size_t i) const;
};

// Bounded linear map between (product) spaces, stored as the matrix of basis
// coefficients: codomain.dim() x domain.dim().
struct LinearMap {
  Layout domain;
  Layout codomain;
  Eigen::MatrixXd matrix;

  static LinearMap identity(const Layout& layout);
  static LinearMap zero(const Layout& domain, const Layout& codomain);

  ProductVector operator()(const ProductVector& x) const;
  HVector operator()(const HVector& x) const;
};

double inner(const HVector& u, const HVector& v);
double inner(const ProductVector& x, const ProductVector& y);
double norm(const HVector& u);
double norm(const ProductVector& x);

// Raw weighted inner product sum_n w_n u_n v_n.
double weighted_inner(const Eigen::VectorXd& weights, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v);

HVector project(const ProductVector& x, std::size_t i);
ProductVector inject(const HVector& x, std::size_t i, const Layout& layout);

// T* = G_dom^{-1} T^T G_cod.
LinearMap adjoint(const LinearMap& t);
Eigen::MatrixXd adjoint_matrix(const Eigen::MatrixXd& t,
                               const Eigen::VectorXd& domain_weights,
                               const Eigen::VectorXd& codomain_weights);

// a o b, checking that b.codomain matches a.domain.
LinearMap compose(const LinearMap& a, const LinearMap& b);

// Operator norm with respect to the weighted inner products.
double operator_norm(const LinearMap& t);
double operator_norm(const Eigen::MatrixXd& t,
                     const Eigen::VectorXd& domain_weights,
                     const Eigen::VectorXd& codomain_weights);

// Matrix of P_i: H -> H_i and of P_i^*: H_i -> H.
LinearMap projection_map(const Layout& layout, std::size_t i);
LinearMap injection_map(const Layout& layout, std::size_t i);

}  // namespace hcarma
