#include "hcarma/spaces.hpp"

#include "hcarma/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hcarma {

namespace {

std::string shape(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

void require_same_space(const Space& a, const Space& b, const char* what) {
  if (!a || !b || !a->same_as(*b)) {
    throw DimensionError(std::string(what) + ": space mismatch (" +
                         (a ? a->label : "null") + " vs " +
                         (b ? b->label : "null") + ")");
  }
}

}  // namespace

void SpaceSpec::validate() const {
  if (dim < 1) throw DimensionError("space '" + label + "': dim must be >= 1");
  if (weights.size() != dim) {
    throw DimensionError("space '" + label + "': expected " +
                         std::to_string(dim) + " weights, got " +
                         std::to_string(weights.size()));
  }
  for (Eigen::Index n = 0; n < dim; ++n) {
    if (!std::isfinite(weights[n]) || weights[n] <= 0.0) {
      throw DimensionError("space '" + label + "': weight " +
                           std::to_string(n + 1) +
                           " must be finite and positive");
    }
  }
}

bool SpaceSpec::same_as(const SpaceSpec& other) const {
  return dim == other.dim && basis == other.basis && weights == other.weights;
}

Space make_space(std::string label, Eigen::Index dim, BasisKind basis) {
  if (dim < 1) throw DimensionError("space '" + label + "': dim must be >= 1");
  return make_space(std::move(label), Eigen::VectorXd::Ones(dim), basis);
}

Space make_space(std::string label, Eigen::VectorXd weights, BasisKind basis) {
  auto s = std::make_shared<SpaceSpec>();
  s->label = std::move(label);
  s->dim = weights.size();
  s->weights = std::move(weights);
  s->basis = basis;
  s->validate();
  return s;
}

Space make_sine_space(std::string label, Eigen::Index modes) {
  return make_space(std::move(label), modes, BasisKind::sine_on_unit_interval);
}

Space make_wave_energy_space(std::string label, Eigen::Index modes) {
  if (modes < 1) throw DimensionError("space '" + label + "': dim must be >= 1");
  Eigen::VectorXd w(modes);
  for (Eigen::Index n = 0; n < modes; ++n) {
    const double k = std::numbers::pi * static_cast<double>(n + 1);
    w[n] = k * k;
  }
  return make_space(std::move(label), std::move(w),
                    BasisKind::sine_on_unit_interval);
}

Layout::Layout(Space single) : Layout(std::vector<Space>{std::move(single)}) {}

Layout::Layout(std::vector<Space> spaces) : spaces_(std::move(spaces)) {
  offsets_.reserve(spaces_.size());
  for (const auto& s : spaces_) {
    if (!s) throw DimensionError("layout: null component space");
    offsets_.push_back(dim_);
    dim_ += s->dim;
  }
  weights_.resize(dim_);
  for (std::size_t i = 0; i < spaces_.size(); ++i) {
    weights_.segment(offsets_[i], spaces_[i]->dim) = spaces_[i]->weights;
  }
}

Eigen::Index Layout::offset(std::size_t component) const {
  if (component >= spaces_.size()) {
    throw DimensionError("component index " + std::to_string(component) +
                         " out of range for layout of size " +
                         std::to_string(spaces_.size()));
  }
  return offsets_[component];
}

Eigen::Index Layout::component_dim(std::size_t component) const {
  return (*this)[component]->dim;
}

const Space& Layout::operator[](std::size_t component) const {
  if (component >= spaces_.size()) {
    throw DimensionError("component index " + std::to_string(component) +
                         " out of range for layout of size " +
                         std::to_string(spaces_.size()));
  }
  return spaces_[component];
}

Layout Layout::tail(std::size_t from) const {
  if (from > spaces_.size()) throw DimensionError("layout tail out of range");
  return Layout(std::vector<Space>(spaces_.begin() + static_cast<long>(from),
                                   spaces_.end()));
}

bool Layout::same_as(const Layout& other) const {
  if (spaces_.size() != other.spaces_.size()) return false;
  for (std::size_t i = 0; i < spaces_.size(); ++i) {
    if (!spaces_[i]->same_as(*other.spaces_[i])) return false;
  }
  return true;
}

HVector HVector::zero(Space space) {
  const auto n = space->dim;
  return HVector{std::move(space), Eigen::VectorXd::Zero(n)};
}

ProductVector ProductVector::zero(Layout layout) {
  const auto n = layout.dim();
  return ProductVector{std::move(layout), Eigen::VectorXd::Zero(n)};
}

HVector ProductVector::component(std::size_t i) const { return project(*this, i); }

LinearMap LinearMap::identity(const Layout& layout) {
  return LinearMap{layout, layout,
                   Eigen::MatrixXd::Identity(layout.dim(), layout.dim())};
}

LinearMap LinearMap::zero(const Layout& domain, const Layout& codomain) {
  return LinearMap{domain, codomain,
                   Eigen::MatrixXd::Zero(codomain.dim(), domain.dim())};
}

ProductVector LinearMap::operator()(const ProductVector& x) const {
  if (!x.layout.same_as(domain)) {
    throw DimensionError("linear map applied to a vector outside its domain");
  }
  return ProductVector{codomain, matrix * x.coords};
}

HVector LinearMap::operator()(const HVector& x) const {
  if (domain.size() != 1 || codomain.size() != 1) {
    throw DimensionError("HVector application needs single-space domain and codomain");
  }
  require_same_space(domain[0], x.space, "linear map");
  return HVector{codomain[0], matrix * x.coords};
}

double weighted_inner(const Eigen::VectorXd& weights, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v) {
  if (u.size() != weights.size() || v.size() != weights.size()) {
    throw DimensionError("inner product: coordinate length mismatch");
  }
  return (weights.array() * (u.array() * v.array())).sum();
}

double inner(const HVector& u, const HVector& v) {
  require_same_space(u.space, v.space, "inner");
  return weighted_inner(u.space->weights, u.coords, v.coords);
}

double inner(const ProductVector& x, const ProductVector& y) {
  if (!x.layout.same_as(y.layout)) {
    throw DimensionError("inner: product layout mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.layout.size(); ++i) {
    sum += inner(project(x, i), project(y, i));
  }
  return sum;
}

double norm(const HVector& u) { return std::sqrt(inner(u, u)); }
double norm(const ProductVector& x) { return std::sqrt(inner(x, x)); }

HVector project(const ProductVector& x, std::size_t i) {
  const auto off = x.layout.offset(i);
  const auto& space = x.layout[i];
  return HVector{space, x.coords.segment(off, space->dim)};
}

ProductVector inject(const HVector& x, std::size_t i, const Layout& layout) {
  require_same_space(layout[i], x.space, "inject");
  auto out = ProductVector::zero(layout);
  out.coords.segment(layout.offset(i), x.space->dim) = x.coords;
  return out;
}

Eigen::MatrixXd adjoint_matrix(const Eigen::MatrixXd& t,
                               const Eigen::VectorXd& domain_weights,
                               const Eigen::VectorXd& codomain_weights) {
  if (t.rows() != codomain_weights.size() || t.cols() != domain_weights.size()) {
    throw DimensionError("adjoint: matrix is " + shape(t.rows(), t.cols()) +
                         " but weights imply " +
                         shape(codomain_weights.size(), domain_weights.size()));
  }
  return domain_weights.cwiseInverse().asDiagonal() * t.transpose() *
         codomain_weights.asDiagonal();
}

LinearMap adjoint(const LinearMap& t) {
  return LinearMap{t.codomain, t.domain,
                   adjoint_matrix(t.matrix, t.domain.weights(),
                                  t.codomain.weights())};
}

LinearMap compose(const LinearMap& a, const LinearMap& b) {
  if (!b.codomain.same_as(a.domain)) {
    throw DimensionError("compose: codomain of the right factor is not the "
                         "domain of the left factor");
  }
  return LinearMap{b.domain, a.codomain, a.matrix * b.matrix};
}

double operator_norm(const Eigen::MatrixXd& t,
                     const Eigen::VectorXd& domain_weights,
                     const Eigen::VectorXd& codomain_weights) {
  if (t.size() == 0) return 0.0;
  const Eigen::MatrixXd scaled = codomain_weights.cwiseSqrt().asDiagonal() * t *
                                 domain_weights.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  return svd.singularValues()[0];
}

double operator_norm(const LinearMap& t) {
  return operator_norm(t.matrix, t.domain.weights(), t.codomain.weights());
}

LinearMap projection_map(const Layout& layout, std::size_t i) {
  const Layout target(layout[i]);
  auto out = LinearMap::zero(layout, target);
  out.matrix.block(0, layout.offset(i), target.dim(), target.dim()).setIdentity();
  return out;
}

LinearMap injection_map(const Layout& layout, std::size_t i) {
  const Layout source(layout[i]);
  auto out = LinearMap::zero(source, layout);
  out.matrix.block(layout.offset(i), 0, source.dim(), source.dim()).setIdentity();
  return out;
}

}  // namespace hcarma
