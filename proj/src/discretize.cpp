#include "hcarma/discretize.hpp"

#include "hcarma/errors.hpp"

#include <cmath>

namespace hcarma {

ProductVector ar1_step(const LinearMap& s_delta, const ProductVector& z,
                       const ProductVector& eps) {
  if (!s_delta.domain.same_as(z.layout) || !s_delta.codomain.same_as(eps.layout) ||
      z.coords.size() != s_delta.matrix.cols() || eps.coords.size() != s_delta.matrix.rows()) {
    throw DimensionError("ar1_step: S(delta), z and eps live on different spaces");
  }
  return ProductVector{eps.layout, ar1_kernel(s_delta.matrix, z.coords, eps.coords)};
}

Covariance innovation_covariance(const CarmaSystem& system, double delta) {
  if (!(delta > 0.0)) throw DimensionError("innovation_covariance: delta must be > 0");
  return integrated_covariance(system, LinearMap::identity(system.layout()),
                               system.noise().total_covariance(), delta);
}

Covariance first_component(const Covariance& on_state_space) {
  const Layout h1(on_state_space.space[0]);
  return Covariance{h1, on_state_space.coordinates.topLeftCorner(h1.dim(), h1.dim())};
}

std::uint64_t binomial(int n, int k) {
  if (n < 0 || n > 60) throw DimensionError("binomial: n must lie in [0, 60]");
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  // c * (n - k + i) stays below 2^64 for n <= 60 and is divisible by i.
  for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / i;
  return c;
}

FarModel far_coefficients(const BOperators& b, double delta) {
  const int p = b.order();
  if (p < 1) throw DimensionError("far_coefficients: need p >= 1");
  if (!(delta > 0.0)) throw DimensionError("far_coefficients: delta must be > 0");
  const auto n = b.space.dim();
  FarModel m;
  m.p = p;
  m.space = b.space;
  m.b = b.b;
  m.delta = delta;
  m.noise_scale = std::pow(delta, p);
  for (int q = 1; q <= p; ++q) {
    const double lead = (q % 2 == 1 ? 1.0 : -1.0) * static_cast<double>(binomial(p, q));
    Eigen::MatrixXd bt = lead * Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= q; ++k) {
      const double sign = (q - k) % 2 == 0 ? 1.0 : -1.0;
      bt += std::pow(delta, k) * sign * static_cast<double>(binomial(p - k, q - k)) * b(k);
    }
    m.b_tilde.push_back(std::move(bt));
  }
  return m;
}

Eigen::MatrixXd far_simulate(const FarModel& model, const Eigen::MatrixXd& initial,
                             const Eigen::MatrixXd& innovations, Eigen::Index steps) {
  const int p = model.p;
  const auto n = model.space.dim();
  if (initial.rows() != n || initial.cols() != p) {
    throw DimensionError("far_simulate: need " + std::to_string(p) +
                         " initial values in H_1 (columns)");
  }
  if (steps < 0 || innovations.rows() != n || innovations.cols() < steps) {
    throw DimensionError("far_simulate: need one innovation in H_1 per step");
  }
  Eigen::MatrixXd x(n, p + steps);
  x.leftCols(p) = initial;
  for (Eigen::Index i = 0; i < steps; ++i) {
    Eigen::VectorXd next = model.noise_scale * innovations.col(i);
    for (int q = 1; q <= p; ++q) next += model(q) * x.col(i + p - q);
    if (!next.allFinite() || next.norm() > 1e150) {
      throw NumericalError("far_simulate: recursion diverged at step " + std::to_string(i) +
                           " (delta=" + std::to_string(model.delta) + ")");
    }
    x.col(i + p) = next;
  }
  return x;
}

Eigen::MatrixXd far_innovations(const CompanionSystem& system,
                                const Eigen::MatrixXd& increments, double delta) {
  if (!(delta > 0.0)) throw DimensionError("far_innovations: delta must be > 0");
  const int p = system.order();
  const Eigen::MatrixXd chain = i_product(system, 2);
  if (increments.rows() != chain.cols()) {
    throw DimensionError("far_innovations: increments must live on H_" + std::to_string(p));
  }
  return chain * increments / delta;
}

Eigen::MatrixXd recover_innovations(const FarModel& model, const Eigen::MatrixXd& x) {
  const int p = model.p;
  const auto n = model.space.dim();
  if (x.rows() != n) throw DimensionError("recover_innovations: iterates must live on H_1");
  const Eigen::Index count = x.cols() - p;
  if (count <= 0) return Eigen::MatrixXd(n, 0);
  std::vector<Eigen::VectorXd> seq(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.cols(); ++i) seq[i] = x.col(i);
  const std::span<const Eigen::VectorXd> f(seq);
  Eigen::MatrixXd eps(n, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    Eigen::VectorXd v = forward_difference(f, p, ui);
    for (int q = 1; q <= p; ++q) {
      v -= std::pow(model.delta, q) * (model.b.at(q - 1) * forward_difference(f, p - q, ui));
    }
    eps.col(i) = v / model.noise_scale;
  }
  return eps;
}

}  // namespace hcarma
