#pragma once

// Sampling Z on a grid of step delta gives the AR(1) recursion
// z_{i+1} = S(delta) z_i + eps_i. Replacing derivatives by forward differences
// in the p-th order equation for X = P_1 Z gives the FAR(p) recursion
//
//   x_{i+p} = sum_q Bt_q x_{i+p-q} + delta^p eps_i,
//   Bt_q = (-1)^{q+1} C(p,q) Id + sum_{k<=q} delta^k B_k (-1)^{q-k} C(p-k, q-k),
//
// with eps_i = I_p ... I_2 (L(t_{i+1}) - L(t_i)) / delta.

#include "hcarma/carma.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcarma {

// S z + eps, evaluated the same way everywhere the recursion is run.
inline Eigen::VectorXd ar1_kernel(const Eigen::MatrixXd& s, const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& eps) {
  Eigen::VectorXd out = s * z;
  out += eps;
  return out;
}

ProductVector ar1_step(const LinearMap& s_delta, const ProductVector& z,
                       const ProductVector& eps);

// Covariance on H of eps = int_0^delta S(delta-s) P_p^* dL(s), by Simpson.
Covariance innovation_covariance(const CarmaSystem& system, double delta);
// Its compression P_1 Q_eps P_1^* to H_1.
Covariance first_component(const Covariance& on_state_space);

// Exact C(n, k); DimensionError beyond n = 60.
std::uint64_t binomial(int n, int k);

// sum_{k=0}^n C(n,k) (-1)^k f[i + n - k]. T needs + and scalar *.
template <class T>
T forward_difference(std::span<const T> f, int n, std::size_t i) {
  if (n < 0) throw std::invalid_argument("forward_difference: negative order");
  if (i + static_cast<std::size_t>(n) >= f.size()) {
    throw std::out_of_range("forward_difference: index " + std::to_string(i) + " + order " +
                            std::to_string(n) + " past the end of " +
                            std::to_string(f.size()) + " samples");
  }
  T acc = f[i + n] * 0.0;
  for (int k = 0; k <= n; ++k) {
    const double c = static_cast<double>(binomial(n, k)) * (k % 2 == 0 ? 1.0 : -1.0);
    acc = acc + f[i + n - k] * c;
  }
  return acc;
}

struct FarModel {
  int p = 0;
  Layout space;                          // H_1
  std::vector<Eigen::MatrixXd> b_tilde;  // b_tilde[q-1] = Bt_q
  std::vector<Eigen::MatrixXd> b;        // the B_q it was built from
  double delta = 0.0;
  double noise_scale = 0.0;              // delta^p

  const Eigen::MatrixXd& operator()(int q) const { return b_tilde.at(q - 1); }
};

FarModel far_coefficients(const BOperators& b, double delta);

// Columns x_0 .. x_{p-1} of `initial` followed by `steps` iterates.
// NumericalError when the recursion overflows.
Eigen::MatrixXd far_simulate(const FarModel& model, const Eigen::MatrixXd& initial,
                             const Eigen::MatrixXd& innovations, Eigen::Index steps);

// eps_i = I_p ... I_2 dL_i / delta for increments stored column-wise.
Eigen::MatrixXd far_innovations(const CompanionSystem& system,
                                const Eigen::MatrixXd& increments, double delta);

// Q_p(Delta/delta) x_i for every i with i + p inside the sequence:
// (Delta^p x_i - sum_q delta^q B_q Delta^{p-q} x_i) / delta^p.
Eigen::MatrixXd recover_innovations(const FarModel& model, const Eigen::MatrixXd& x);

}  // namespace hcarma
