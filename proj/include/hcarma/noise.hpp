#pragma once

// Zero-mean square-integrable Levy noise on a truncated space: a Q-Wiener
// part plus an optional compensated compound-Poisson part.
//
// Covariances are diagonal in the basis. The covariance operator Q has
// eigenvalues q_n, so <Q h, h> = sum_n q_n w_n h_n^2. With Gram weights w_n
// the coordinate l_n = <L, e_n> / w_n then has variance q_n t / w_n, which is
// q_n t on an orthonormal basis. Jump variances v_n follow the same rule.

#include "hcarma/spaces.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace hcarma {

using Rng = std::mt19937_64;

// Path i of an ensemble with base seed b draws from Rng(b + i).
inline Rng path_rng(std::uint64_t base_seed, std::uint64_t path_index) {
  return Rng(base_seed + path_index);
}

struct CovarianceSpec {
  Space space;
  Eigen::VectorXd eigenvalues;  // q_n >= 0

  void validate() const;
  double trace() const { return eigenvalues.sum(); }
  // Matrix of Q in the basis.
  Eigen::MatrixXd operator_matrix() const { return eigenvalues.asDiagonal(); }
};

enum class JumpLaw { two_point, gaussian };

struct JumpSpec {
  double rate = 0.0;          // lambda, jumps per unit time
  JumpLaw law = JumpLaw::two_point;
  Eigen::VectorXd variances;  // v_n; two-point jumps are +-sqrt(v_n / w_n) per mode
};

struct LevyModel {
  Space space;
  std::optional<CovarianceSpec> wiener;
  std::optional<JumpSpec> jumps;
  std::uint64_t seed = 0;

  void validate() const;
  bool has_jumps() const { return jumps.has_value() && jumps->rate > 0.0; }
  // Eigenvalues q_n + lambda v_n of the covariance operator of L(1).
  Eigen::VectorXd total_covariance() const;
  // Coordinate variances of L(1): total_covariance / w.
  Eigen::VectorXd coordinate_variance() const;
  // Coordinate variances of the Gaussian part only.
  Eigen::VectorXd wiener_coordinate_variance() const;
};

// One draw of L(dt); the generator state advances.
HVector sample_increment(const LevyModel& model, double dt, Rng& rng);
void sample_increment(const LevyModel& model, double dt, Rng& rng,
                      Eigen::Ref<Eigen::VectorXd> out);

// psi_L(h) with log E exp(i <h, L(t)>) = t psi_L(h).
std::complex<double> char_exponent(const LevyModel& model, const HVector& h);
std::complex<double> char_exponent(const LevyModel& model, const Eigen::VectorXd& h);

// Scalar mode paths l_n(t_i) = coordinate n of L(t_i); row n, column i.
struct ModePaths {
  Space space;
  Eigen::MatrixXd modes;

  Eigen::VectorXd mode(Eigen::Index n) const { return modes.row(n).transpose(); }
};

ModePaths mode_decompose(const std::vector<HVector>& path);
// sum_n l_n(t_i) e_n for every i.
std::vector<HVector> mode_reconstruct(const ModePaths& modes);

// Pointwise value sum_n c_n sqrt(2) sin(pi n x) of a sine-basis vector.
double sine_field_value(const HVector& f, double x);

// Running sums L(t_i) = sum_{j<i} dL_j with L(0) = 0; increments column-wise.
Eigen::MatrixXd cumulative_path(const Eigen::MatrixXd& increments);

}  // namespace hcarma
