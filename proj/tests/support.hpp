#pragma once

#include "hcarma/operators.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing_support {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                     double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale);
}

inline Eigen::VectorXd random_weights(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.2, 5.0);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = u(rng);
  return w;
}

inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

// Order-p companion system over spaces of the given dimensions with random
// bounded blocks of size `scale`; I blocks are identity plus a small
// perturbation so the I products stay invertible when dims agree.
inline hcarma::CompanionSystem random_system(std::mt19937_64& rng,
                                             const std::vector<Eigen::Index>& dims,
                                             double scale = 1.0, bool weighted = false) {
  hcarma::CompanionSpec spec;
  const auto p = dims.size();
  for (std::size_t i = 0; i < p; ++i) {
    const std::string label = "H" + std::to_string(i + 1);
    spec.spaces.push_back(weighted ? hcarma::make_space(label, random_weights(rng, dims[i]))
                                   : hcarma::make_space(label, dims[i]));
  }
  for (std::size_t q = 1; q <= p; ++q) {
    spec.a_blocks.push_back(random_matrix(rng, dims[p - 1], dims[p - q], scale));
  }
  for (std::size_t q = 2; q <= p; ++q) {
    const auto rows = dims[p - q];
    const auto cols = dims[p + 1 - q];
    Eigen::MatrixXd m = random_matrix(rng, rows, cols, 0.2 * scale);
    if (rows == cols) m += Eigen::MatrixXd::Identity(rows, cols);
    spec.i_blocks.push_back(m);
  }
  return hcarma::CompanionSystem(spec);
}

// Mean and standard error of a sample.
struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(v.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace testing_support
