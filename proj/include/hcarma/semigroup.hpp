#pragma once

// The semigroup S_p(t) generated by the truncated companion matrix, by three
// independent routes:
//
//   matrix_exponential  dense exp(t C_p) (Pade scaling and squaring)
//   recursive_series    S_{p-1}^+(t) + sum_n R_{n,p}(t), nested down to
//                       S_1(t) = exp(t A_1), with the convolutions
//                       R_{n+1,p}(t) = int_0^t S_{p-1}^+(t-s) B_p R_{n,p}(s) ds
//                       done by composite Simpson on a shared grid
//   wave_closed_form    the cos / sin block operator of the wave equation,
//                       applied mode by mode

#include "hcarma/operators.hpp"
#include "hcarma/quadrature.hpp"

#include <optional>
#include <string>

namespace hcarma {

enum class SemigroupMethod { matrix_exponential, recursive_series, wave_closed_form };

struct SemigroupOptions {
  SemigroupMethod method = SemigroupMethod::matrix_exponential;
  int series_terms = 25;
  int quadrature_nodes = 64;
  // Remainder bound above which the recursive series reports a warning.
  double series_tolerance = 1e-10;
};

struct SeriesEvaluation {
  LinearMap value;
  // K e^{ct} (|B_p| tau)^{n+1} / (n+1)! on the series step tau, propagated
  // through the 2^k squarings that reach t.
  double remainder_bound = 0.0;
  int squarings = 0;
  int grid_intervals = 0;
  std::optional<std::string> warning;
};

// exp(m); NumericalError when the result overflows.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

class SemigroupEvaluator {
 public:
  explicit SemigroupEvaluator(CompanionSystem system, SemigroupOptions options = {});

  const CompanionSystem& system() const { return system_; }
  const SemigroupOptions& options() const { return options_; }
  SemigroupMethod method() const { return options_.method; }

  // S_p(t) by the configured method.
  LinearMap evaluate(double t) const;

  LinearMap evaluate_exponential(double t) const;
  SeriesEvaluation evaluate_recursive(double t) const;
  LinearMap evaluate_wave(double t) const;

  // max(1, spectral radius of C_p): the rate used to lay out quadrature grids.
  double time_scale() const { return time_scale_; }

 private:
  CompanionSystem system_;
  SemigroupOptions options_;
  double time_scale_ = 1.0;
  double spectral_abscissa_ = 0.0;
};

// True for [[0, Id], [Laplacian, 0]] on two sine spaces of equal size.
bool is_wave_system(const CompanionSystem& system);

// Closed-form wave semigroup on the given two-component layout, or on the
// default wave layout (energy space x L2) with `modes` modes.
LinearMap evaluate_wave(const Layout& layout, double t);
LinearMap evaluate_wave(Eigen::Index modes, double t);

// Composite Simpson approximation of int_0^length f(S(u)) du, where S(u) is
// the semigroup of `generator` sampled on make_grid(length, nodes, scale) by
// repeated multiplication with S(h). f maps a semigroup matrix to a matrix of
// fixed shape.
template <class F>
Eigen::MatrixXd integrate_semigroup(const Eigen::MatrixXd& generator, double length,
                                    int nodes_per_unit, double time_scale, F&& f) {
  const UniformGrid grid = make_grid(length, nodes_per_unit, time_scale);
  const Eigen::Index n = generator.rows();
  if (grid.intervals == 0) {
    const Eigen::MatrixXd probe = f(Eigen::MatrixXd::Identity(n, n));
    return Eigen::MatrixXd::Zero(probe.rows(), probe.cols());
  }
  const double h = grid.step();
  const auto w = simpson_weights(grid.intervals, h);
  const Eigen::MatrixXd step = matrix_exponential(generator * h);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd acc = w[0] * f(s);
  for (int k = 1; k <= grid.intervals; ++k) {
    s = step * s;
    acc += w[k] * f(s);
  }
  return acc;
}

}  // namespace hcarma
