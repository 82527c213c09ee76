#pragma once

// The state process Z(t) = S(t) Z0 + int_0^t S(t-s) P_p^* dL(s) on
// H = H_1 x ... x H_p, its observation X(t) = L_U Z(t), and the laws and
// pathwise identities built on them.
//
// Observations live on the layout `observation.codomain` (U). For the CAR(p)
// readout that is H_1 alone.

#include "hcarma/noise.hpp"
#include "hcarma/semigroup.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hcarma {

class CarmaSystem {
 public:
  // Checks that the noise lives on H_p, the observation starts from H and the
  // initial state lies in H.
  CarmaSystem(CompanionSystem companion, LevyModel noise, LinearMap observation,
              ProductVector initial_state, SemigroupOptions options = {});

  // CAR(p): observation P_1, zero initial state unless given.
  static CarmaSystem car(CompanionSystem companion, LevyModel noise,
                         SemigroupOptions options = {});

  const CompanionSystem& companion() const { return semigroup_.system(); }
  const Layout& layout() const { return companion().layout(); }
  int order() const { return companion().order(); }
  const LevyModel& noise() const { return noise_; }
  const LinearMap& observation() const { return observation_; }
  const Layout& observation_space() const { return observation_.codomain; }
  const ProductVector& initial_state() const { return z0_; }
  const SemigroupEvaluator& semigroup() const { return semigroup_; }

  LinearMap S(double t) const { return semigroup_.evaluate(t); }
  // Matrix of P_p^* : H_p -> H.
  const Eigen::MatrixXd& noise_injection() const { return injection_; }

  CarmaSystem with_initial_state(ProductVector z0) const;

 private:
  SemigroupEvaluator semigroup_;
  LevyModel noise_;
  LinearMap observation_;
  ProductVector z0_;
  Eigen::MatrixXd injection_;
};

enum class InnovationScheme {
  left_point,      // eps_i = S(dt) P_p^* dL_i
  exact_gaussian,  // eps_i ~ N(0, Q_eps), Wiener noise only
};

struct SimulationPath {
  double dt = 0.0;
  InnovationScheme scheme = InnovationScheme::left_point;
  std::vector<double> times;     // t_i = i dt, i = 0..M
  Eigen::MatrixXd states;        // column i: Z(t_i)
  Eigen::MatrixXd observations;  // column i: X(t_i)
  Eigen::MatrixXd increments;    // column i: dL_i on H_p (left_point only)
  Eigen::MatrixXd innovations;   // column i: eps_i on H
  Layout state_layout;
  Layout observation_layout;

  Eigen::Index steps() const { return innovations.cols(); }
  ProductVector state(Eigen::Index i) const;
  ProductVector observation(Eigen::Index i) const;
  // Index i with t_i = t; DimensionError when t is not a grid time.
  Eigen::Index index_of(double t) const;
};

// One-step propagator shared by path simulation and terminal-state ensembles.
class PathStepper {
 public:
  PathStepper(const CarmaSystem& system, double dt, InnovationScheme scheme);

  double dt() const { return dt_; }
  InnovationScheme scheme() const { return scheme_; }
  const Eigen::MatrixXd& transition() const { return transition_; }

  // z <- S(dt) z + eps. The increment is written for left_point only.
  void step(Eigen::VectorXd& z, Rng& rng, Eigen::VectorXd& increment,
            Eigen::VectorXd& innovation) const;

  // Z(steps * dt) started from the system's initial state.
  Eigen::VectorXd terminal(Eigen::Index steps, Rng& rng) const;

 private:
  const CarmaSystem* system_;
  double dt_;
  InnovationScheme scheme_;
  Eigen::MatrixXd transition_;       // S(dt)
  Eigen::MatrixXd increment_map_;    // S(dt) P_p^*
  Eigen::MatrixXd innovation_root_;  // R with R R^T = coordinate cov of eps
};

SimulationPath simulate_path(const CarmaSystem& system, double dt, Eigen::Index steps,
                             Rng& rng,
                             InnovationScheme scheme = InnovationScheme::left_point);

// Left-point path driven by the given increments (column i = dL_i).
SimulationPath replay_path(const CarmaSystem& system, double dt,
                           const Eigen::MatrixXd& increments);

// X(t_i) = L_U Z(t_i), column-wise.
Eigen::MatrixXd observe(const CarmaSystem& system, const SimulationPath& path);
ProductVector observe(const CarmaSystem& system, const ProductVector& z);

// Covariance of a U-valued random vector in both forms: the coordinate
// covariance E[x x^T] and the covariance operator on U, whose matrix is
// coordinates * Gram.
struct Covariance {
  Layout space;
  Eigen::MatrixXd coordinates;

  LinearMap as_operator() const;
  // <Cov h, h>_U for h in U.
  double quadratic_form(const Eigen::VectorXd& h) const;
};

struct GaussianLaw {
  ProductVector mean;
  Covariance covariance;
};

// int_0^length R S(u) P_p^* Q P_p S^*(u) R^* du for the operator Q with
// eigenvalues q and a readout R from H, by composite Simpson.
Covariance integrated_covariance(const CarmaSystem& system, const LinearMap& readout,
                                 const Eigen::VectorXd& q, double length);

// Law of X(t) given F_s, with Z(s) read off the path. Wiener noise only.
GaussianLaw conditional_law(const CarmaSystem& system, double s, double t,
                            const SimulationPath& path);
// s = 0: conditioning on the initial state alone.
GaussianLaw conditional_law(const CarmaSystem& system, double t);

struct StationaryCovariance {
  Covariance covariance;
  double horizon = 0.0;
  double tail_bound = 0.0;
  double growth_constant = 0.0;  // K
  double decay_rate = 0.0;       // c < 0
};

// Refuses (UnsupportedError) unless the generator is exponentially stable.
// The horizon is raised until the tail bound meets `tolerance`.
StationaryCovariance stationary_covariance(const CarmaSystem& system, double horizon = 0.0,
                                           double tolerance = 1e-10);

// E[exp(i <X(t), x>_U) | F_s].
std::complex<double> char_functional(const CarmaSystem& system, double s, double t,
                                     const Eigen::VectorXd& x, const SimulationPath& path);
std::complex<double> char_functional(const CarmaSystem& system, double t,
                                     const Eigen::VectorXd& x);

struct SemimartingaleReport {
  double max_deviation = 0.0;             // max_i |X_rebuilt(t_i) - X(t_i)|_1
  double derivative_relative_error = 0.0; // formula vs central differences
  Eigen::MatrixXd rebuilt;                // column i: X_rebuilt(t_i)
  Eigen::MatrixXd derivative;             // column i: X'(t_i) by the formula
};

// X = P_1 Z rebuilt from P_1 S(t) Z0 + P_1 C int_0^t Y(u) du with Y the
// replayed stochastic convolution and the time integral by trapezoid.
SemimartingaleReport semimartingale_check(const CarmaSystem& system,
                                          const SimulationPath& path);

struct WaveModewise {
  double dt = 0.0;
  Eigen::MatrixXd increments;    // N x M
  Eigen::MatrixXd coefficients;  // N x (M+1), column i: X(t_i) in the sine basis
};

// sum_{m<i} sin(pi n (t_i - t_m)) / (pi n) dl_n(t_m), mode by mode.
Eigen::MatrixXd wave_exact_modewise(const Eigen::MatrixXd& increments, double dt);
// Draws the increments exactly as simulate_path does for a left_point run.
WaveModewise wave_exact_modewise(Eigen::Index modes, const LevyModel& noise, double horizon,
                                 double dt, Rng& rng);

}  // namespace hcarma
