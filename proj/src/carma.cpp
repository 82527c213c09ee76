#include "hcarma/carma.hpp"

#include "hcarma/discretize.hpp"
#include "hcarma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hcarma {

namespace {

std::size_t last(const Layout& layout) { return layout.size() - 1; }

Eigen::VectorXd standard_normals(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd out(n);
  for (Eigen::Index k = 0; k < n; ++k) out[k] = gauss(rng);
  return out;
}

void require_wiener_only(const CarmaSystem& system, const char* what) {
  if (system.noise().has_jumps()) {
    throw UnsupportedError(std::string(what) +
                           ": the noise has a jump component, so the law is not Gaussian");
  }
}

Eigen::VectorXd wiener_eigenvalues(const CarmaSystem& system) {
  const auto& noise = system.noise();
  if (noise.wiener) return noise.wiener->eigenvalues;
  return Eigen::VectorXd::Zero(noise.space->dim);
}

double weighted_norm(const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
  return std::sqrt(weighted_inner(w, v, v));
}

}  // namespace

CarmaSystem::CarmaSystem(CompanionSystem companion, LevyModel noise, LinearMap observation,
                         ProductVector initial_state, SemigroupOptions options)
    : semigroup_(std::move(companion), options),
      noise_(std::move(noise)),
      observation_(std::move(observation)),
      z0_(std::move(initial_state)) {
  const Layout& h = layout();
  noise_.validate();
  if (!noise_.space->same_as(*h[last(h)])) {
    throw DimensionError("carma: the noise must live on H_p (" + h[last(h)]->label + ")");
  }
  if (!observation_.domain.same_as(h)) {
    throw DimensionError("carma: the observation must be defined on the state space H");
  }
  if (observation_.matrix.rows() != observation_.codomain.dim() ||
      observation_.matrix.cols() != h.dim()) {
    throw DimensionError("carma: observation matrix shape does not match its spaces");
  }
  if (!z0_.layout.same_as(h) || z0_.coords.size() != h.dim()) {
    throw DimensionError("carma: the initial state must lie in H");
  }
  injection_ = injection_map(h, last(h)).matrix;
}

CarmaSystem CarmaSystem::car(CompanionSystem companion, LevyModel noise,
                             SemigroupOptions options) {
  const Layout h = companion.layout();
  LinearMap p1 = projection_map(h, 0);
  return CarmaSystem(std::move(companion), std::move(noise), std::move(p1),
                     ProductVector::zero(h), options);
}

CarmaSystem CarmaSystem::with_initial_state(ProductVector z0) const {
  return CarmaSystem(companion(), noise_, observation_, std::move(z0), semigroup_.options());
}

ProductVector SimulationPath::state(Eigen::Index i) const {
  return ProductVector{state_layout, states.col(i)};
}

ProductVector SimulationPath::observation(Eigen::Index i) const {
  return ProductVector{observation_layout, observations.col(i)};
}

Eigen::Index SimulationPath::index_of(double t) const {
  if (!(t >= 0.0) || dt <= 0.0) throw DimensionError("path: time must be >= 0");
  const auto i = static_cast<Eigen::Index>(std::llround(t / dt));
  if (i > steps() || std::abs(static_cast<double>(i) * dt - t) > 1e-9 * std::max(1.0, t)) {
    std::ostringstream os;
    os << "path: t=" << t << " is not a grid time of this path (dt=" << dt
       << ", steps=" << steps() << ")";
    throw DimensionError(os.str());
  }
  return i;
}

PathStepper::PathStepper(const CarmaSystem& system, double dt, InnovationScheme scheme)
    : system_(&system), dt_(dt), scheme_(scheme) {
  if (!(dt > 0.0)) throw DimensionError("simulate: dt must be > 0");
  transition_ = system.S(dt).matrix;
  if (scheme == InnovationScheme::left_point) {
    increment_map_ = transition_ * system.noise_injection();
    return;
  }
  require_wiener_only(system, "exact_gaussian innovations");
  const Eigen::MatrixXd cov = innovation_covariance(system, dt).coordinates;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw NumericalError("innovation covariance: eigensolver did not converge");
  }
  innovation_root_ =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

void PathStepper::step(Eigen::VectorXd& z, Rng& rng, Eigen::VectorXd& increment,
                       Eigen::VectorXd& innovation) const {
  if (scheme_ == InnovationScheme::left_point) {
    increment.resize(system_->noise().space->dim);
    sample_increment(system_->noise(), dt_, rng, increment);
    innovation = increment_map_ * increment;
  } else {
    innovation = innovation_root_ * standard_normals(innovation_root_.cols(), rng);
  }
  z = ar1_kernel(transition_, z, innovation);
}

Eigen::VectorXd PathStepper::terminal(Eigen::Index steps, Rng& rng) const {
  Eigen::VectorXd z = system_->initial_state().coords;
  Eigen::VectorXd inc, eps;
  for (Eigen::Index i = 0; i < steps; ++i) step(z, rng, inc, eps);
  return z;
}

namespace {

SimulationPath empty_path(const CarmaSystem& system, double dt, Eigen::Index steps,
                          InnovationScheme scheme) {
  if (steps < 0) throw DimensionError("simulate: steps must be >= 0");
  SimulationPath path;
  path.dt = dt;
  path.scheme = scheme;
  path.state_layout = system.layout();
  path.observation_layout = system.observation_space();
  path.times.resize(static_cast<std::size_t>(steps) + 1);
  for (Eigen::Index i = 0; i <= steps; ++i) path.times[i] = static_cast<double>(i) * dt;
  path.states.resize(system.layout().dim(), steps + 1);
  path.innovations.resize(system.layout().dim(), steps);
  if (scheme == InnovationScheme::left_point) {
    path.increments.resize(system.noise().space->dim, steps);
  }
  path.states.col(0) = system.initial_state().coords;
  return path;
}

}  // namespace

SimulationPath simulate_path(const CarmaSystem& system, double dt, Eigen::Index steps,
                             Rng& rng, InnovationScheme scheme) {
  const PathStepper stepper(system, dt, scheme);
  SimulationPath path = empty_path(system, dt, steps, scheme);
  Eigen::VectorXd z = path.states.col(0);
  Eigen::VectorXd inc, eps;
  for (Eigen::Index i = 0; i < steps; ++i) {
    stepper.step(z, rng, inc, eps);
    path.states.col(i + 1) = z;
    path.innovations.col(i) = eps;
    if (scheme == InnovationScheme::left_point) path.increments.col(i) = inc;
  }
  path.observations = observe(system, path);
  return path;
}

SimulationPath replay_path(const CarmaSystem& system, double dt,
                           const Eigen::MatrixXd& increments) {
  if (increments.rows() != system.noise().space->dim) {
    throw DimensionError("replay: increments must have one row per mode of H_p");
  }
  if (!(dt > 0.0)) throw DimensionError("replay: dt must be > 0");
  const Eigen::MatrixXd transition = system.S(dt).matrix;
  const Eigen::MatrixXd increment_map = transition * system.noise_injection();
  SimulationPath path =
      empty_path(system, dt, increments.cols(), InnovationScheme::left_point);
  path.increments = increments;
  Eigen::VectorXd z = path.states.col(0);
  for (Eigen::Index i = 0; i < increments.cols(); ++i) {
    const Eigen::VectorXd eps = increment_map * increments.col(i);
    z = ar1_kernel(transition, z, eps);
    path.states.col(i + 1) = z;
    path.innovations.col(i) = eps;
  }
  path.observations = observe(system, path);
  return path;
}

Eigen::MatrixXd observe(const CarmaSystem& system, const SimulationPath& path) {
  if (path.states.rows() != system.layout().dim()) {
    throw DimensionError("observe: path was simulated on another state space");
  }
  return system.observation().matrix * path.states;
}

ProductVector observe(const CarmaSystem& system, const ProductVector& z) {
  return system.observation()(z);
}

LinearMap Covariance::as_operator() const {
  return LinearMap{space, space, coordinates * space.weights().asDiagonal()};
}

double Covariance::quadratic_form(const Eigen::VectorXd& h) const {
  if (h.size() != space.dim()) throw DimensionError("covariance: probe has wrong size");
  const Eigen::VectorXd gh = space.weights().cwiseProduct(h);
  return gh.dot(coordinates * gh);
}

Covariance integrated_covariance(const CarmaSystem& system, const LinearMap& readout,
                                 const Eigen::VectorXd& q, double length) {
  const auto& noise_space = system.noise().space;
  if (q.size() != noise_space->dim) {
    throw DimensionError("covariance: expected one eigenvalue per mode of H_p");
  }
  if (!readout.domain.same_as(system.layout())) {
    throw DimensionError("covariance: readout must be defined on H");
  }
  const Eigen::VectorXd coord_var = q.cwiseQuotient(noise_space->weights);
  const Eigen::MatrixXd left = readout.matrix;
  const Eigen::MatrixXd& inject = system.noise_injection();
  const auto& sg = system.semigroup();
  Eigen::MatrixXd cov = integrate_semigroup(
      system.companion().matrix(), length, sg.options().quadrature_nodes, sg.time_scale(),
      [&](const Eigen::MatrixXd& s) -> Eigen::MatrixXd {
        const Eigen::MatrixXd m = left * s * inject;
        return m * coord_var.asDiagonal() * m.transpose();
      });
  cov = 0.5 * (cov + cov.transpose()).eval();
  return Covariance{readout.codomain, cov};
}

GaussianLaw conditional_law(const CarmaSystem& system, double s, double t,
                            const SimulationPath& path) {
  require_wiener_only(system, "conditional_law");
  if (!(t >= s)) throw DimensionError("conditional_law: need t >= s");
  const Eigen::Index i = path.index_of(s);
  const ProductVector z_s = path.state(i);
  GaussianLaw law{system.observation()(system.S(t - s)(z_s)),
                  integrated_covariance(system, system.observation(),
                                        wiener_eigenvalues(system), t - s)};
  return law;
}

GaussianLaw conditional_law(const CarmaSystem& system, double t) {
  require_wiener_only(system, "conditional_law");
  if (!(t >= 0.0)) throw DimensionError("conditional_law: need t >= 0");
  return GaussianLaw{system.observation()(system.S(t)(system.initial_state())),
                     integrated_covariance(system, system.observation(),
                                           wiener_eigenvalues(system), t)};
}

StationaryCovariance stationary_covariance(const CarmaSystem& system, double horizon,
                                           double tolerance) {
  const StabilityReport stab = stability_check(system.companion());
  if (!stab.stable) {
    std::ostringstream os;
    os << "stationary covariance needs an exponentially stable generator; spectral "
          "abscissa is "
       << stab.spectral_abscissa;
    throw UnsupportedError(os.str());
  }
  if (!(tolerance > 0.0)) throw DimensionError("stationary covariance: tolerance must be > 0");

  StationaryCovariance out;
  const double c = 0.9 * stab.spectral_abscissa;
  const Eigen::VectorXd& w = system.layout().weights();
  const Eigen::MatrixXd& gen = system.companion().matrix();
  const double span = 20.0 / std::abs(c);
  double k_const = 1.0;
  constexpr int samples = 200;
  for (int j = 1; j <= samples; ++j) {
    const double u = span * j / samples;
    k_const = std::max(k_const, operator_norm(matrix_exponential(gen * u), w, w) *
                                    std::exp(-c * u));
  }
  out.growth_constant = k_const;
  out.decay_rate = c;

  const Eigen::VectorXd q = system.noise().total_covariance();
  const double lnorm = operator_norm(system.observation());
  const double scale = lnorm * lnorm * k_const * k_const * q.sum() / (2.0 * std::abs(c));
  double needed = 0.0;
  if (scale > tolerance) needed = std::log(scale / tolerance) / (2.0 * std::abs(c));
  out.horizon = std::max(horizon, needed);
  out.tail_bound = scale * std::exp(2.0 * c * out.horizon);
  out.covariance = integrated_covariance(system, system.observation(), q, out.horizon);
  return out;
}

namespace {

std::complex<double> char_functional_from(const CarmaSystem& system, const ProductVector& z_s,
                                          double length, const Eigen::VectorXd& x) {
  const Layout& u_space = system.observation_space();
  if (x.size() != u_space.dim()) throw DimensionError("char_functional: x has wrong size");
  const Layout& h = system.layout();
  const Eigen::VectorXd gx = u_space.weights().cwiseProduct(x);
  const Eigen::VectorXd mean = system.observation().matrix * system.S(length).matrix * z_s.coords;
  const double drift = mean.dot(gx);

  // h(u) = P_p S^*(u) L^* x = G_p^{-1} P_p S(u)^T L^T G_U x.
  const Eigen::VectorXd g = system.observation().matrix.transpose() * gx;
  const Eigen::Index off = h.offset(last(h));
  const Eigen::Index np = h.component_dim(last(h));
  const Eigen::VectorXd& wp = system.noise().space->weights;
  const auto& sg = system.semigroup();
  const Eigen::MatrixXd integral = integrate_semigroup(
      system.companion().matrix(), length, sg.options().quadrature_nodes, sg.time_scale(),
      [&](const Eigen::MatrixXd& s) -> Eigen::MatrixXd {
        const Eigen::VectorXd hu =
            (s.transpose() * g).segment(off, np).cwiseQuotient(wp);
        const std::complex<double> psi = char_exponent(system.noise(), hu);
        Eigen::MatrixXd out(1, 2);
        out << psi.real(), psi.imag();
        return out;
      });
  const std::complex<double> exponent(integral(0, 0), drift + integral(0, 1));
  return std::exp(exponent);
}

}  // namespace

std::complex<double> char_functional(const CarmaSystem& system, double s, double t,
                                     const Eigen::VectorXd& x, const SimulationPath& path) {
  if (!(t >= s) || !(s >= 0.0)) throw DimensionError("char_functional: need t >= s >= 0");
  return char_functional_from(system, path.state(path.index_of(s)), t - s, x);
}

std::complex<double> char_functional(const CarmaSystem& system, double t,
                                     const Eigen::VectorXd& x) {
  if (!(t >= 0.0)) throw DimensionError("char_functional: need t >= 0");
  return char_functional_from(system, system.initial_state(), t, x);
}

SemimartingaleReport semimartingale_check(const CarmaSystem& system,
                                          const SimulationPath& path) {
  if (system.order() == 1) {
    throw UnsupportedError(
        "semimartingale check: for p=1 X does not have differentiable paths");
  }
  if (path.states.rows() != system.layout().dim()) {
    throw DimensionError("semimartingale check: path was simulated on another state space");
  }
  const Eigen::Index m = path.steps();
  const Eigen::Index n1 = system.layout().component_dim(0);
  const Eigen::VectorXd& w1 = system.layout()[0]->weights;
  const Eigen::MatrixXd transition = system.S(path.dt).matrix;
  const Eigen::MatrixXd p1c = system.companion().matrix().topRows(n1);
  const Eigen::Index d = system.layout().dim();

  SemimartingaleReport r;
  r.rebuilt.resize(n1, m + 1);
  r.derivative.resize(n1, m + 1);

  Eigen::VectorXd flow = path.states.col(0);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd integral = Eigen::VectorXd::Zero(d);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i <= m; ++i) {
    if (i > 0) {
      const Eigen::VectorXd y_next = ar1_kernel(transition, y, path.innovations.col(i - 1));
      integral += 0.5 * path.dt * (y + y_next);
      y = y_next;
      flow = ar1_kernel(transition, flow, zero);
    }
    r.rebuilt.col(i) = flow.head(n1) + p1c * integral;
    r.derivative.col(i) = p1c * (flow + y);
    const Eigen::VectorXd gap = r.rebuilt.col(i) - path.states.col(i).head(n1);
    r.max_deviation = std::max(r.max_deviation, weighted_norm(w1, gap));
  }

  double worst = 0.0;
  double scale = 0.0;
  for (Eigen::Index i = 1; i < m; ++i) {
    const Eigen::VectorXd fd =
        (path.states.col(i + 1).head(n1) - path.states.col(i - 1).head(n1)) / (2.0 * path.dt);
    worst = std::max(worst, weighted_norm(w1, r.derivative.col(i) - fd));
    scale = std::max(scale, weighted_norm(w1, r.derivative.col(i)));
  }
  r.derivative_relative_error = scale > 0.0 ? worst / scale : worst;
  return r;
}

Eigen::MatrixXd wave_exact_modewise(const Eigen::MatrixXd& increments, double dt) {
  if (!(dt > 0.0)) throw DimensionError("wave_exact_modewise: dt must be > 0");
  const Eigen::Index n = increments.rows();
  const Eigen::Index m = increments.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, m + 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double omega = std::numbers::pi * static_cast<double>(k + 1);
    for (Eigen::Index i = 1; i <= m; ++i) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        sum += std::sin(omega * static_cast<double>(i - j) * dt) / omega * increments(k, j);
      }
      out(k, i) = sum;
    }
  }
  return out;
}

WaveModewise wave_exact_modewise(Eigen::Index modes, const LevyModel& noise, double horizon,
                                 double dt, Rng& rng) {
  noise.validate();
  if (!noise.space->same_as(*make_sine_space("L2", modes))) {
    throw DimensionError("wave_exact_modewise: noise must live on L2(0,1) with " +
                         std::to_string(modes) + " sine modes");
  }
  if (!(dt > 0.0) || !(horizon >= 0.0)) {
    throw DimensionError("wave_exact_modewise: need dt > 0 and horizon >= 0");
  }
  const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
  WaveModewise out;
  out.dt = dt;
  out.increments.resize(modes, steps);
  Eigen::VectorXd inc(modes);
  for (Eigen::Index i = 0; i < steps; ++i) {
    sample_increment(noise, dt, rng, inc);
    out.increments.col(i) = inc;
  }
  out.coefficients = wave_exact_modewise(out.increments, dt);
  return out;
}

}  // namespace hcarma
