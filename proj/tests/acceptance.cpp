// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails. argv[1] is a scratch directory.

#include "hcarma/commands.hpp"
#include "hcarma/discretize.hpp"
#include "hcarma/ensemble.hpp"

#include "support.hpp"

#include <chrono>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

using namespace hcarma;
using testing_support::moments;
using testing_support::rel_frobenius;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!cond) detail += " [x]";
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

LevyModel wiener_on(const Space& s, Eigen::VectorXd q) {
  LevyModel m;
  m.space = s;
  m.wiener = CovarianceSpec{s, std::move(q)};
  return m;
}

Eigen::VectorXd power_spectrum(Eigen::Index n, double k) {
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = std::pow(static_cast<double>(i + 1), -k);
  return q;
}

CarmaSystem wave_car(Eigen::Index n) {
  const CompanionSystem c = wave_system(n);
  return CarmaSystem::car(c, wiener_on(c.layout()[1], power_spectrum(n, 2.0)));
}

double weighted_norm(const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
  return std::sqrt(weighted_inner(w, v, v));
}

// ---------------------------------------------------------------------------

Outcome semigroup_agreement() {
  Outcome o;
  const CompanionSystem wave = wave_system(8);
  const SemigroupEvaluator expo(wave);
  double closed = 0.0;
  for (double t : {0.1, 0.7, 2.0}) {
    closed = std::max(closed, rel_frobenius(expo.evaluate(t).matrix,
                                            evaluate_wave(wave.layout(), t).matrix));
  }
  o.require(closed <= 1e-10, "exp vs closed form " + num(closed));

  SemigroupOptions rec;
  rec.method = SemigroupMethod::recursive_series;
  rec.series_terms = 25;
  rec.quadrature_nodes = 64;
  std::mt19937_64 rng(31);
  const CompanionSystem random3 = testing_support::random_system(rng, {2, 2, 2});
  for (const auto* sys : {&wave, &random3}) {
    const SemigroupEvaluator r(*sys, rec);
    const SemigroupEvaluator e(*sys);
    double worst = 0.0;
    for (double t : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
      worst = std::max(worst, rel_frobenius(r.evaluate(t).matrix, e.evaluate(t).matrix));
    }
    o.require(worst <= 1e-6, std::string(sys == &wave ? "wave" : "random p=3") +
                                 " series vs exp " + num(worst));
  }
  return o;
}

Outcome far_identity() {
  Outcome o;
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<int> u(-9, 9);
  bool symbolic = true;
  for (int trial = 0; trial < 20; ++trial) {
    BOperators b;
    b.space = Layout(make_space("H1", 3));
    for (int q = 0; q < 3; ++q) {
      Eigen::MatrixXd m(3, 3);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
      b.b.push_back(m);
    }
    const FarModel f = far_coefficients(b, 1.0);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
    symbolic = symbolic && f(1) == 3.0 * id + b(1) && f(2) == b(2) - 2.0 * b(1) - 3.0 * id &&
               f(3) == id + b(1) - b(2) + b(3) && f.noise_scale == 1.0;
  }
  o.require(symbolic, "p=3 unit-step coefficients exact");

  const CompanionSystem wave = wave_system(8);
  const Eigen::MatrixXd lap = laplacian_sine(*wave.layout()[0]);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(8, 8);
  bool wave_ok = true;
  for (double delta : {0.1, 1e-2, 1e-3}) {
    const FarModel f = far_coefficients(derive_B(wave), delta);
    wave_ok = wave_ok && f(1) == 2.0 * id && f(2) == -(id - (delta * delta) * lap) &&
              f.noise_scale == delta * delta;
  }
  o.require(wave_ok, "wave FAR(2) exact");

  double worst = 0.0;
  for (int p = 1; p <= 4; ++p) {
    for (int trial = 0; trial < 10; ++trial) {
      const CompanionSystem c =
          testing_support::random_system(rng, std::vector<Eigen::Index>(p, 3));
      const FarModel f = far_coefficients(derive_B(c), 0.1);
      const Eigen::MatrixXd eps = testing_support::random_matrix(rng, 3, 20);
      const Eigen::MatrixXd x = far_simulate(f, Eigen::MatrixXd::Zero(3, p), eps, 20);
      worst = std::max(worst, (recover_innovations(f, x) - eps).norm() / eps.norm());
    }
  }
  o.require(worst <= 1e-10, "substitution p=1..4 " + num(worst));
  return o;
}

Outcome scalar_reductions() {
  Outcome o;
  const double a = 1.5, sigma2 = 0.8;
  const CompanionSystem c1 = scalar_companion({a});
  const CarmaSystem ou =
      CarmaSystem::car(c1, wiener_on(c1.layout()[0], Eigen::VectorXd::Constant(1, sigma2)));
  const double v1 = stationary_covariance(ou).covariance.coordinates(0, 0);
  const double e1 = std::abs(v1 - sigma2 / (2.0 * a));
  o.require(e1 <= 1e-8, "p=1 " + num(e1));

  // sigma^2 int_0^inf (e_1^T exp(sC) e_2)^2 ds with exp(sC) e_2 written through the
  // characteristic roots, by composite Simpson on a fine grid.
  const double a1 = 1.2, a2 = 0.8;
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 - 4.0 * a2));
  const std::complex<double> l1 = 0.5 * (-a1 + disc), l2 = 0.5 * (-a1 - disc);
  auto g = [&](double s) { return ((std::exp(l1 * s) - std::exp(l2 * s)) / (l1 - l2)).real(); };
  const double horizon = 80.0 / std::abs(l1.real());
  const long n = 2'000'000;
  const double h = horizon / n;
  double acc = g(0.0) * g(0.0) + g(horizon) * g(horizon);
  for (long k = 1; k < n; ++k) {
    const double v = g(k * h);
    acc += (k % 2 == 1 ? 4.0 : 2.0) * v * v;
  }
  const double oracle = sigma2 * acc * h / 3.0;
  const CompanionSystem c2 = scalar_companion({a1, a2});
  const CarmaSystem car2 =
      CarmaSystem::car(c2, wiener_on(c2.layout()[1], Eigen::VectorXd::Constant(1, sigma2)));
  const double v2 = stationary_covariance(car2).covariance.coordinates(0, 0);
  const double e2 = std::abs(v2 - oracle) / oracle;
  o.require(e2 <= 1e-6, "p=2 vs quadrature " + num(e2));

  const double dt = 0.01;
  const auto steps = static_cast<Eigen::Index>(std::llround(10.0 / a / dt));
  const PathStepper stepper(ou, dt, InnovationScheme::exact_gaussian);
  const auto z = run_ensemble<double>(10000, 303, 0, [&](std::size_t, Rng& r) {
    return stepper.terminal(steps, r)[0];
  });
  const auto m = moments(z);
  double ss = 0.0;
  for (double v : z) ss += (v - m.mean) * (v - m.mean);
  const double mc = ss / static_cast<double>(z.size() - 1);
  const double e3 = std::abs(mc - sigma2 / (2.0 * a)) / (sigma2 / (2.0 * a));
  o.require(e3 <= 0.05, "Monte-Carlo variance at T=10/a " + num(e3));
  return o;
}

// Two-dimensional order-2 system with a non-zero initial state.
CarmaSystem pair_system(LevyModel noise_template, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CompanionSpec spec;
  spec.spaces = {make_space("H1", Eigen::Vector2d(1.0, 2.0)),
                 make_space("H2", Eigen::Vector2d(0.5, 1.5))};
  spec.a_blocks = {
      -3.0 * Eigen::MatrixXd::Identity(2, 2) + testing_support::random_matrix(rng, 2, 2, 0.1),
      -2.0 * Eigen::MatrixXd::Identity(2, 2) + testing_support::random_matrix(rng, 2, 2, 0.1)};
  spec.i_blocks = {Eigen::MatrixXd::Identity(2, 2)};
  const CompanionSystem c(spec);
  noise_template.space = c.layout()[1];
  if (noise_template.wiener) noise_template.wiener->space = c.layout()[1];
  return CarmaSystem::car(c, noise_template)
      .with_initial_state(ProductVector{c.layout(), Eigen::Vector4d(0.6, -0.4, 0.2, 0.3)});
}

Outcome char_functional_mc() {
  Outcome o;
  LevyModel gauss;
  gauss.wiener = CovarianceSpec{nullptr, Eigen::Vector2d(0.8, 0.4)};
  LevyModel jump;
  jump.wiener = CovarianceSpec{nullptr, Eigen::Vector2d(0.1, 0.1)};
  jump.jumps = JumpSpec{2.0, JumpLaw::two_point, Eigen::Vector2d(0.6, 0.3)};

  std::mt19937_64 probe_rng(44);
  std::vector<Eigen::VectorXd> probes;
  for (int k = 0; k < 5; ++k) probes.push_back(testing_support::random_vector(probe_rng, 2, 0.8));

  struct Case {
    const char* name;
    CarmaSystem system;
    InnovationScheme scheme;
    double dt;
  };
  const std::vector<Case> cases = {
      {"Wiener", pair_system(gauss, 41), InnovationScheme::exact_gaussian, 0.01},
      {"jump", pair_system(jump, 42), InnovationScheme::left_point, 1e-3}};
  const double t = 1.0;
  for (const auto& cs : cases) {
    const PathStepper stepper(cs.system, cs.dt, cs.scheme);
    const auto steps = static_cast<Eigen::Index>(std::llround(t / cs.dt));
    const Eigen::MatrixXd readout = cs.system.observation().matrix;
    const auto xs = run_ensemble<Eigen::VectorXd>(100000, 4242, 0, [&](std::size_t, Rng& r) {
      return Eigen::VectorXd(readout * stepper.terminal(steps, r));
    });
    const Eigen::VectorXd& w = cs.system.observation_space().weights();
    double worst = 0.0;
    for (const auto& x : probes) {
      std::vector<double> re, im;
      re.reserve(xs.size());
      im.reserve(xs.size());
      for (const auto& v : xs) {
        const double a = weighted_inner(w, v, x);
        re.push_back(std::cos(a));
        im.push_back(std::sin(a));
      }
      const auto mr = moments(re), mi = moments(im);
      const std::complex<double> cf = char_functional(cs.system, t, x);
      const double z = std::abs(std::complex<double>(mr.mean, mi.mean) - cf) /
                       std::hypot(mr.se, mi.se);
      worst = std::max(worst, z);
    }
    o.require(worst <= 3.0, std::string(cs.name) + " CAR(2) worst |gap|/SE " + num(worst));
  }
  return o;
}

Outcome semimartingale_order() {
  Outcome o;
  const CarmaSystem sys = wave_car(8);
  const Eigen::Index fine_steps = 1000;
  Rng rng(55);
  Eigen::MatrixXd fine(8, fine_steps);
  for (Eigen::Index i = 0; i < fine_steps; ++i) {
    fine.col(i) = sample_increment(sys.noise(), 1e-3, rng).coords;
  }
  std::vector<double> dev;
  for (int factor : {4, 2, 1}) {
    Eigen::MatrixXd inc = Eigen::MatrixXd::Zero(8, fine_steps / factor);
    for (Eigen::Index i = 0; i < fine_steps; ++i) inc.col(i / factor) += fine.col(i);
    const SimulationPath p = replay_path(sys, 1e-3 * factor, inc);
    dev.push_back(semimartingale_check(sys, p).max_deviation);
  }
  const double r1 = dev[0] / dev[1], r2 = dev[1] / dev[2];
  o.require(r1 >= 1.7 && r1 <= 2.3 && r2 >= 1.7 && r2 <= 2.3,
            "deviations " + num(dev[0]) + ", " + num(dev[1]) + ", " + num(dev[2]) +
                " ratios " + num(r1) + ", " + num(r2));

  const double dt = 1e-4;
  const Eigen::Index m = 10000;
  const Eigen::VectorXd sd = sys.noise().coordinate_variance().cwiseSqrt();
  Eigen::MatrixXd smooth(8, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    smooth.col(j) = dt * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) * dt) * sd;
  }
  const double derr = semimartingale_check(sys, replay_path(sys, dt, smooth)).derivative_relative_error;
  o.require(derr <= 1e-3, "derivative vs central differences " + num(derr));
  return o;
}

Outcome modewise_wave() {
  Outcome o;
  const CarmaSystem sys = wave_car(8);
  Rng a(66), b(66);
  const WaveModewise w = wave_exact_modewise(8, sys.noise(), 1.0, 1e-3, a);
  const SimulationPath p = simulate_path(sys, 1e-3, 1000, b);
  o.require(w.increments == p.increments, "shared increments");
  const double gap = (w.coefficients - observe(sys, p)).cwiseAbs().maxCoeff();
  o.require(gap <= 1e-6, "max coefficient gap " + num(gap));
  return o;
}

Outcome innovation_law() {
  Outcome o;
  const CarmaSystem sys = wave_car(8);
  const double delta = 0.01;
  const Covariance cov = innovation_covariance(sys, delta);
  Rng rng(77);
  const SimulationPath p = simulate_path(sys, delta, 10000, rng, InnovationScheme::exact_gaussian);
  const Eigen::VectorXd& w = sys.layout().weights();
  std::mt19937_64 hr(78);
  double worst_var = 0.0, worst_lag = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd h = testing_support::random_vector(hr, 16).cwiseQuotient(w.cwiseSqrt());
    std::vector<double> sq, lag;
    for (Eigen::Index i = 0; i < p.steps(); ++i) {
      const double v = weighted_inner(w, p.innovations.col(i), h);
      sq.push_back(v * v);
      if (i > 0) lag.push_back(v * weighted_inner(w, p.innovations.col(i - 1), h));
    }
    const auto ms = moments(sq), ml = moments(lag);
    worst_var = std::max(worst_var, std::abs(ms.mean - cov.quadratic_form(h)) / ms.se);
    worst_lag = std::max(worst_lag, std::abs(ml.mean) / ml.se);
  }
  o.require(worst_var <= 3.0, "covariance worst |gap|/SE " + num(worst_var));
  o.require(worst_lag <= 3.0, "lag-1 worst |corr|/SE " + num(worst_lag));
  return o;
}

Outcome determinism(const fs::path& work) {
  Outcome o;
  Scenario s = load_scenario((fs::path(HCARMA_SCENARIO_DIR) / "wave.json").string());
  s.run.paths = 8;
  s.run.T = 0.2;
  std::ostringstream err;
  const fs::path a = work / "run_a", b = work / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const int ca = cmd_simulate(s, a, 1, err);
  const int cb = cmd_simulate(s, b, 4, err);
  o.require(ca == kExitOk && cb == kExitOk, "exit codes " + std::to_string(ca) + ", " +
                                                std::to_string(cb));
  auto slurp = [](const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string csv_a = slurp(a / "paths.csv"), csv_b = slurp(b / "paths.csv");
  o.require(!csv_a.empty() && csv_a == csv_b, "paths.csv identical (" +
                                                  std::to_string(csv_a.size()) + " bytes)");
  o.require(slurp(a / "manifest.json") == slurp(b / "manifest.json"), "manifest identical");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "hcarma_acceptance";
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"semigroup three-way agreement", semigroup_agreement},
      {"FAR coefficient identity", far_identity},
      {"scalar reductions", scalar_reductions},
      {"characteristic functional", char_functional_mc},
      {"semimartingale identity", semimartingale_order},
      {"mode-wise wave representation", modewise_wave},
      {"innovation law", innovation_law},
      {"determinism", [&] { return determinism(work); }},
  };

  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.ok) ++failures;
    std::cout << (out.ok ? "PASS" : "FAIL") << " [" << index << "] " << name << ": "
              << out.detail << " (" << num(secs) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
