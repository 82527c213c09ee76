#include "hcarma/commands.hpp"

#include "hcarma/discretize.hpp"
#include "hcarma/ensemble.hpp"
#include "hcarma/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <unistd.h>

namespace hcarma {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomic(const fs::path& path, const std::string& body) {
  const fs::path tmp =
      path.parent_path() / (path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << body;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw ValidationError("--out: output directory required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ValidationError("--out: cannot create directory " + dir.string());
  }
}

std::string short_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double relative_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& reference) {
  return (a - reference).norm() / std::max(reference.norm(), 1e-300);
}

}  // namespace

int cmd_simulate(const Scenario& scenario, const fs::path& out_dir, unsigned threads,
                 std::ostream& err) {
  ensure_dir(out_dir);
  const CarmaSystem system = build_system(scenario);
  const Eigen::Index steps = run_steps(scenario);
  const Eigen::Index burn = burn_in_steps(scenario);
  const double dt = scenario.run.dt;
  const PathStepper stepper(system, dt, innovation_scheme(scenario));
  const Eigen::MatrixXd& readout = system.observation().matrix;
  const std::uint64_t seed = scenario.noise.seed;

  const auto chunks = run_ensemble<std::string>(
      scenario.run.paths, seed, threads, [&](std::size_t path_id, Rng& rng) {
        Eigen::VectorXd z = system.initial_state().coords;
        Eigen::VectorXd inc, eps;
        for (Eigen::Index i = 0; i < burn; ++i) stepper.step(z, rng, inc, eps);
        std::string text;
        const std::string id = std::to_string(path_id);
        for (Eigen::Index i = 0; i <= steps; ++i) {
          if (i > 0) stepper.step(z, rng, inc, eps);
          if (!z.allFinite()) {
            throw NumericalError("simulate: state overflowed on path " + id + " at step " +
                                 std::to_string(i));
          }
          const Eigen::VectorXd x = readout * z;
          text += id;
          text += ',';
          text += format_number(static_cast<double>(i) * dt);
          for (Eigen::Index k = 0; k < x.size(); ++k) {
            text += ',';
            text += format_number(x[k]);
          }
          text += '\n';
        }
        return text;
      });

  std::string csv = "path_id,t";
  for (Eigen::Index k = 0; k < system.observation_space().dim(); ++k) {
    csv += ",x_" + std::to_string(k + 1);
  }
  csv += '\n';
  for (const auto& c : chunks) csv += c;
  write_atomic(out_dir / "paths.csv", csv);

  json manifest;
  manifest["scenario_name"] = scenario.name;
  manifest["config_hash"] = config_hash(scenario);
  manifest["base_seed"] = seed;
  manifest["path_count"] = scenario.run.paths;
  manifest["tool_version"] = kToolVersion;
  json seeds = json::array();
  for (std::uint64_t i = 0; i < scenario.run.paths; ++i) seeds.push_back(seed + i);
  manifest["path_seeds"] = seeds;
  write_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
  err << "wrote " << scenario.run.paths << " paths to " << (out_dir / "paths.csv").string()
      << "\n";
  return kExitOk;
}

int cmd_analyze(const Scenario& scenario, const fs::path& out_dir, unsigned /*threads*/,
                std::ostream& err) {
  ensure_dir(out_dir);
  const CarmaSystem system = build_system(scenario);
  json report;
  report["scenario_name"] = scenario.name;
  report["config_hash"] = config_hash(scenario);

  const StabilityReport stab = stability_check(system.companion());
  json eig = json::array();
  for (const auto& ev : stab.eigenvalues) eig.push_back({ev.real(), ev.imag()});
  report["eigenvalues"] = eig;
  report["stability"] = {{"stable", stab.stable},
                         {"spectral_abscissa", stab.spectral_abscissa}};

  if (stab.stable) {
    const StationaryCovariance sc = stationary_covariance(system);
    report["stationary"] = {{"available", true},
                            {"horizon", sc.horizon},
                            {"tail_bound", sc.tail_bound},
                            {"variance", vector_json(sc.covariance.coordinates.diagonal())},
                            {"covariance", matrix_json(sc.covariance.coordinates)},
                            {"operator", matrix_json(sc.covariance.as_operator().matrix)}};
  } else {
    std::ostringstream os;
    os << "generator is not exponentially stable (spectral abscissa "
       << format_number(stab.spectral_abscissa) << ")";
    report["stationary"] = {{"available", false}, {"reason", os.str()}};
  }

  const Covariance q_eps = innovation_covariance(system, scenario.run.dt);
  report["innovation_covariance"] = {
      {"delta", scenario.run.dt},
      {"state", matrix_json(q_eps.coordinates)},
      {"first_component", matrix_json(first_component(q_eps).coordinates)}};

  const double t = scenario.run.T;
  if (system.noise().has_jumps()) {
    report["conditional_law"] = {{"available", false},
                                 {"reason", "jump noise: the law of X(t) is not Gaussian"}};
  } else {
    const GaussianLaw law = conditional_law(system, t);
    report["conditional_law"] = {{"available", true},
                                 {"s", 0.0},
                                 {"t", t},
                                 {"mean", vector_json(law.mean.coords)},
                                 {"covariance", matrix_json(law.covariance.coordinates)}};
  }

  json cf = json::array();
  for (const auto& x : probe_vectors(scenario, system)) {
    const auto v = char_functional(system, t, x);
    cf.push_back({{"probe", vector_json(x)}, {"s", 0.0}, {"t", t}, {"re", v.real()},
                  {"im", v.imag()}});
  }
  report["char_functional"] = cf;

  write_atomic(out_dir / "analysis.json", report.dump(2) + "\n");
  err << "wrote " << (out_dir / "analysis.json").string() << "\n";
  return kExitOk;
}

namespace {

enum class Status { pass, fail, skip };

struct CheckResult {
  std::string name;
  Status status = Status::pass;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string note;
};

CheckResult compare(std::string name, double measured, double tolerance, std::string note = {}) {
  return {std::move(name), measured <= tolerance ? Status::pass : Status::fail, measured,
          tolerance, std::move(note)};
}

CheckResult skipped(std::string name, std::string why) {
  return {std::move(name), Status::skip, 0.0, 0.0, std::move(why)};
}

std::vector<CheckResult> semigroup_checks(const CarmaSystem& system) {
  std::vector<CheckResult> out;
  const CompanionSystem& comp = system.companion();
  SemigroupOptions base = system.semigroup().options();
  base.method = SemigroupMethod::matrix_exponential;
  const SemigroupEvaluator expo(comp, base);

  {
    const double s = 0.2, t = 0.3;
    const Eigen::MatrixXd lhs = expo.evaluate(s).matrix * expo.evaluate(t).matrix;
    out.push_back(compare("semigroup law S(0.2)S(0.3) = S(0.5)",
                          relative_frobenius(lhs, expo.evaluate(s + t).matrix), 1e-8));
  }
  {
    SemigroupOptions opts = base;
    opts.method = SemigroupMethod::recursive_series;
    const SemigroupEvaluator series(comp, opts);
    const double t = 0.3;
    const SeriesEvaluation ev = series.evaluate_recursive(t);
    const double dev = relative_frobenius(ev.value.matrix, expo.evaluate(t).matrix);
    CheckResult r = compare("recursive series vs matrix exponential at t=0.3", dev, 1e-6);
    r.note = "remainder bound " + short_number(ev.remainder_bound);
    if (ev.warning) {
      r.status = Status::fail;
      r.note = *ev.warning;
    }
    out.push_back(r);
  }
  if (is_wave_system(comp)) {
    double worst = 0.0;
    for (const double t : {0.1, 0.7, 2.0}) {
      worst = std::max(worst, relative_frobenius(evaluate_wave(comp.layout(), t).matrix,
                                                 expo.evaluate(t).matrix));
    }
    out.push_back(compare("wave closed form vs matrix exponential at t=0.1,0.7,2", worst, 1e-10));
  } else {
    out.push_back(skipped("wave closed form vs matrix exponential", "not a wave system"));
  }
  return out;
}

std::vector<CheckResult> pathwise_checks(const Scenario& scenario, const CarmaSystem& system) {
  std::vector<CheckResult> out;
  if (system.order() == 1) {
    out.push_back(skipped("semimartingale identity", "skipped (p=1)"));
    out.push_back(skipped("derivative formula", "skipped (p=1)"));
    return out;
  }
  const Eigen::Index n1 = system.layout().component_dim(0);
  const Eigen::VectorXd& w1 = system.layout()[0]->weights;
  {
    Rng rng = path_rng(scenario.noise.seed, 0);
    const double dt = scenario.run.dt;
    const SimulationPath path =
        simulate_path(system, dt, run_steps(scenario), rng, InnovationScheme::left_point);
    const SemimartingaleReport rep = semimartingale_check(system, path);
    double scale = 0.0;
    for (Eigen::Index i = 0; i <= path.steps(); ++i) {
      const Eigen::VectorXd x = path.states.col(i).head(n1);
      const Eigen::VectorXd d = rep.derivative.col(i);
      scale = std::max({scale, std::sqrt(weighted_inner(w1, x, x)),
                        std::sqrt(weighted_inner(w1, d, d))});
    }
    out.push_back(compare("semimartingale identity (max deviation)", rep.max_deviation,
                          10.0 * dt * scale, "path scale " + short_number(scale)));
  }
  {
    const double dt = 1e-4;
    const double horizon = std::min(std::max(scenario.run.T, 0.1), 0.5);
    const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
    const Eigen::VectorXd amp = system.noise().coordinate_variance().cwiseSqrt();
    Eigen::MatrixXd inc(amp.size(), steps);
    for (Eigen::Index j = 0; j < steps; ++j) {
      inc.col(j) = dt * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) * dt) * amp;
    }
    const SemimartingaleReport rep = semimartingale_check(system, replay_path(system, dt, inc));
    out.push_back(compare("derivative formula vs central differences (smooth replay)",
                          rep.derivative_relative_error, 1e-3));
  }
  return out;
}

CheckResult far_check(const Scenario& scenario, const CarmaSystem& system) {
  const std::string name = "FAR substitution identity";
  BOperators b;
  try {
    b = derive_B(system.companion());
  } catch (const NumericalError& e) {
    return {name, Status::fail, 0.0, 1e-10, e.what()};
  }
  const FarModel model = far_coefficients(b, scenario.run.dt);
  const Eigen::Index n = model.space.dim();
  constexpr Eigen::Index steps = 32;
  Rng rng = path_rng(scenario.noise.seed, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd eps(n, steps);
  for (Eigen::Index j = 0; j < steps; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) eps(k, j) = gauss(rng);
  }
  const Eigen::MatrixXd x =
      far_simulate(model, Eigen::MatrixXd::Zero(n, model.p), eps, steps);
  const Eigen::MatrixXd back = recover_innovations(model, x);
  const double dev = (back - eps).cwiseAbs().maxCoeff() / eps.cwiseAbs().maxCoeff();
  return compare(name, dev, 1e-10);
}

CheckResult innovation_check(const Scenario& scenario, const CarmaSystem& system) {
  const Covariance q = innovation_covariance(system, scenario.run.dt);
  // Self-adjointness in the weighted sense is symmetry of the coordinate form.
  const Eigen::MatrixXd& c = q.coordinates;
  const double scale = std::max(c.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (c - c.transpose()).cwiseAbs().maxCoeff() / scale;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose()));
  const double neg = std::max(0.0, -es.eigenvalues().minCoeff()) / scale;
  return compare("innovation covariance symmetric and non-negative", std::max(asym, neg), 1e-12);
}

}  // namespace

int cmd_validate(const Scenario& scenario, std::ostream& out, std::ostream& /*err*/) {
  const CarmaSystem system = build_system(scenario);
  std::vector<CheckResult> checks = semigroup_checks(system);
  for (auto& c : pathwise_checks(scenario, system)) checks.push_back(std::move(c));
  checks.push_back(far_check(scenario, system));
  checks.push_back(innovation_check(scenario, system));

  bool ok = true;
  for (const auto& c : checks) {
    switch (c.status) {
      case Status::pass: out << "PASS "; break;
      case Status::fail: out << "FAIL "; ok = false; break;
      case Status::skip: out << "SKIP "; break;
    }
    out << c.name;
    if (c.status != Status::skip) {
      out << ": deviation " << short_number(c.measured) << ", tolerance "
          << short_number(c.tolerance);
    }
    if (!c.note.empty()) out << " (" << c.note << ")";
    out << "\n";
  }
  return ok ? kExitOk : kExitNumerical;
}

int run_command(const CommandLine& cl, std::ostream& out, std::ostream& err) {
  try {
    Scenario scenario = load_scenario(cl.scenario_path);
    if (cl.seed) scenario.noise.seed = *cl.seed;
    if (cl.command == "simulate") return cmd_simulate(scenario, cl.out_dir, cl.threads, err);
    if (cl.command == "analyze") return cmd_analyze(scenario, cl.out_dir, cl.threads, err);
    if (cl.command == "validate") {
      if (cl.out_dir.empty()) return cmd_validate(scenario, out, err);
      ensure_dir(cl.out_dir);
      std::ostringstream buf;
      const int code = cmd_validate(scenario, buf, err);
      out << buf.str();
      write_atomic(fs::path(cl.out_dir) / "validation.txt", buf.str());
      return code;
    }
    err << "error: unknown command '" << cl.command << "'\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const AssemblyError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const UnsupportedError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace hcarma
