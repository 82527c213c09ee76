#include "hcarma/scenario.hpp"

#include "hcarma/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hcarma {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ValidationError(path + ": " + msg);
}

void only_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) fail(path, "must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) fail(path + "." + key, "unknown field");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) fail(path, "must be > 0");
  return v;
}

std::int64_t integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "must be an integer");
  return j.get<std::int64_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "must be a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(number(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

Rows rows_of(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "must be an array of rows");
  Rows out;
  for (std::size_t r = 0; r < j.size(); ++r) {
    out.push_back(numbers(j[r], path + "[" + std::to_string(r) + "]"));
  }
  return out;
}

// "1,2;3,4" -> {{1,2},{3,4}}.
Rows parse_inline_rows(const std::string& body, const std::string& path) {
  Rows out;
  std::stringstream rows(body);
  std::string row;
  while (std::getline(rows, row, ';')) {
    std::vector<double> r;
    std::stringstream cells(row);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        fail(path, "cannot read number '" + cell + "'");
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
        fail(path, "cannot read number '" + cell + "'");
      }
      r.push_back(v);
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) fail(path, "no rows given");
  return out;
}

Eigen::MatrixXd to_matrix(const Rows& rows, const std::string& path) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  const auto cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) fail(path, "rows have different lengths");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

SpectrumEntry parse_spectrum(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "zero") return {name, {}};
    if (starts_with(name, "power:")) {
      try {
        std::size_t used = 0;
        const double k = std::stod(name.substr(6), &used);
        if (used != name.size() - 6 || !std::isfinite(k)) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail(path, "expected power:<exponent>");
      }
      return {name, {}};
    }
    fail(path, "unknown spectrum '" + name + "' (use a list, \"zero\" or \"power:<k>\")");
  }
  SpectrumEntry out{"", numbers(j, path)};
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (out.values[k] < 0.0) fail(path + "[" + std::to_string(k) + "]", "must be >= 0");
  }
  return out;
}

Eigen::VectorXd resolve_spectrum(const SpectrumEntry& e, Eigen::Index n,
                                 const std::string& path) {
  if (e.name == "zero") return Eigen::VectorXd::Zero(n);
  if (starts_with(e.name, "power:")) {
    const double k = std::stod(e.name.substr(6));
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = std::pow(static_cast<double>(i + 1), -k);
    return out;
  }
  if (static_cast<Eigen::Index>(e.values.size()) != n) {
    fail(path, "expected " + std::to_string(n) + " values (one per mode of H_p), got " +
                   std::to_string(e.values.size()));
  }
  return Eigen::Map<const Eigen::VectorXd>(e.values.data(), n);
}

json spectrum_json(const SpectrumEntry& e) {
  if (!e.name.empty()) return e.name;
  return e.values;
}

BlockEntry parse_block(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "identity" || name == "zero" || name == "laplacian_sine") return {name, {}};
    if (starts_with(name, "scaled_identity:")) {
      const std::string body = name.substr(16);
      try {
        std::size_t used = 0;
        const double c = std::stod(body, &used);
        if (used != body.size() || !std::isfinite(c)) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail(path, "expected scaled_identity:<number>");
      }
      return {name, {}};
    }
    if (starts_with(name, "dense:")) {
      parse_inline_rows(name.substr(6), path);
      return {name, {}};
    }
    fail(path, "unknown operator '" + name +
                   "' (identity, zero, laplacian_sine, scaled_identity:<c>, dense:<rows>)");
  }
  return {"", rows_of(j, path)};
}

json block_json(const BlockEntry& b) {
  if (!b.name.empty()) return b.name;
  return b.rows;
}

Eigen::MatrixXd resolve_block(const BlockEntry& b, const SpaceSpec& from, const SpaceSpec& to,
                              const std::string& path) {
  const auto square = [&](const char* what) {
    if (from.dim != to.dim) {
      fail(path, std::string(what) + " needs equal dimensions, got " + from.label + " (" +
                     std::to_string(from.dim) + ") -> " + to.label + " (" +
                     std::to_string(to.dim) + ")");
    }
  };
  if (b.name == "zero") return Eigen::MatrixXd::Zero(to.dim, from.dim);
  if (b.name == "identity") {
    square("identity");
    return Eigen::MatrixXd::Identity(to.dim, from.dim);
  }
  if (b.name == "laplacian_sine") {
    square("laplacian_sine");
    if (from.basis != BasisKind::sine_on_unit_interval) {
      fail(path, "laplacian_sine needs " + from.label + " in the sine basis");
    }
    return laplacian_sine(from);
  }
  if (starts_with(b.name, "scaled_identity:")) {
    square("scaled_identity");
    return std::stod(b.name.substr(16)) * Eigen::MatrixXd::Identity(to.dim, from.dim);
  }
  const Eigen::MatrixXd m =
      b.name.empty() ? to_matrix(b.rows, path) : to_matrix(parse_inline_rows(b.name.substr(6), path), path);
  if (m.rows() != to.dim || m.cols() != from.dim) {
    fail(path, "block is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                   ", expected " + std::to_string(to.dim) + "x" + std::to_string(from.dim));
  }
  return m;
}

Space build_space(const SpaceEntry& e, const std::string& path) {
  const BasisKind basis =
      e.basis == "sine_on_unit_interval" ? BasisKind::sine_on_unit_interval : BasisKind::abstract;
  try {
    if (e.weights_name == "wave_h1") {
      if (basis != BasisKind::sine_on_unit_interval) {
        fail(path + ".weights", "wave_h1 weights need the sine basis");
      }
      return make_wave_energy_space(e.label, e.dim);
    }
    if (e.weights_name == "list") {
      if (static_cast<Eigen::Index>(e.weights.size()) != e.dim) {
        fail(path + ".weights", "expected " + std::to_string(e.dim) + " weights");
      }
      return make_space(e.label, Eigen::Map<const Eigen::VectorXd>(e.weights.data(), e.dim),
                        basis);
    }
    return make_space(e.label, e.dim, basis);
  } catch (const DimensionError& err) {
    fail(path, err.what());
  }
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  only_keys(doc, "scenario",
            {"name", "spaces", "companion", "noise", "observation", "initial_state", "run"});
  Scenario s;
  if (!doc.contains("name")) fail("name", "required");
  s.name = text(doc["name"], "name");
  if (s.name.empty()) fail("name", "must not be empty");

  if (!doc.contains("spaces")) fail("spaces", "required");
  const json& spaces = doc["spaces"];
  if (!spaces.is_array() || spaces.empty()) fail("spaces", "must be a non-empty array");
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    const std::string path = "spaces[" + std::to_string(i) + "]";
    const json& e = spaces[i];
    only_keys(e, path, {"label", "dim", "basis", "weights"});
    SpaceEntry entry;
    entry.label = e.contains("label") ? text(e["label"], path + ".label") : "H" + std::to_string(i + 1);
    if (e.contains("dim")) {
      const auto dim = integer(e["dim"], path + ".dim");
      if (dim < 1) fail(path + ".dim", "must be >= 1");
      entry.dim = dim;
    }
    if (e.contains("basis")) {
      entry.basis = text(e["basis"], path + ".basis");
      if (entry.basis != "abstract" && entry.basis != "sine_on_unit_interval") {
        fail(path + ".basis", "must be \"abstract\" or \"sine_on_unit_interval\"");
      }
    }
    if (e.contains("weights")) {
      const json& w = e["weights"];
      if (w.is_string()) {
        entry.weights_name = w.get<std::string>();
        if (entry.weights_name != "unit" && entry.weights_name != "wave_h1") {
          fail(path + ".weights", "must be \"unit\", \"wave_h1\" or a list");
        }
      } else {
        entry.weights_name = "list";
        entry.weights = numbers(w, path + ".weights");
      }
    }
    s.spaces.push_back(std::move(entry));
  }

  if (!doc.contains("companion")) fail("companion", "required");
  const json& comp = doc["companion"];
  only_keys(comp, "companion", {"A", "I"});
  if (!comp.contains("A") || !comp["A"].is_array()) fail("companion.A", "must be an array");
  for (std::size_t q = 0; q < comp["A"].size(); ++q) {
    s.a_blocks.push_back(parse_block(comp["A"][q], "companion.A[" + std::to_string(q) + "]"));
  }
  if (comp.contains("I")) {
    if (!comp["I"].is_array()) fail("companion.I", "must be an array");
    for (std::size_t q = 0; q < comp["I"].size(); ++q) {
      s.i_blocks.push_back(parse_block(comp["I"][q], "companion.I[" + std::to_string(q) + "]"));
    }
  }

  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    only_keys(n, "noise", {"covariance", "jumps", "seed"});
    if (n.contains("covariance")) s.noise.covariance = parse_spectrum(n["covariance"], "noise.covariance");
    if (n.contains("seed")) {
      if (!n["seed"].is_number_unsigned() && !n["seed"].is_number_integer()) {
        fail("noise.seed", "must be a non-negative integer");
      }
      if (n["seed"].is_number_integer() && n["seed"].get<std::int64_t>() < 0) {
        fail("noise.seed", "must be a non-negative integer");
      }
      s.noise.seed = n["seed"].get<std::uint64_t>();
    }
    if (n.contains("jumps") && !n["jumps"].is_null()) {
      const json& j = n["jumps"];
      only_keys(j, "noise.jumps", {"rate", "law", "variances"});
      JumpEntry je;
      if (!j.contains("rate")) fail("noise.jumps.rate", "required");
      je.rate = number(j["rate"], "noise.jumps.rate");
      if (je.rate < 0.0) fail("noise.jumps.rate", "must be >= 0");
      if (j.contains("law")) {
        je.law = text(j["law"], "noise.jumps.law");
        if (je.law != "two_point" && je.law != "gaussian") {
          fail("noise.jumps.law", "must be \"two_point\" or \"gaussian\"");
        }
      }
      if (!j.contains("variances")) fail("noise.jumps.variances", "required");
      je.variances = parse_spectrum(j["variances"], "noise.jumps.variances");
      s.noise.jumps = je;
    }
  }

  if (doc.contains("observation")) {
    s.observation = text(doc["observation"], "observation");
    if (s.observation != "P1" && s.observation != "zero" &&
        !starts_with(s.observation, "vector:") && !starts_with(s.observation, "dense:")) {
      fail("observation", "must be \"P1\", \"zero\", \"vector:<coeffs>\" or \"dense:<rows>\"");
    }
  }
  if (doc.contains("initial_state")) s.initial_state = numbers(doc["initial_state"], "initial_state");

  if (doc.contains("run")) {
    const json& r = doc["run"];
    only_keys(r, "run",
              {"dt", "T", "paths", "scheme", "quadrature_nodes", "series_terms", "burn_in",
               "method", "probes"});
    if (r.contains("dt")) s.run.dt = positive(r["dt"], "run.dt");
    if (r.contains("T")) {
      s.run.T = number(r["T"], "run.T");
      if (s.run.T < 0.0) fail("run.T", "must be >= 0");
    }
    if (r.contains("paths")) {
      const auto paths = integer(r["paths"], "run.paths");
      if (paths < 1) fail("run.paths", "must be >= 1");
      s.run.paths = static_cast<std::uint64_t>(paths);
    }
    if (r.contains("scheme")) {
      s.run.scheme = text(r["scheme"], "run.scheme");
      if (s.run.scheme != "a" && s.run.scheme != "b") fail("run.scheme", "must be \"a\" or \"b\"");
    }
    if (r.contains("quadrature_nodes")) {
      const auto v = integer(r["quadrature_nodes"], "run.quadrature_nodes");
      if (v < 1 || v > 1'000'000) fail("run.quadrature_nodes", "must lie in [1, 1e6]");
      s.run.quadrature_nodes = static_cast<int>(v);
    }
    if (r.contains("series_terms")) {
      const auto v = integer(r["series_terms"], "run.series_terms");
      if (v < 1 || v > 10'000) fail("run.series_terms", "must lie in [1, 1e4]");
      s.run.series_terms = static_cast<int>(v);
    }
    if (r.contains("burn_in")) {
      s.run.burn_in = number(r["burn_in"], "run.burn_in");
      if (s.run.burn_in < 0.0) fail("run.burn_in", "must be >= 0");
    }
    if (r.contains("method")) {
      s.run.method = text(r["method"], "run.method");
      if (s.run.method != "matrix_exponential" && s.run.method != "recursive_series" &&
          s.run.method != "wave_closed_form") {
        fail("run.method",
             "must be \"matrix_exponential\", \"recursive_series\" or \"wave_closed_form\"");
      }
    }
    if (r.contains("probes")) s.run.probes = rows_of(r["probes"], "run.probes");
  }

  run_steps(s);
  burn_in_steps(s);
  const CarmaSystem system = build_system(s);
  probe_vectors(s, system);
  return s;
}

Scenario parse_scenario_text(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario: not valid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

json to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["spaces"] = json::array();
  for (const auto& e : s.spaces) {
    json j{{"label", e.label}, {"dim", e.dim}, {"basis", e.basis}};
    if (e.weights_name == "list") {
      j["weights"] = e.weights;
    } else {
      j["weights"] = e.weights_name;
    }
    doc["spaces"].push_back(j);
  }
  doc["companion"]["A"] = json::array();
  for (const auto& b : s.a_blocks) doc["companion"]["A"].push_back(block_json(b));
  doc["companion"]["I"] = json::array();
  for (const auto& b : s.i_blocks) doc["companion"]["I"].push_back(block_json(b));
  doc["noise"]["covariance"] = spectrum_json(s.noise.covariance);
  doc["noise"]["seed"] = s.noise.seed;
  if (s.noise.jumps) {
    doc["noise"]["jumps"] = {{"rate", s.noise.jumps->rate},
                             {"law", s.noise.jumps->law},
                             {"variances", spectrum_json(s.noise.jumps->variances)}};
  }
  doc["observation"] = s.observation;
  if (!s.initial_state.empty()) doc["initial_state"] = s.initial_state;
  doc["run"] = {{"dt", s.run.dt},
                {"T", s.run.T},
                {"paths", s.run.paths},
                {"scheme", s.run.scheme},
                {"quadrature_nodes", s.run.quadrature_nodes},
                {"series_terms", s.run.series_terms},
                {"burn_in", s.run.burn_in},
                {"method", s.run.method}};
  if (!s.run.probes.empty()) doc["run"]["probes"] = s.run.probes;
  return doc;
}

std::string config_hash(const Scenario& s) {
  const std::string canon = to_json(s).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SemigroupOptions semigroup_options(const Scenario& s) {
  SemigroupOptions o;
  o.series_terms = s.run.series_terms;
  o.quadrature_nodes = s.run.quadrature_nodes;
  if (s.run.method == "recursive_series") {
    o.method = SemigroupMethod::recursive_series;
  } else if (s.run.method == "wave_closed_form") {
    o.method = SemigroupMethod::wave_closed_form;
  }
  return o;
}

InnovationScheme innovation_scheme(const Scenario& s) {
  return s.run.scheme == "b" ? InnovationScheme::exact_gaussian : InnovationScheme::left_point;
}

Eigen::Index run_steps(const Scenario& s) {
  const double ratio = s.run.T / s.run.dt;
  const auto m = static_cast<Eigen::Index>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(m)) > 1e-6 * std::max(1.0, ratio)) {
    fail("run.T", "must be a whole number of run.dt steps");
  }
  if (m > 100'000'000) fail("run.T", "more than 1e8 steps requested");
  return m;
}

Eigen::Index burn_in_steps(const Scenario& s) {
  return static_cast<Eigen::Index>(std::ceil(s.run.burn_in / s.run.dt - 1e-9));
}

CarmaSystem build_system(const Scenario& s) {
  const std::size_t p = s.spaces.size();
  std::vector<Space> spaces;
  for (std::size_t i = 0; i < p; ++i) {
    spaces.push_back(build_space(s.spaces[i], "spaces[" + std::to_string(i) + "]"));
  }
  if (s.a_blocks.size() != p) {
    fail("companion.A", "expected " + std::to_string(p) + " blocks A_1..A_" +
                            std::to_string(p) + ", got " + std::to_string(s.a_blocks.size()));
  }
  if (s.i_blocks.size() != p - 1) {
    fail("companion.I", "expected " + std::to_string(p - 1) + " blocks I_2..I_" +
                            std::to_string(p) + ", got " + std::to_string(s.i_blocks.size()));
  }
  CompanionSpec spec;
  spec.spaces = spaces;
  for (std::size_t q = 1; q <= p; ++q) {
    spec.a_blocks.push_back(resolve_block(s.a_blocks[q - 1], *spaces[p - q], *spaces[p - 1],
                                          "companion.A[" + std::to_string(q - 1) + "] (A_" +
                                              std::to_string(q) + ")"));
  }
  for (std::size_t q = 2; q <= p; ++q) {
    spec.i_blocks.push_back(resolve_block(s.i_blocks[q - 2], *spaces[p + 1 - q],
                                          *spaces[p - q],
                                          "companion.I[" + std::to_string(q - 2) + "] (I_" +
                                              std::to_string(q) + ")"));
  }

  const Space& hp = spaces.back();
  LevyModel noise;
  noise.space = hp;
  noise.seed = s.noise.seed;
  const Eigen::VectorXd q = resolve_spectrum(s.noise.covariance, hp->dim, "noise.covariance");
  if ((q.array() > 0.0).any()) noise.wiener = CovarianceSpec{hp, q};
  if (s.noise.jumps) {
    noise.jumps = JumpSpec{
        s.noise.jumps->rate,
        s.noise.jumps->law == "gaussian" ? JumpLaw::gaussian : JumpLaw::two_point,
        resolve_spectrum(s.noise.jumps->variances, hp->dim, "noise.jumps.variances")};
  }

  try {
    CompanionSystem companion(spec);
    const Layout& h = companion.layout();
    LinearMap obs;
    if (s.observation == "P1") {
      obs = projection_map(h, 0);
    } else if (s.observation == "zero") {
      obs = LinearMap::zero(h, Layout(h[0]));
    } else {
      const bool vec = starts_with(s.observation, "vector:");
      Eigen::MatrixXd m =
          to_matrix(parse_inline_rows(s.observation.substr(vec ? 7 : 6), "observation"),
                    "observation");
      if (vec) {
        if (m.rows() != 1) fail("observation", "vector:<coeffs> takes a single row");
      }
      if (m.cols() != h.dim()) {
        fail("observation", "readout has " + std::to_string(m.cols()) +
                                " columns, the state space has dimension " +
                                std::to_string(h.dim()));
      }
      obs = LinearMap{h, Layout(make_space("U", m.rows())), m};
    }
    ProductVector z0 = ProductVector::zero(h);
    if (!s.initial_state.empty()) {
      if (static_cast<Eigen::Index>(s.initial_state.size()) != h.dim()) {
        fail("initial_state", "expected " + std::to_string(h.dim()) + " coordinates");
      }
      z0.coords = Eigen::Map<const Eigen::VectorXd>(s.initial_state.data(), h.dim());
    }
    const SemigroupOptions opts = semigroup_options(s);
    if (opts.method == SemigroupMethod::wave_closed_form && !is_wave_system(companion)) {
      fail("run.method", "wave_closed_form needs the wave system [[0, Id], [Laplacian, 0]]");
    }
    if (innovation_scheme(s) == InnovationScheme::exact_gaussian && noise.has_jumps()) {
      fail("run.scheme", "scheme b (exact Gaussian innovations) needs Wiener-only noise");
    }
    CarmaSystem system(std::move(companion), std::move(noise), std::move(obs), std::move(z0),
                       opts);
    return system;
  } catch (const AssemblyError& e) {
    fail("companion", e.what());
  } catch (const DimensionError& e) {
    fail("scenario", e.what());
  } catch (const UnsupportedError& e) {
    fail("run.method", e.what());
  }
}

std::vector<Eigen::VectorXd> probe_vectors(const Scenario& s, const CarmaSystem& system) {
  const Layout& u = system.observation_space();
  std::vector<Eigen::VectorXd> out;
  if (!s.run.probes.empty()) {
    for (std::size_t k = 0; k < s.run.probes.size(); ++k) {
      const auto& row = s.run.probes[k];
      if (static_cast<Eigen::Index>(row.size()) != u.dim()) {
        fail("run.probes[" + std::to_string(k) + "]",
             "expected " + std::to_string(u.dim()) + " coordinates");
      }
      out.emplace_back(Eigen::Map<const Eigen::VectorXd>(row.data(), u.dim()));
    }
    return out;
  }
  for (Eigen::Index k = 0; k < std::min<Eigen::Index>(5, u.dim()); ++k) {
    out.push_back(Eigen::VectorXd::Unit(u.dim(), k) / std::sqrt(u.weights()[k]));
  }
  return out;
}

}  // namespace hcarma
