#pragma once

// Scenario documents: one JSON object describing spaces, companion blocks,
// noise, observation and run settings.
//
//   {
//     "name": "wave",
//     "spaces": [{"label": "H1", "dim": 8, "basis": "sine_on_unit_interval",
//                 "weights": "wave_h1"},
//                {"label": "H2", "dim": 8, "basis": "sine_on_unit_interval"}],
//     "companion": {"A": ["zero", "laplacian_sine"], "I": ["identity"]},
//     "noise": {"covariance": "power:2", "seed": 7},
//     "observation": "P1",
//     "run": {"dt": 0.001, "T": 1.0, "paths": 10, "scheme": "a"}
//   }
//
// Blocks are named constructors ("identity", "zero", "laplacian_sine",
// "scaled_identity:<c>", "dense:<r11>,<r12>;<r21>,<r22>") or row arrays.
// A lists A_1..A_p, I lists I_2..I_p. Errors carry the field path.

#include "hcarma/carma.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace hcarma {

using Rows = std::vector<std::vector<double>>;

struct SpaceEntry {
  std::string label;
  Eigen::Index dim = 16;
  std::string basis = "abstract";
  std::string weights_name = "unit";  // "unit", "wave_h1" or "list"
  std::vector<double> weights;        // when weights_name == "list"

  bool operator==(const SpaceEntry&) const = default;
};

struct BlockEntry {
  std::string name;  // empty when given as rows
  Rows rows;

  bool operator==(const BlockEntry&) const = default;
};

struct SpectrumEntry {
  std::string name;  // "power:<k>", "zero", or empty for an explicit list
  std::vector<double> values;

  bool operator==(const SpectrumEntry&) const = default;
};

struct JumpEntry {
  double rate = 0.0;
  std::string law = "two_point";
  SpectrumEntry variances;

  bool operator==(const JumpEntry&) const = default;
};

struct NoiseEntry {
  SpectrumEntry covariance{"zero", {}};
  std::optional<JumpEntry> jumps;
  std::uint64_t seed = 0;

  bool operator==(const NoiseEntry&) const = default;
};

struct RunEntry {
  double dt = 1e-3;
  double T = 1.0;
  std::uint64_t paths = 1;
  std::string scheme = "a";
  int quadrature_nodes = 64;
  int series_terms = 25;
  double burn_in = 0.0;
  std::string method = "matrix_exponential";
  Rows probes;  // U-vectors for characteristic functionals; empty -> defaults

  bool operator==(const RunEntry&) const = default;
};

struct Scenario {
  std::string name;
  std::vector<SpaceEntry> spaces;
  std::vector<BlockEntry> a_blocks;  // A_1..A_p
  std::vector<BlockEntry> i_blocks;  // I_2..I_p
  NoiseEntry noise;
  std::string observation = "P1";
  std::vector<double> initial_state;  // empty -> zero
  RunEntry run;

  bool operator==(const Scenario&) const = default;
};

// ValidationError with a field path on malformed input. Also builds the
// system once so that block shapes and spaces are checked.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

nlohmann::json to_json(const Scenario& s);

// FNV-1a over the canonical serialization, as 16 hex digits.
std::string config_hash(const Scenario& s);

SemigroupOptions semigroup_options(const Scenario& s);
InnovationScheme innovation_scheme(const Scenario& s);
CarmaSystem build_system(const Scenario& s);
Eigen::Index run_steps(const Scenario& s);
Eigen::Index burn_in_steps(const Scenario& s);

// Probe vectors in U: the scenario's list, or up to five unit-norm basis
// vectors.
std::vector<Eigen::VectorXd> probe_vectors(const Scenario& s, const CarmaSystem& system);

}  // namespace hcarma
