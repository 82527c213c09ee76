#include "hcarma/operators.hpp"

#include "hcarma/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hcarma {

namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void check_block(const Eigen::MatrixXd& m, const Space& from, const Space& to,
                 const std::string& name) {
  if (m.rows() != to->dim || m.cols() != from->dim) {
    throw AssemblyError("block " + name + " is " + dims(m.rows(), m.cols()) +
                        ", expected " + dims(to->dim, from->dim) + " (" +
                        from->label + " -> " + to->label + ")");
  }
  if (!m.allFinite()) throw AssemblyError("block " + name + " has non-finite entries");
}

bool is_identity(const Eigen::MatrixXd& m) {
  return m.rows() == m.cols() && m == Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

}  // namespace

Eigen::MatrixXd i_product(const CompanionSystem& sys, int from) {
  const int p = sys.order();
  const auto n1 = sys.layout().component_dim(0);
  if (from > p) return Eigen::MatrixXd::Identity(n1, n1);
  if (from < 2) throw DimensionError("i_product: I_1 does not exist");
  Eigen::MatrixXd prod = sys.i_block(p).matrix;
  for (int q = p - 1; q >= from; --q) prod = prod * sys.i_block(q).matrix;
  return prod;
}

CompanionSystem::CompanionSystem(const CompanionSpec& spec) : spec_(spec) {
  const auto p = spec.spaces.size();
  if (p == 0) throw AssemblyError("companion system needs at least one space");
  if (spec.a_blocks.size() != p) {
    throw AssemblyError("expected " + std::to_string(p) + " A blocks, got " +
                        std::to_string(spec.a_blocks.size()));
  }
  if (spec.i_blocks.size() != p - 1) {
    throw AssemblyError("expected " + std::to_string(p - 1) + " I blocks, got " +
                        std::to_string(spec.i_blocks.size()));
  }
  for (const auto& s : spec.spaces) {
    if (!s) throw AssemblyError("null space in companion layout");
    s->validate();
  }
  layout_ = Layout(spec.spaces);

  const auto space = [&](std::size_t one_based) { return spec.spaces[one_based - 1]; };
  const auto ip = static_cast<int>(p);

  for (int q = 1; q <= ip; ++q) {
    const auto& m = spec.a_blocks[q - 1];
    const auto from = space(p + 1 - q);
    const auto to = space(p);
    check_block(m, from, to, "A_" + std::to_string(q));
    a_.push_back(LinearMap{Layout(from), Layout(to), m});
  }
  for (int q = 2; q <= ip; ++q) {
    const auto& m = spec.i_blocks[q - 2];
    const auto from = space(p + 2 - q);
    const auto to = space(p + 1 - q);
    check_block(m, from, to, "I_" + std::to_string(q));
    i_.push_back(LinearMap{Layout(from), Layout(to), m});
  }

  assembled_ = Eigen::MatrixXd::Zero(layout_.dim(), layout_.dim());
  // Block row r (1-based) < p holds I_{p+1-r} in column r+1.
  for (int r = 1; r < ip; ++r) {
    const auto& blk = i_block(ip + 1 - r).matrix;
    assembled_.block(layout_.offset(r - 1), layout_.offset(r), blk.rows(),
                     blk.cols()) = blk;
  }
  // Bottom row holds A_{p+1-c} in column c.
  for (int c = 1; c <= ip; ++c) {
    const auto& blk = a_block(ip + 1 - c).matrix;
    assembled_.block(layout_.offset(p - 1), layout_.offset(c - 1), blk.rows(),
                     blk.cols()) = blk;
  }
}

const LinearMap& CompanionSystem::a_block(int q) const {
  if (q < 1 || q > order()) {
    throw DimensionError("A_" + std::to_string(q) + " does not exist for p=" +
                         std::to_string(order()));
  }
  return a_[q - 1];
}

const LinearMap& CompanionSystem::i_block(int q) const {
  if (q < 2 || q > order()) {
    throw DimensionError("I_" + std::to_string(q) + " does not exist for p=" +
                         std::to_string(order()));
  }
  return i_[q - 2];
}

CompanionSystem CompanionSystem::trailing(int q) const {
  const int p = order();
  if (q < 1 || q > p) throw DimensionError("trailing order out of range");
  CompanionSpec sub;
  sub.spaces.assign(spec_.spaces.begin() + (p - q), spec_.spaces.end());
  sub.a_blocks.assign(spec_.a_blocks.begin(), spec_.a_blocks.begin() + q);
  sub.i_blocks.assign(spec_.i_blocks.begin(), spec_.i_blocks.begin() + (q - 1));
  return CompanionSystem(sub);
}

BOperators derive_B(const CompanionSystem& system, double max_condition) {
  const int p = system.order();
  BOperators out;
  out.space = Layout(system.layout()[0]);

  bool all_identity = true;
  for (int q = 2; q <= p; ++q) all_identity &= is_identity(system.i_block(q).matrix);

  const Eigen::MatrixXd full = i_product(system, 2);  // I_p ... I_2 : H_p -> H_1
  for (int q = 1; q <= p; ++q) {
    const Eigen::MatrixXd lhs = full * system.a_block(q).matrix;
    if (q == p || all_identity) {
      out.b.push_back(lhs);
      continue;
    }
    const Eigen::MatrixXd right = i_product(system, q + 1);
    if (right.rows() != right.cols()) {
      throw NumericalError("derive_B: I_p...I_" + std::to_string(q + 1) +
                           " is not square; B_" + std::to_string(q) +
                           " is not determined");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(right);
    const auto& sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0.0
                            ? sv[0] / sv[sv.size() - 1]
                            : std::numeric_limits<double>::infinity();
    if (!(cond <= max_condition)) {
      throw NumericalError("derive_B: I_p...I_" + std::to_string(q + 1) +
                           " is singular (condition " + std::to_string(cond) +
                           "); B_" + std::to_string(q) + " is not determined");
    }
    // B_q = lhs * right^{-1}, i.e. solve right^T B_q^T = lhs^T.
    Eigen::MatrixXd bt = right.transpose().partialPivLu().solve(lhs.transpose());
    out.b.push_back(bt.transpose());
  }
  return out;
}

double commutation_residual(const CompanionSystem& system, const BOperators& b,
                            int q) {
  const Eigen::MatrixXd lhs = i_product(system, 2) * system.a_block(q).matrix;
  const Eigen::MatrixXd rhs = b(q) * i_product(system, q + 1);
  const double scale = std::max(lhs.norm(), 1e-300);
  return (lhs - rhs).norm() / scale;
}

Eigen::MatrixXcd q_polynomial(const BOperators& b, std::complex<double> lambda) {
  const int p = b.order();
  const auto n = b.space.dim();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(n, n) * std::pow(lambda, p);
  for (int q = 1; q <= p; ++q) {
    out -= b(q).cast<std::complex<double>>() * std::pow(lambda, p - q);
  }
  return out;
}

StabilityReport stability_check(const CompanionSystem& system, double tolerance) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(system.matrix(), false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("stability_check: eigensolver did not converge");
  }
  StabilityReport r;
  r.spectral_abscissa = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const auto ev = es.eigenvalues()[k];
    r.eigenvalues.push_back(ev);
    r.spectral_abscissa = std::max(r.spectral_abscissa, ev.real());
  }
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(),
            [](const auto& a, const auto& b) {
              return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
            });
  r.stable = r.spectral_abscissa < -tolerance;
  return r;
}

double spectral_radius(const CompanionSystem& system) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(system.matrix(), false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("spectral_radius: eigensolver did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd laplacian_sine(const SpaceSpec& space) {
  if (space.basis != BasisKind::sine_on_unit_interval) {
    throw DimensionError("laplacian_sine: space '" + space.label +
                         "' does not use the sine basis");
  }
  Eigen::VectorXd d(space.dim);
  for (Eigen::Index n = 0; n < space.dim; ++n) {
    const double k = std::numbers::pi * static_cast<double>(n + 1);
    d[n] = -k * k;
  }
  return d.asDiagonal();
}

CompanionSystem scalar_companion(const std::vector<double>& alpha) {
  const auto p = alpha.size();
  CompanionSpec spec;
  for (std::size_t i = 0; i < p; ++i) {
    spec.spaces.push_back(make_space("R" + std::to_string(i + 1), 1));
    spec.a_blocks.push_back(Eigen::MatrixXd::Constant(1, 1, -alpha[i]));
  }
  for (std::size_t i = 1; i < p; ++i) {
    spec.i_blocks.push_back(Eigen::MatrixXd::Identity(1, 1));
  }
  return CompanionSystem(spec);
}

CompanionSystem wave_system(Eigen::Index modes) {
  CompanionSpec spec;
  spec.spaces = {make_wave_energy_space("H1", modes), make_sine_space("H2", modes)};
  spec.a_blocks = {Eigen::MatrixXd::Zero(modes, modes),
                   laplacian_sine(*spec.spaces[0])};
  spec.i_blocks = {Eigen::MatrixXd::Identity(modes, modes)};
  return CompanionSystem(spec);
}

}  // namespace hcarma
