#include "hcarma/semigroup.hpp"

#include "hcarma/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hcarma {

namespace {

using GridValues = std::vector<Eigen::MatrixXd>;

// Running quadrature weights W[k][j] for int_0^{t_k}, k = 0..M.
std::vector<std::vector<double>> weight_table(int intervals, double h) {
  std::vector<std::vector<double>> table(intervals + 1);
  table[0] = {0.0};
  for (int k = 1; k <= intervals; ++k) table[k] = running_weights(k, h);
  return table;
}

double abscissa_of(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("semigroup: eigensolver did not converge");
  }
  return es.eigenvalues().real().maxCoeff();
}

// B_q for the order-q trailing system: its generator with the trailing
// (q-1) block removed, leaving I_q in block (1,2) and A_q in block (q,1).
Eigen::MatrixXd perturbation_block(const CompanionSystem& sub) {
  Eigen::MatrixXd b = sub.matrix();
  const auto n1 = sub.layout().component_dim(0);
  const auto rest = b.rows() - n1;
  b.bottomRightCorner(rest, rest).setZero();
  return b;
}

class SeriesBuilder {
 public:
  SeriesBuilder(const CompanionSystem& full, int terms, const UniformGrid& grid)
      : full_(full),
        terms_(terms),
        h_(grid.step()),
        intervals_(grid.intervals),
        weights_(weight_table(grid.intervals, grid.step())) {}

  // S_q sampled on grid nodes 0..M for the order-q trailing system.
  GridValues level(int q) {
    if (q == 1) {
      const Eigen::MatrixXd& a1 = full_.a_block(1).matrix;
      const Eigen::MatrixXd step = matrix_exponential(a1 * h_);
      GridValues vals(intervals_ + 1);
      vals[0] = Eigen::MatrixXd::Identity(a1.rows(), a1.cols());
      for (int j = 1; j <= intervals_; ++j) vals[j] = step * vals[j - 1];
      return vals;
    }

    const GridValues inner = level(q - 1);
    const CompanionSystem sub = full_.trailing(q);
    const Eigen::Index d = sub.layout().dim();
    const Eigen::Index n1 = sub.layout().component_dim(0);
    const Eigen::MatrixXd b = perturbation_block(sub);

    GridValues plus(intervals_ + 1, Eigen::MatrixXd::Zero(d, d));
    for (int j = 0; j <= intervals_; ++j) {
      plus[j].topLeftCorner(n1, n1).setIdentity();
      plus[j].bottomRightCorner(d - n1, d - n1) = inner[j];
    }

    GridValues term = plus;
    GridValues total = plus;
    GridValues b_term(intervals_ + 1);
    for (int n = 1; n <= terms_; ++n) {
      for (int j = 0; j <= intervals_; ++j) b_term[j].noalias() = b * term[j];
      GridValues next(intervals_ + 1, Eigen::MatrixXd::Zero(d, d));
      for (int k = 1; k <= intervals_; ++k) {
        const auto& w = weights_[k];
        for (int j = 0; j <= k; ++j) {
          next[k].noalias() += w[j] * (plus[k - j] * b_term[j]);
        }
      }
      for (int k = 0; k <= intervals_; ++k) total[k] += next[k];
      term = std::move(next);
    }

    record_bound(sub, plus, b);
    return total;
  }

  double bound() const { return bound_; }

 private:
  // Dyson remainder K e^{c tau} (|B| tau)^{n+1} / (n+1)! with K, c read off
  // the base semigroup S^+ on the grid.
  void record_bound(const CompanionSystem& sub, const GridValues& plus,
                    const Eigen::MatrixXd& b) {
    const Eigen::VectorXd& w = sub.layout().weights();
    const double tau = h_ * intervals_;
    const Eigen::Index n1 = sub.layout().component_dim(0);
    const Eigen::Index rest = b.rows() - n1;
    const double c =
        std::max(0.0, abscissa_of(sub.matrix().bottomRightCorner(rest, rest)));
    double k_const = 1.0;
    const int stride = std::max(1, intervals_ / 16);
    for (int j = 0; j <= intervals_; j += stride) {
      k_const = std::max(k_const,
                         operator_norm(plus[j], w, w) * std::exp(-c * h_ * j));
    }
    const double bnorm = operator_norm(b, w, w);
    const double log_term = (terms_ + 1) * std::log(std::max(bnorm * tau, 1e-300)) -
                            std::lgamma(terms_ + 2.0);
    bound_ += k_const * std::exp(c * tau) * std::exp(log_term);
  }

  const CompanionSystem& full_;
  int terms_;
  double h_;
  int intervals_;
  std::vector<std::vector<double>> weights_;
  double bound_ = 0.0;
};

}  // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw NumericalError("matrix_exponential: non-finite input");
  Eigen::MatrixXd out = m.exp();
  if (!out.allFinite()) {
    std::ostringstream os;
    os << "matrix_exponential overflowed; growth bound (spectral abscissa) of "
          "the argument is "
       << abscissa_of(m);
    throw NumericalError(os.str());
  }
  return out;
}

SemigroupEvaluator::SemigroupEvaluator(CompanionSystem system, SemigroupOptions options)
    : system_(std::move(system)), options_(options) {
  if (options_.series_terms < 1) {
    throw DimensionError("semigroup: series_terms must be >= 1");
  }
  if (options_.quadrature_nodes < 1) {
    throw DimensionError("semigroup: quadrature_nodes must be >= 1");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(system_.matrix(), false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("semigroup: eigensolver did not converge");
  }
  time_scale_ = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  spectral_abscissa_ = es.eigenvalues().real().maxCoeff();
  if (options_.method == SemigroupMethod::wave_closed_form && !is_wave_system(system_)) {
    throw UnsupportedError(
        "wave_closed_form needs [[0, Id], [Laplacian, 0]] on two sine spaces "
        "with the same number of modes");
  }
}

LinearMap SemigroupEvaluator::evaluate(double t) const {
  switch (options_.method) {
    case SemigroupMethod::matrix_exponential:
      return evaluate_exponential(t);
    case SemigroupMethod::recursive_series:
      return evaluate_recursive(t).value;
    case SemigroupMethod::wave_closed_form:
      return evaluate_wave(t);
  }
  throw UnsupportedError("unknown semigroup method");
}

LinearMap SemigroupEvaluator::evaluate_exponential(double t) const {
  if (!(t >= 0.0)) throw DimensionError("semigroup: t must be >= 0");
  const auto& layout = system_.layout();
  if (t == 0.0) return LinearMap::identity(layout);
  try {
    return LinearMap{layout, layout, matrix_exponential(system_.matrix() * t)};
  } catch (const NumericalError&) {
    std::ostringstream os;
    os << "S(t) overflowed at t=" << t << "; growth bound c=" << spectral_abscissa_
       << " gives e^{ct}=" << std::exp(spectral_abscissa_ * t);
    throw NumericalError(os.str());
  }
}

SeriesEvaluation SemigroupEvaluator::evaluate_recursive(double t) const {
  if (!(t >= 0.0)) throw DimensionError("semigroup: t must be >= 0");
  const auto& layout = system_.layout();
  const int p = system_.order();
  SeriesEvaluation out{LinearMap::identity(layout), 0.0, 0, 0, std::nullopt};
  if (t == 0.0) return out;
  if (p == 1) {
    out.value = evaluate_exponential(t);
    return out;
  }

  // Rate that fixes the series step and the grid: the generator spectrum and
  // every perturbation block B_q.
  double scale = time_scale_;
  for (int q = 2; q <= p; ++q) {
    const CompanionSystem sub = system_.trailing(q);
    const auto& w = sub.layout().weights();
    scale = std::max(scale, operator_norm(perturbation_block(sub), w, w));
  }
  const double span = t * scale;
  const int squarings = span <= 1.0 ? 0 : static_cast<int>(std::ceil(std::log2(span)));
  const double tau = std::ldexp(t, -squarings);
  const UniformGrid grid = make_grid(tau, options_.quadrature_nodes, scale);

  SeriesBuilder builder(system_, options_.series_terms, grid);
  const GridValues values = builder.level(p);
  const Eigen::MatrixXd step = values.back();

  Eigen::MatrixXd result = step;
  for (int i = 0; i < squarings; ++i) result = result * result;

  const auto& w = layout.weights();
  const double copies = std::ldexp(1.0, squarings);
  const double growth = std::max(1.0, operator_norm(step, w, w));
  out.value = LinearMap{layout, layout, result};
  out.squarings = squarings;
  out.grid_intervals = grid.intervals;
  out.remainder_bound = copies * builder.bound() * std::pow(growth, copies - 1.0);
  if (!(out.remainder_bound <= options_.series_tolerance)) {
    std::ostringstream os;
    os << "recursive series truncated at " << options_.series_terms
       << " terms: remainder bound " << out.remainder_bound << " exceeds "
       << options_.series_tolerance << " at t=" << t;
    out.warning = os.str();
  }
  if (!result.allFinite()) {
    throw NumericalError("recursive series overflowed at t=" + std::to_string(t));
  }
  return out;
}

LinearMap SemigroupEvaluator::evaluate_wave(double t) const {
  if (!is_wave_system(system_)) {
    throw UnsupportedError("wave_closed_form: not a wave system");
  }
  return hcarma::evaluate_wave(system_.layout(), t);
}

bool is_wave_system(const CompanionSystem& system) {
  if (system.order() != 2) return false;
  const auto& h1 = *system.layout()[0];
  const auto& h2 = *system.layout()[1];
  if (h1.basis != BasisKind::sine_on_unit_interval ||
      h2.basis != BasisKind::sine_on_unit_interval || h1.dim != h2.dim) {
    return false;
  }
  const auto n = h1.dim;
  return system.i_block(2).matrix == Eigen::MatrixXd::Identity(n, n) &&
         system.a_block(1).matrix.isZero(0.0) &&
         system.a_block(2).matrix == laplacian_sine(h1);
}

LinearMap evaluate_wave(const Layout& layout, double t) {
  if (!(t >= 0.0)) throw DimensionError("semigroup: t must be >= 0");
  if (layout.size() != 2) throw UnsupportedError("wave semigroup: need two components");
  const auto& h1 = *layout[0];
  const auto& h2 = *layout[1];
  if (h1.basis != BasisKind::sine_on_unit_interval ||
      h2.basis != BasisKind::sine_on_unit_interval || h1.dim != h2.dim) {
    throw UnsupportedError("wave semigroup: basis mismatch (need equal sine bases)");
  }
  const auto n = h1.dim;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  // g(Laplacian) acts on mode k through g(-pi^2 k^2); sqrt(-Laplacian) -> pi k.
  for (Eigen::Index k = 0; k < n; ++k) {
    const double omega = std::numbers::pi * static_cast<double>(k + 1);
    const double c = std::cos(omega * t);
    const double s = std::sin(omega * t);
    m(k, k) = c;
    m(k, n + k) = s / omega;
    m(n + k, k) = -omega * s;
    m(n + k, n + k) = c;
  }
  return LinearMap{layout, layout, m};
}

LinearMap evaluate_wave(Eigen::Index modes, double t) {
  return evaluate_wave(wave_system(modes).layout(), t);
}

}  // namespace hcarma
