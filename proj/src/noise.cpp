#include "hcarma/noise.hpp"

#include "hcarma/errors.hpp"

#include <cmath>
#include <numbers>

namespace hcarma {

void CovarianceSpec::validate() const {
  if (!space) throw DimensionError("covariance: missing space");
  if (eigenvalues.size() != space->dim) {
    throw DimensionError("covariance: expected " + std::to_string(space->dim) +
                         " eigenvalues, got " + std::to_string(eigenvalues.size()));
  }
  for (Eigen::Index n = 0; n < eigenvalues.size(); ++n) {
    if (!std::isfinite(eigenvalues[n]) || eigenvalues[n] < 0.0) {
      throw DimensionError("covariance: eigenvalue " + std::to_string(n + 1) +
                           " must be finite and >= 0");
    }
  }
}

void LevyModel::validate() const {
  if (!space) throw DimensionError("levy model: missing space");
  if (wiener) {
    wiener->validate();
    if (!wiener->space->same_as(*space)) {
      throw DimensionError("levy model: covariance lives on another space");
    }
  }
  if (jumps) {
    if (!std::isfinite(jumps->rate) || jumps->rate < 0.0) {
      throw DimensionError("levy model: jump rate must be finite and >= 0");
    }
    if (jumps->variances.size() != space->dim) {
      throw DimensionError("levy model: expected " + std::to_string(space->dim) +
                           " jump variances");
    }
    if (!jumps->variances.allFinite() || (jumps->variances.array() < 0.0).any()) {
      throw DimensionError("levy model: jump variances must be finite and >= 0");
    }
  }
}

Eigen::VectorXd LevyModel::total_covariance() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space->dim);
  if (wiener) out += wiener->eigenvalues;
  if (jumps) out += jumps->rate * jumps->variances;
  return out;
}

Eigen::VectorXd LevyModel::coordinate_variance() const {
  return total_covariance().cwiseQuotient(space->weights);
}

Eigen::VectorXd LevyModel::wiener_coordinate_variance() const {
  if (!wiener) return Eigen::VectorXd::Zero(space->dim);
  return wiener->eigenvalues.cwiseQuotient(space->weights);
}

void sample_increment(const LevyModel& model, double dt, Rng& rng,
                      Eigen::Ref<Eigen::VectorXd> out) {
  if (!(dt > 0.0)) throw DimensionError("sample_increment: dt must be > 0");
  const auto n = model.space->dim;
  if (out.size() != n) throw DimensionError("sample_increment: output size mismatch");
  out.setZero();
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (model.wiener) {
    const auto& q = model.wiener->eigenvalues;
    const auto& w = model.space->weights;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (q[k] > 0.0) out[k] = std::sqrt(q[k] * dt / w[k]) * gauss(rng);
    }
  }
  if (model.has_jumps()) {
    const auto& js = *model.jumps;
    std::poisson_distribution<long> count(js.rate * dt);
    const long jumps = count(rng);
    const Eigen::VectorXd scale = js.variances.cwiseQuotient(model.space->weights).cwiseSqrt();
    std::bernoulli_distribution coin(0.5);
    for (long j = 0; j < jumps; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (scale[k] == 0.0) continue;
        if (js.law == JumpLaw::two_point) {
          out[k] += coin(rng) ? scale[k] : -scale[k];
        } else {
          out[k] += scale[k] * gauss(rng);
        }
      }
    }
  }
}

HVector sample_increment(const LevyModel& model, double dt, Rng& rng) {
  HVector out = HVector::zero(model.space);
  sample_increment(model, dt, rng, out.coords);
  return out;
}

std::complex<double> char_exponent(const LevyModel& model, const Eigen::VectorXd& h) {
  const auto& w = model.space->weights;
  if (h.size() != w.size()) throw DimensionError("char_exponent: dimension mismatch");
  std::complex<double> psi = 0.0;
  if (model.wiener) {
    psi += -0.5 * (model.wiener->eigenvalues.array() * w.array() * h.array().square()).sum();
  }
  if (model.has_jumps()) {
    const auto& js = *model.jumps;
    double cf = 1.0;
    if (js.law == JumpLaw::two_point) {
      // <h, J> = sum_n w_n h_n J_n with J_n = +-sqrt(v_n / w_n) independently.
      for (Eigen::Index k = 0; k < h.size(); ++k) {
        cf *= std::cos(w[k] * h[k] * std::sqrt(js.variances[k] / w[k]));
      }
    } else {
      cf = std::exp(-0.5 * (js.variances.array() * w.array() * h.array().square()).sum());
    }
    // Both laws are symmetric, so E exp(i<h,J>) is real and E J = 0.
    psi += js.rate * (cf - 1.0);
  }
  return psi;
}

std::complex<double> char_exponent(const LevyModel& model, const HVector& h) {
  if (!h.space || !h.space->same_as(*model.space)) {
    throw DimensionError("char_exponent: h is not in the noise space");
  }
  return char_exponent(model, h.coords);
}

ModePaths mode_decompose(const std::vector<HVector>& path) {
  if (path.empty()) throw DimensionError("mode_decompose: empty path");
  ModePaths out{path.front().space,
                Eigen::MatrixXd(path.front().space->dim, static_cast<Eigen::Index>(path.size()))};
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!path[i].space->same_as(*out.space)) {
      throw DimensionError("mode_decompose: path leaves its space at index " +
                           std::to_string(i));
    }
    out.modes.col(static_cast<Eigen::Index>(i)) = path[i].coords;
  }
  return out;
}

std::vector<HVector> mode_reconstruct(const ModePaths& modes) {
  std::vector<HVector> out;
  out.reserve(static_cast<std::size_t>(modes.modes.cols()));
  for (Eigen::Index i = 0; i < modes.modes.cols(); ++i) {
    HVector v = HVector::zero(modes.space);
    for (Eigen::Index n = 0; n < modes.modes.rows(); ++n) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(modes.modes.rows(), n);
      v.coords += modes.modes(n, i) * e;
    }
    out.push_back(std::move(v));
  }
  return out;
}

double sine_field_value(const HVector& f, double x) {
  if (f.space->basis != BasisKind::sine_on_unit_interval) {
    throw UnsupportedError("sine_field_value: space is not in the sine basis");
  }
  double sum = 0.0;
  for (Eigen::Index n = 0; n < f.coords.size(); ++n) {
    sum += f.coords[n] * std::sqrt(2.0) * std::sin(std::numbers::pi * (n + 1) * x);
  }
  return sum;
}

Eigen::MatrixXd cumulative_path(const Eigen::MatrixXd& increments) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(increments.rows(), increments.cols() + 1);
  for (Eigen::Index i = 0; i < increments.cols(); ++i) {
    out.col(i + 1) = out.col(i) + increments.col(i);
  }
  return out;
}

}  // namespace hcarma
