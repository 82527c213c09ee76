#pragma once

// Companion operator matrix on H_1 x ... x H_p:
//
//   [ 0    I_p   0   ...  0  ]
//   [ 0    0   I_{p-1} ... 0  ]
//   [            ...          ]
//   [ 0    ...           I_2 ]
//   [ A_p  A_{p-1}  ...  A_1 ]
//
// with A_i : H_{p+1-i} -> H_p and I_i : H_{p+2-i} -> H_{p+1-i}. Blocks are
// addressed by their algebraic names, so a_block(1) is A_1 (bottom-right)
// and i_block(p) is I_p (top row).

#include "hcarma/spaces.hpp"

#include <complex>
#include <vector>

namespace hcarma {

struct CompanionSpec {
  std::vector<Space> spaces;               // H_1 .. H_p
  std::vector<Eigen::MatrixXd> a_blocks;   // A_1 .. A_p
  std::vector<Eigen::MatrixXd> i_blocks;   // I_2 .. I_p
};

class CompanionSystem {
 public:
  // Validates every block against the space layout; AssemblyError names the
  // offending block.
  explicit CompanionSystem(const CompanionSpec& spec);

  int order() const { return static_cast<int>(layout_.size()); }
  const Layout& layout() const { return layout_; }
  const Eigen::MatrixXd& matrix() const { return assembled_; }
  LinearMap generator() const { return LinearMap{layout_, layout_, assembled_}; }

  // A_q for q in [1, p]; I_q for q in [2, p].
  const LinearMap& a_block(int q) const;
  const LinearMap& i_block(int q) const;

  // The order-q system on H_{p-q+1} x ... x H_p built from A_1..A_q and
  // I_2..I_q. Its generator is the trailing q x q block of this one.
  CompanionSystem trailing(int q) const;

  const CompanionSpec& spec() const { return spec_; }

 private:
  CompanionSpec spec_;
  Layout layout_;
  std::vector<LinearMap> a_;
  std::vector<LinearMap> i_;
  Eigen::MatrixXd assembled_;
};

inline CompanionSystem assemble_companion(const CompanionSpec& spec) {
  return CompanionSystem(spec);
}

// B_1..B_p on H_1 with I_p...I_2 A_q = B_q I_p...I_{q+1}.
struct BOperators {
  Layout space;                  // H_1
  std::vector<Eigen::MatrixXd> b;  // b[q-1] = B_q

  int order() const { return static_cast<int>(b.size()); }
  const Eigen::MatrixXd& operator()(int q) const { return b.at(q - 1); }
};

// Requires every I_q square with condition number <= max_condition (or all
// exact identities); refuses with NumericalError otherwise.
BOperators derive_B(const CompanionSystem& system, double max_condition = 1e12);

// I_p I_{p-1} ... I_from : H_{p+2-from} -> H_1; identity on H_1 when from > p.
Eigen::MatrixXd i_product(const CompanionSystem& system, int from);

// Relative Frobenius residual of the commutation identity for B_q,
// q in [1, p-1], and of B_p = I_p...I_2 A_p.
double commutation_residual(const CompanionSystem& system, const BOperators& b,
                            int q);

// lambda^p Id - B_1 lambda^{p-1} - ... - B_p.
Eigen::MatrixXcd q_polynomial(const BOperators& b, std::complex<double> lambda);

struct StabilityReport {
  bool stable = false;
  double spectral_abscissa = 0.0;
  std::vector<std::complex<double>> eigenvalues;
};

// Stable iff max Re(lambda) < -tolerance over the spectrum of the truncated
// generator.
StabilityReport stability_check(const CompanionSystem& system,
                                double tolerance = 1e-9);

// Spectral radius of the truncated generator.
double spectral_radius(const CompanionSystem& system);

// Truncated Laplacian on the sine basis: diag(-pi^2 n^2).
Eigen::MatrixXd laplacian_sine(const SpaceSpec& space);

// Real companion matrix C_p with bottom row (-alpha_p, ..., -alpha_1), built
// as a companion system over one-dimensional spaces. alpha[0] = alpha_1.
CompanionSystem scalar_companion(const std::vector<double>& alpha);

// [[0, Id], [Laplacian, 0]] on H_1 x H_2 where H_1 is the wave energy space
// and H_2 = L2(0,1), both truncated to `modes` sine modes.
CompanionSystem wave_system(Eigen::Index modes);

}  // namespace hcarma
