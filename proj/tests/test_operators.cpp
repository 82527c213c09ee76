#include "hcarma/errors.hpp"
#include "hcarma/operators.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

using namespace hcarma;
using testing_support::random_matrix;
using testing_support::random_system;

TEST(Assemble, WaveBlocks) {
  const CompanionSystem sys = wave_system(4);
  const Eigen::MatrixXd& c = sys.matrix();
  ASSERT_EQ(c.rows(), 8);
  EXPECT_TRUE(c.topLeftCorner(4, 4).isZero(0.0));
  EXPECT_EQ(Eigen::MatrixXd(c.topRightCorner(4, 4)), Eigen::MatrixXd::Identity(4, 4));
  EXPECT_EQ(Eigen::MatrixXd(c.bottomLeftCorner(4, 4)), laplacian_sine(*sys.layout()[0]));
  EXPECT_TRUE(c.bottomRightCorner(4, 4).isZero(0.0));
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_DOUBLE_EQ(c(4 + 2, 2), -9.0 * pi2);
}

TEST(Assemble, OrderOneIsA1) {
  std::mt19937_64 rng(1);
  const CompanionSystem sys = random_system(rng, {3});
  EXPECT_EQ(sys.matrix(), sys.a_block(1).matrix);
}

TEST(Assemble, ScalarCompanionMatchesRealCarma) {
  const CompanionSystem sys = scalar_companion({2.0, 3.0, 5.0});
  Eigen::Matrix3d expect;
  expect << 0, 1, 0, 0, 0, 1, -5, -3, -2;
  EXPECT_EQ(sys.matrix(), Eigen::MatrixXd(expect));
}

TEST(Assemble, BlockPlacementAndStructuralZeros) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<Eigen::Index> dims{2, 3, 1, 2};
    const CompanionSystem sys = random_system(rng, dims);
    const int p = sys.order();
    const Layout& l = sys.layout();
    for (int r = 1; r <= p; ++r) {
      for (int c = 1; c <= p; ++c) {
        const auto blk = sys.matrix().block(l.offset(r - 1), l.offset(c - 1),
                                            l.component_dim(r - 1), l.component_dim(c - 1));
        if (r == p) {
          EXPECT_EQ(Eigen::MatrixXd(blk), sys.a_block(p + 1 - c).matrix);
        } else if (c == r + 1) {
          EXPECT_EQ(Eigen::MatrixXd(blk), sys.i_block(p + 1 - r).matrix);
        } else {
          EXPECT_TRUE(blk.isZero(0.0)) << "block " << r << "," << c;
        }
      }
    }
  }
}

TEST(Assemble, ShapeErrorNamesBlock) {
  CompanionSpec spec;
  spec.spaces = {make_space("H1", 2), make_space("H2", 3)};
  spec.a_blocks = {Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3)};
  spec.i_blocks = {Eigen::MatrixXd::Zero(2, 3)};
  try {
    CompanionSystem sys(spec);
    FAIL() << "expected AssemblyError";
  } catch (const AssemblyError& e) {
    EXPECT_NE(std::string(e.what()).find("A_2"), std::string::npos) << e.what();
  }
  spec.a_blocks[1] = Eigen::MatrixXd::Zero(3, 2);
  spec.i_blocks = {Eigen::MatrixXd::Zero(3, 3)};
  try {
    CompanionSystem sys(spec);
    FAIL() << "expected AssemblyError";
  } catch (const AssemblyError& e) {
    EXPECT_NE(std::string(e.what()).find("I_2"), std::string::npos) << e.what();
  }
}

TEST(DeriveB, IdentitiesGiveA) {
  const CompanionSystem sys = scalar_companion({1.5, -0.5, 2.0});
  const BOperators b = derive_B(sys);
  for (int q = 1; q <= 3; ++q) EXPECT_EQ(b(q), sys.a_block(q).matrix);
}

TEST(DeriveB, OrderOne) {
  std::mt19937_64 rng(3);
  const CompanionSystem sys = random_system(rng, {3});
  EXPECT_EQ(derive_B(sys)(1), sys.a_block(1).matrix);
}

TEST(DeriveB, ScaledIdentityWithDiagonalA1) {
  CompanionSpec spec;
  spec.spaces = {make_space("H1", 3), make_space("H2", 3)};
  const Eigen::MatrixXd d = Eigen::Vector3d(1.0, -2.0, 0.5).asDiagonal();
  spec.a_blocks = {d, Eigen::MatrixXd::Ones(3, 3)};
  spec.i_blocks = {2.0 * Eigen::MatrixXd::Identity(3, 3)};
  const BOperators b = derive_B(CompanionSystem(spec));
  EXPECT_LT((b(1) - d).norm(), 1e-14);
}

TEST(DeriveB, CommutationOnRandomInvertibleSystems) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 2 + trial % 3;
    const CompanionSystem sys = random_system(rng, std::vector<Eigen::Index>(p, 3));
    const BOperators b = derive_B(sys);
    for (int q = 1; q <= p; ++q) EXPECT_LT(commutation_residual(sys, b, q), 1e-10);
    EXPECT_EQ(b(p), i_product(sys, 2) * sys.a_block(p).matrix);
  }
}

TEST(DeriveB, SingularIProductRefused) {
  CompanionSpec spec;
  spec.spaces = {make_space("H1", 2), make_space("H2", 2)};
  spec.a_blocks = {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  Eigen::Matrix2d sing;
  sing << 1, 0, 0, 0;
  spec.i_blocks = {sing};
  EXPECT_THROW(derive_B(CompanionSystem(spec)), NumericalError);
}

TEST(DeriveB, NonSquareIProductRefused) {
  CompanionSpec spec;
  spec.spaces = {make_space("H1", 2), make_space("H2", 3)};
  spec.a_blocks = {Eigen::MatrixXd::Ones(3, 3), Eigen::MatrixXd::Ones(3, 2)};
  spec.i_blocks = {Eigen::MatrixXd::Ones(2, 3)};
  EXPECT_THROW(derive_B(CompanionSystem(spec)), NumericalError);
}

TEST(QPolynomial, ConstantTerm) {
  std::mt19937_64 rng(5);
  const CompanionSystem sys = random_system(rng, {2, 2, 2});
  const BOperators b = derive_B(sys);
  const Eigen::MatrixXcd q0 = q_polynomial(b, 0.0);
  EXPECT_LT((q0 + b(3).cast<std::complex<double>>()).norm(), 1e-14);
}

TEST(QPolynomial, ScalarOu) {
  const BOperators b = derive_B(scalar_companion({-0.7}));  // B_1 = 0.7
  const std::complex<double> lambda(0.3, 1.1);
  EXPECT_LT(std::abs(q_polynomial(b, lambda)(0, 0) - (lambda - 0.7)), 1e-15);
}

TEST(QPolynomial, ScalarOrderTwoAtOne) {
  // A_q = -alpha_q, so B_1 = -alpha_1, B_2 = -alpha_2 and Q(1) = 1 - b1 - b2.
  const BOperators b = derive_B(scalar_companion({0.4, -1.2}));
  const double b1 = b(1)(0, 0), b2 = b(2)(0, 0);
  EXPECT_NEAR(q_polynomial(b, 1.0)(0, 0).real(), 1.0 - b1 - b2, 1e-15);
}

TEST(Stability, HeatEquationStable) {
  CompanionSpec spec;
  spec.spaces = {make_sine_space("L2", 5)};
  spec.a_blocks = {laplacian_sine(*spec.spaces[0])};
  const StabilityReport r = stability_check(CompanionSystem(spec));
  EXPECT_TRUE(r.stable);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  ASSERT_EQ(r.eigenvalues.size(), 5u);
  for (int n = 1; n <= 5; ++n) {
    EXPECT_NEAR(r.eigenvalues[n - 1].real(), -pi2 * n * n, 1e-9);
    EXPECT_NEAR(r.eigenvalues[n - 1].imag(), 0.0, 1e-9);
  }
  EXPECT_NEAR(r.spectral_abscissa, -pi2, 1e-9);
}

TEST(Stability, WaveOnTheBoundary) {
  const StabilityReport r = stability_check(wave_system(6));
  EXPECT_FALSE(r.stable);
  EXPECT_NEAR(r.spectral_abscissa, 0.0, 1e-9);
  for (const auto& ev : r.eigenvalues) {
    const double n = std::abs(ev.imag()) / std::numbers::pi;
    EXPECT_NEAR(n, std::round(n), 1e-8);
  }
}

TEST(Stability, ScalarOrderTwo) {
  const StabilityReport r = stability_check(scalar_companion({3.0, 2.0}));
  EXPECT_TRUE(r.stable);
  EXPECT_NEAR(r.eigenvalues[0].real(), -1.0, 1e-12);
  EXPECT_NEAR(r.eigenvalues[1].real(), -2.0, 1e-12);
}

TEST(Stability, ScalarEigenvaluesAreCharacteristicRoots) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int p = 1 + trial % 4;
    std::vector<double> alpha(p);
    for (auto& a : alpha) a = u(rng);
    const StabilityReport r = stability_check(scalar_companion(alpha));
    for (const auto& ev : r.eigenvalues) {
      std::complex<double> poly = std::pow(ev, p);
      for (int i = 1; i <= p; ++i) poly += alpha[i - 1] * std::pow(ev, p - i);
      EXPECT_LT(std::abs(poly), 1e-8 * (1.0 + std::pow(std::abs(ev), p)));
    }
  }
}

TEST(Laplacian, NeedsSineBasis) {
  EXPECT_THROW(laplacian_sine(*make_space("H", 3)), DimensionError);
}
