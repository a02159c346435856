#include <doctest.h>

#include <cmath>
#include <random>

#include "lcklab/linalg.hpp"
#include "support.hpp"

using namespace lcklab;
using namespace lcklab::testing;

namespace {

const cxd I1(0.0, 1.0);

// Eigenvalues of a 2x2 matrix from the characteristic polynomial.
std::pair<cxd, cxd> eig2(const MatC& M) {
  const cxd tr = M.trace();
  const cxd det = M.determinant();
  const cxd disc = std::sqrt(tr * tr - 4.0 * det);
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

MatC random_contraction(std::mt19937_64& rng, Eigen::Index n, double radius) {
  const MatC M = random_matrix(rng, n);
  const Eigen::ComplexEigenSolver<MatC> es(M);
  return M * (radius / es.eigenvalues().cwiseAbs().maxCoeff());
}

MatC random_stable(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const MatC M = random_matrix(rng, n);
  return M - (spectral_abscissa(M) + u(rng)) * MatC::Identity(n, n);
}

double rel(const MatC& a, const MatC& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST_CASE("spectral_check on the reference matrices") {
  SUBCASE("scalar") {
    const Contraction C = spectral_check(0.5 * MatC::Identity(2, 2));
    CHECK(C.diagonalizable);
    CHECK(std::abs(C.eigenvalues(0) - 0.5) < 1e-15);
    CHECK(std::abs(C.eigenvalues(1) - 0.5) < 1e-15);
    CHECK(rel(C.absolute_part, C.A) < 1e-14);
  }
  SUBCASE("outside the disk") {
    MatC A = MatC::Zero(2, 2);
    A(0, 0) = 0.5;
    A(1, 1) = 1.2;
    try {
      spectral_check(A);
      FAIL("expected NotContraction");
    } catch (const LckError& e) {
      CHECK(e.code() == ErrorCode::NotContraction);
    }
  }
  SUBCASE("zero eigenvalue") {
    MatC A = MatC::Zero(2, 2);
    A(1, 1) = 0.5;
    try {
      spectral_check(A);
      FAIL("expected Singular");
    } catch (const LckError& e) {
      CHECK(e.code() == ErrorCode::Singular);
    }
  }
  SUBCASE("Jordan block") {
    const Contraction C = spectral_check(mat2(0.5, 0.5, 0.0, 0.5));
    CHECK_FALSE(C.diagonalizable);
    CHECK(std::abs(C.eigenvalues(0) - 0.5) < 1e-7);
    CHECK(std::abs(C.eigenvalues(1) - 0.5) < 1e-7);
  }
}

TEST_CASE("spectral_check agrees with the 2x2 characteristic polynomial") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const MatC A = random_contraction(rng, 2, 0.8);
    const Contraction C = spectral_check(A);
    const auto [a, b] = eig2(A);
    const double d1 = std::abs(C.eigenvalues(0) - a) + std::abs(C.eigenvalues(1) - b);
    const double d2 = std::abs(C.eigenvalues(0) - b) + std::abs(C.eigenvalues(1) - a);
    CHECK(std::min(d1, d2) < 1e-12);
    REQUIRE(C.diagonalizable);
    const MatC recon = C.eigenbasis * C.eigenvalues.asDiagonal() * C.eigenbasis.inverse();
    CHECK(rel(recon, A) < 1e-10);
    CHECK((C.absolute_part * A - A * C.absolute_part).norm() < 1e-10);
  }
}

TEST_CASE("A_abs A^-1 is unitary exactly for normal A") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> mod(0.1, 0.95), arg(-3.0, 3.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + trial % 4;
    const Eigen::HouseholderQR<MatC> qr(random_matrix(rng, n));
    const MatC Q = qr.householderQ();
    VecC d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = std::polar(mod(rng), arg(rng));
    const MatC A = Q * d.asDiagonal() * Q.adjoint();
    const Contraction C = spectral_check(A);
    REQUIRE(C.diagonalizable);
    const MatC U = C.absolute_part * A.inverse();
    CHECK((U.adjoint() * U - MatC::Identity(n, n)).norm() < 1e-10);
  }
  // non-normal but diagonalizable: the eigenbasis is not orthonormal
  const Contraction C = spectral_check(mat2(0.5 * I1, 0.3, 0.0, 0.25));
  REQUIRE(C.diagonalizable);
  const MatC U = C.absolute_part * C.A.inverse();
  CHECK((U.adjoint() * U - MatC::Identity(2, 2)).norm() > 1e-3);
}

TEST_CASE("expm matches an independent Taylor oracle") {
  std::mt19937_64 rng(7);
  for (double scale : {1e-3, 0.3, 1.0, 4.0, 20.0}) {
    for (Eigen::Index n = 1; n <= 6; ++n) {
      const MatC X = scale * random_matrix(rng, n) / std::sqrt(static_cast<double>(n));
      CHECK(rel(expm(X), taylor_expm(X)) < 1e-12);
    }
  }
  CHECK(rel(expm(MatC::Zero(3, 3)), MatC::Identity(3, 3)) == 0.0);
}

TEST_CASE("principal log reference values") {
  SUBCASE("scalar") {
    const FlowGenerator F = principal_log(spectral_check(0.5 * MatC::Identity(2, 2)));
    CHECK(rel(F.L, -kLn2 * MatC::Identity(2, 2)) < 1e-15);
  }
  SUBCASE("i/2") {
    MatC A = MatC::Zero(1, 1);
    A(0, 0) = 0.5 * I1;
    const MatC L = logm(A);
    CHECK(std::abs(L(0, 0) - cxd(-kLn2, M_PI / 2)) < 1e-15);
  }
  SUBCASE("Jordan block") {
    const FlowGenerator F = principal_log(spectral_check(mat2(0.5, 0.5, 0.0, 0.5)));
    CHECK(rel(F.L, mat2(-kLn2, 1.0, 0.0, -kLn2)) < 1e-14);
    CHECK(rel(taylor_expm(F.L), mat2(0.5, 0.5, 0.0, 0.5)) < 1e-12);
  }
  SUBCASE("rotation-scaling keeps the principal branch") {
    const double th = 3.0;
    const MatC A = 0.7 * mat2(std::cos(th), -std::sin(th), std::sin(th), std::cos(th));
    const MatC L = logm(A);
    const Eigen::ComplexEigenSolver<MatC> es(L);
    for (Eigen::Index i = 0; i < 2; ++i) {
      CHECK(std::abs(es.eigenvalues()(i).real() - std::log(0.7)) < 1e-13);
      CHECK(std::abs(std::abs(es.eigenvalues()(i).imag()) - th) < 1e-13);
    }
  }
  SUBCASE("eigenvalue on the cut") {
    MatC A = MatC::Zero(2, 2);
    A(0, 0) = -0.5;
    A(1, 1) = 0.5;
    try {
      principal_log(spectral_check(A));
      FAIL("expected BranchAmbiguity");
    } catch (const LckError& e) {
      CHECK(e.code() == ErrorCode::BranchAmbiguity);
    }
  }
}

TEST_CASE("exp(log A) = A for random contractions") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> radius(0.05, 0.95);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    const MatC A = random_contraction(rng, n, radius(rng));
    const FlowGenerator F = principal_log(spectral_check(A));
    CHECK(rel(taylor_expm(F.L), A) < 1e-12);
    CHECK(spectral_abscissa(F.L) < 0.0);
    const Eigen::ComplexEigenSolver<MatC> es(F.L);
    CHECK(es.eigenvalues().imag().cwiseAbs().maxCoeff() <= M_PI);
  }
  SUBCASE("clustered and defective spectra") {
    MatC A(3, 3);
    A << 0.5, 1.0, 0.3, 0.0, 0.5, 2.0, 0.0, 0.0, 0.52;
    CHECK(rel(taylor_expm(logm(A)), A) < 1e-12);
    MatC B = MatC::Zero(4, 4);
    B.diagonal().setConstant(0.3 * I1);
    B.diagonal(1).setConstant(1.0);
    CHECK(rel(taylor_expm(logm(B)), B) < 1e-12);
  }
}

TEST_CASE("Lyapunov solves") {
  SUBCASE("scalar generator") {
    FlowGenerator F{-kLn2 * MatC::Identity(2, 2)};
    const HermitianForm P = solve_lyapunov(F);
    CHECK(rel(P.matrix(), MatC::Identity(2, 2) / (2.0 * kLn2)) < 1e-14);
  }
  SUBCASE("Jordan generator") {
    FlowGenerator F{mat2(-kLn2, 1.0, 0.0, -kLn2)};
    const MatC P = solve_lyapunov(F).matrix();
    CHECK((F.L.adjoint() * P + P * F.L + MatC::Identity(2, 2)).norm() <= 1e-10);
    CHECK(min_eig_hermitian(HermitianForm(P)) > 0.0);
  }
  SUBCASE("random stable generators") {
    std::mt19937_64 rng(99);
    for (int seed = 0; seed < 100; ++seed) {
      const Eigen::Index n = 2 + seed % 5;
      const FlowGenerator F{random_stable(rng, n)};
      const MatC P = solve_lyapunov(F).matrix();
      CHECK((F.L.adjoint() * P + P * F.L + MatC::Identity(n, n)).norm() <= 1e-10);
      CHECK(min_eig_hermitian(HermitianForm(P)) > 0.0);
    }
  }
  SUBCASE("unstable generator") {
    FlowGenerator F{0.1 * MatC::Identity(2, 2)};
    CHECK_THROWS_AS(solve_lyapunov(F), LckError);
  }
}

TEST_CASE("Hermitian forms") {
  CHECK(min_eig_hermitian(HermitianForm(MatC::Identity(2, 2))) == doctest::Approx(1.0));
  CHECK(min_eig_hermitian(HermitianForm(mat2(4, 0, 0, 2))) == doctest::Approx(2.0));
  CHECK(std::abs(min_eig_hermitian(HermitianForm(mat2(1, 1, 1, 1)))) < 1e-15);
  CHECK(max_eig_hermitian(HermitianForm(mat2(4, 0, 0, 2))) == doctest::Approx(4.0));
  try {
    HermitianForm bad(mat2(1, 1, 0, 1));
    FAIL("expected IllConditioned");
  } catch (const LckError& e) {
    CHECK(e.code() == ErrorCode::IllConditioned);
  }
  const HermitianForm h(mat2(2, I1, -I1, 3));
  const VecC x = vec2(1.0, I1);
  CHECK(std::abs(h(x, x) - x.dot(h.matrix() * x)) < 1e-15);
}

TEST_CASE("Lemma-linear reference instances") {
  MatC W(2, 1);
  W << 1.0, 0.0;
  const HermitianForm h2(mat2(0, 0, 0, 1));
  SUBCASE("identity h1") {
    const auto inst = lemma_linear_u0(HermitianForm(MatC::Identity(2, 2)), h2, W);
    CHECK(std::abs(std::abs(inst.y(1)) - 1.0) < 1e-14);
    CHECK(std::abs(inst.y(0)) < 1e-14);
    CHECK(inst.y_prime.norm() < 1e-14);
    CHECK(inst.u0 == doctest::Approx(-1.0).epsilon(1e-14));
    for (double u = -3.0; u <= 3.0; u += 0.25) {
      const double m = min_eig_hermitian(HermitianForm(MatC::Identity(2, 2) + u * h2.matrix()));
      CHECK((m > 0.0) == (u > -1.0));
    }
  }
  SUBCASE("coupled h1") {
    const MatC h1 = mat2(1, 1, 1, 3);
    const auto inst = lemma_linear_u0(HermitianForm(h1), h2, W);
    CHECK(std::abs(std::abs(inst.y_prime(0)) - 1.0) < 1e-14);
    CHECK(std::abs(inst.y_prime(1)) < 1e-14);
    CHECK(inst.u0 == doctest::Approx(-2.0).epsilon(1e-14));
    const MatC hu0 = h1 + inst.u0 * h2.matrix();
    CHECK(std::abs(hu0.determinant()) < 1e-13);
    CHECK((hu0 * vec2(1.0, -1.0)).norm() < 1e-13);
    const auto scaled = lemma_linear_u0(HermitianForm(h1), HermitianForm(4.0 * h2.matrix()), W);
    CHECK(scaled.u0 == doctest::Approx(-0.5).epsilon(1e-14));
  }
  SUBCASE("degenerate subspace") {
    CHECK_THROWS_AS(lemma_linear_u0(HermitianForm(mat2(-1, 0, 0, 1)), h2, W), LckError);
  }
}

TEST_CASE("Lemma-linear threshold agrees with the Schur complement") {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 2 + trial % 4;
    const Eigen::HouseholderQR<MatC> qr(random_matrix(rng, n));
    const MatC Q = qr.householderQ();
    const MatC W = Q.leftCols(n - 1);
    const VecC nu = Q.col(n - 1);
    const MatC G = random_matrix(rng, n);
    const MatC h1 = G.adjoint() * G - 3.0 * nu * nu.adjoint();
    const MatC h2 = 2.5 * nu * nu.adjoint();
    const auto inst = lemma_linear_u0(HermitianForm(h1), HermitianForm(h2), W);
    // basis (W, nu): h_u is pd iff d + u h2(nu,nu) > b^* A^-1 b
    const MatC A = W.adjoint() * h1 * W;
    const VecC b = W.adjoint() * h1 * nu;
    const double d = nu.dot(h1 * nu).real();
    const double oracle = ((b.adjoint() * A.inverse() * b)(0, 0).real() - d) / 2.5;
    CHECK(std::abs(inst.u0 - oracle) <= 1e-9 * std::max(1.0, std::abs(oracle)));
    CHECK(std::abs(inst.h2(inst.y, inst.y).real() - 1.0) < 1e-12);
    CHECK((W.adjoint() * inst.y).norm() < 1e-12);
  }
}
