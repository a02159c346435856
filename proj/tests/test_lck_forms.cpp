#include <doctest.h>

#include <cmath>
#include <random>

#include "lcklab/lck_forms.hpp"
#include "lcklab/pipeline.hpp"
#include "support.hpp"

using namespace lcklab;
using namespace lcklab::testing;

namespace {

PotentialField field(const MatC& A, double lambda) {
  return PotentialField::build(A, ShellSpec::sphere(A.rows()), lambda);
}

std::vector<VecC> samples_for(const PotentialField& P, std::size_t count, std::uint64_t seed) {
  SamplingConfig cfg;
  cfg.count = count;
  cfg.seed = seed;
  return sample_points(P.flow, P.shell, cfg, P.tol);
}

PotentialField radial() { return field(0.5 * MatC::Identity(2, 2), 2 * kLn2); }
PotentialField diagonal() { return field(mat2(0.5, 0, 0, 0.25), 1.2); }

PotentialField jordan_at_twice_threshold() {
  const PotentialField base = field(mat2(0.5, 0.5, 0.0, 0.5), 1.0);
  const MinLambdaResult m = find_min_lambda(base, samples_for(base, 200, 100), 0.1, 1000.0);
  return base.with_lambda(2.0 * m.lambda_star);
}

// Exterior product of a 1-form and a 2-form, (theta ^ Omega)_abc.
double wedge(const VecR& t, const MatR& W, int a, int b, int c) {
  return t(a) * W(b, c) - t(b) * W(a, c) + t(c) * W(a, b);
}

}  // namespace

TEST_CASE("real-coordinate dictionary") {
  const MatC H = mat2(2.0, cxd(0.5, -1.0), cxd(0.5, 1.0), 3.0);
  const MatR W = real_two_form(H);
  const MatR g = real_metric(H);
  CHECK((W + W.transpose()).norm() < 1e-15);
  CHECK((g - g.transpose()).norm() < 1e-15);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const VecC u = random_vector(rng, 2), v = random_vector(rng, 2);
    const VecR ur = to_real(u), vr = to_real(v);
    CHECK(std::abs(ur.dot(W * vr) - 2.0 * u.dot(H * v).imag()) < 1e-12);
    CHECK(std::abs(ur.dot(g * vr) - 2.0 * u.dot(H * v).real()) < 1e-12);
    // g(u, v) = Omega(u, i v)
    CHECK(std::abs(ur.dot(g * vr) - ur.dot(W * to_real(cxd(0, 1) * v))) < 1e-12);
  }
}

TEST_CASE("form samples in the radial case") {
  const PotentialField P = radial();
  SUBCASE("on the shell") {
    const FormSample s = form_sample(P, vec2(1.0, 0.0));
    CHECK((s.omega_tilde.matrix() - MatC::Identity(2, 2)).norm() < 1e-6);
    CHECK((s.omega.matrix() - MatC::Identity(2, 2)).norm() < 1e-6);
    VecR theta(4);
    theta << -2.0, 0.0, 0.0, 0.0;
    CHECK((s.theta - theta).norm() < 1e-12);
    CHECK(s.automorphy_factor == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("off the shell") {
    const FormSample s = form_sample(P, vec2(2.0, 0.0));
    CHECK(s.phi == doctest::Approx(4.0).epsilon(1e-13));
    CHECK((s.omega.matrix() - 0.25 * MatC::Identity(2, 2)).norm() < 1e-6);
  }
  SUBCASE("theta = -d log |z|^2 everywhere") {
    for (const VecC& z : samples_for(P, 50, 2)) {
      const FormSample s = form_sample(P, z);
      CHECK((s.theta + 2.0 * to_real(z) / z.squaredNorm()).norm() < 1e-12 * s.theta.norm());
      CHECK((s.omega.matrix() - s.omega_tilde.matrix() / s.phi).norm() <= 1e-15 * s.omega.matrix().norm());
    }
  }
  SUBCASE("theta ^ omega on the unit sphere from the closed form") {
    const VecC z = vec2(cxd(0.6, 0.0), cxd(0.0, 0.8));
    const FormSample s = form_sample(P, z);
    const VecR dr = to_real(z);  // dr at r = 1
    const MatR W = real_two_form(MatC::Identity(2, 2));
    const MatR Wn = real_two_form(s.omega.matrix());
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          CHECK(std::abs(wedge(s.theta, Wn, a, b, c) - wedge(-2.0 * dr, W, a, b, c)) < 1e-5);
  }
}

TEST_CASE("d theta = 0") {
  SUBCASE("radial") {
    for (const VecC& z : samples_for(radial(), 50, 3)) {
      const ExteriorResidual r = check_dtheta_zero(radial(), z);
      CHECK(r.residual_norm <= 1e-8);
      CHECK(r.form_degree == 2);
    }
  }
  SUBCASE("diagonal") {
    const PotentialField P = diagonal();
    for (const VecC& z : samples_for(P, 100, 4)) CHECK(check_dtheta_zero(P, z).residual_norm <= 1e-5);
  }
  SUBCASE("Jordan") {
    const PotentialField P = field(mat2(0.5, 0.5, 0.0, 0.5), 2.0);
    for (const VecC& z : samples_for(P, 100, 5)) {
      const ExteriorResidual r = check_dtheta_zero(P, z);
      CHECK(r.residual_norm <= 1e-4);
      CHECK(r.passed());
    }
  }
}

TEST_CASE("LCK identity d omega = theta ^ omega") {
  SUBCASE("radial, ten times inside tolerance") {
    for (const VecC& z : samples_for(radial(), 50, 6)) {
      const ExteriorResidual r = check_lck_identity(radial(), z);
      CHECK(r.residual_norm <= 1e-6);
      CHECK(r.residual_norm <= 0.1 * r.tolerance);
      CHECK(r.form_degree == 3);
    }
  }
  SUBCASE("Jordan at twice the threshold") {
    const PotentialField P = jordan_at_twice_threshold();
    for (const VecC& z : samples_for(P, 100, 7)) CHECK(check_lck_identity(P, z).residual_norm <= 1e-4);
  }
  SUBCASE("n = 3") {
    MatC A = 0.5 * MatC::Identity(3, 3);
    A(0, 2) = 0.3;
    A(2, 2) = 0.4;
    const PotentialField P = field(A, 3.0);
    for (const VecC& z : samples_for(P, 10, 8)) CHECK(check_lck_identity(P, z).passed());
  }
  SUBCASE("n = 4 is unsupported") {
    const PotentialField P = field(0.5 * MatC::Identity(4, 4), 1.0);
    VecC z = VecC::Zero(4);
    z(0) = 1.0;
    try {
      check_lck_identity(P, z);
      FAIL("expected DimensionUnsupported");
    } catch (const LckError& e) {
      CHECK(e.code() == ErrorCode::DimensionUnsupported);
    }
  }
}

TEST_CASE("deck pullback and invariance") {
  SUBCASE("radial closed form") {
    const CheckReport r = check_gamma_pullback(radial(), vec2(1.0, 0.5));
    CHECK(r.passed());
    CHECK(r.metrics.at("expected_factor") == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("diagonal, every sample") {
    const PotentialField P = diagonal();
    for (const VecC& z : samples_for(P, 50, 9)) {
      const CheckReport r = check_gamma_pullback(P, z);
      CHECK(r.metrics.at("homothety_residual") <= 1e-6);
      CHECK(r.metrics.at("invariance_residual") <= 1e-6);
      CHECK(std::abs(r.metrics.at("factor") - std::exp(-P.lambda)) <= 1e-8 * std::exp(-P.lambda));
    }
  }
  SUBCASE("iterated deck map") {
    const PotentialField P = diagonal();
    const CheckReport r = check_gamma_pullback(P, vec2(0.7, cxd(0.2, 0.4)), 3);
    CHECK(r.passed());
    CHECK(r.metrics.at("expected_factor") == doctest::Approx(std::exp(-3 * P.lambda)));
    CHECK(std::abs(r.metrics.at("factor") / r.metrics.at("expected_factor") - 1.0) <= 1e-8);
  }
  SUBCASE("theta is deck invariant") {
    const PotentialField P = jordan_at_twice_threshold();
    for (const VecC& z : samples_for(P, 50, 10)) CHECK(check_theta_invariance(P, z).residual <= 1e-6);
  }
}

TEST_CASE("omega is positive wherever the potential is psh") {
  const PotentialField P = jordan_at_twice_threshold();
  const auto pts = samples_for(P, 100, 11);
  REQUIRE(check_psh(P, pts).passed());
  for (const VecC& z : pts) CHECK(min_eig_hermitian(form_sample(P, z).omega) > 0.0);
}
