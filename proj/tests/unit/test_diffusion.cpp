#include <doctest.h>

#include <cmath>
#include <vector>

#include "kpp/diffusion.hpp"
#include "kpp/errors.hpp"

using namespace kpp;

namespace {

std::vector<DiffusionLaw> sample_laws() {
  return {DiffusionLaw::p_laplacian(2.0),
          DiffusionLaw::p_laplacian(1.5),
          DiffusionLaw::p_laplacian(3.0),
          DiffusionLaw::p_laplacian(4.5),
          DiffusionLaw::sum({{1.0, 2.0}, {1.0, 3.0}}),
          DiffusionLaw::sum({{0.5, 1.5}, {2.0, 4.0}}),
          regularize(DiffusionLaw::p_laplacian(3.0), 0.1),
          regularize(DiffusionLaw::p_laplacian(1.5), 0.01),
          regularize(DiffusionLaw::sum({{1.0, 2.0}, {1.0, 3.0}}), 0.5)};
}

// Log-spaced sample of [1e-6, 1e4].
std::vector<double> log_grid() {
  std::vector<double> v;
  for (int k = 0; k <= 100; ++k) v.push_back(std::pow(10.0, -6.0 + 0.1 * k));
  return v;
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_CASE("flux values for the basic laws") {
  CHECK(DiffusionLaw::p_laplacian(2.0).g(0.7) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(DiffusionLaw::p_laplacian(3.0).g(2.0) == doctest::Approx(4.0).epsilon(1e-15));
  const auto sum = DiffusionLaw::sum({{1.0, 2.0}, {1.0, 3.0}});
  CHECK(sum.g(2.0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(sum.psi(6.0) == doctest::Approx(2.0).epsilon(1e-12));
  for (const auto& law : sample_laws()) CHECK(law.g(0.0) == 0.0);
}

TEST_CASE("conjugate of P(3) at t = 2") {
  // Psi(t) = t^q / q with q = 3/2.
  const double expected = std::pow(2.0, 1.5) / 1.5;
  CHECK(DiffusionLaw::p_laplacian(3.0).Psi(2.0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(1.8856).epsilon(1e-4));
}

TEST_CASE("p-Laplacian inverse flux is a power") {
  for (double p : {1.25, 1.5, 2.0, 3.0, 6.0}) {
    const auto law = DiffusionLaw::p_laplacian(p);
    for (double t : {1e-8, 0.3, 1.0, 7.5}) {
      CHECK(law.psi(t) == doctest::Approx(std::pow(t, 1.0 / (p - 1.0))).epsilon(1e-14));
    }
  }
}

TEST_CASE("round trips g(psi(t)) and psi(g(z))") {
  for (const auto& law : sample_laws()) {
    for (double z : log_grid()) {
      const double t = law.g(z);
      CHECK(rel(law.g(law.psi(t)), t) <= 1e-12);
      CHECK(std::fabs(law.psi(t) - z) <= 1e-12 * std::max(1.0, z));
    }
  }
}

TEST_CASE("Fenchel equality at the contact point") {
  for (const auto& law : sample_laws()) {
    for (double z : log_grid()) {
      const double t = law.g(z);
      const double s = law.psi(t);
      const double Psi = law.Psi(t);
      CHECK(std::fabs(Psi - (t * s - law.potential(s))) <= 1e-12 * std::max(1.0, Psi));
    }
  }
}

TEST_CASE("H is psi composed with the conjugate inverse") {
  for (const auto& law : sample_laws()) {
    for (double t : {1e-5, 1e-2, 0.4, 1.0, 3.0, 50.0}) {
      const double y = law.Psi(t);
      CHECK(rel(law.Psi_inverse(y), t) <= 1e-10);
      CHECK(rel(law.H(y), law.psi(t)) <= 1e-10);
    }
    CHECK(law.H(0.0) == 0.0);
    CHECK(law.H(-1.0) == 0.0);  // z+ clamp
  }
  // Closed form for p = 2: H(y) = sqrt(2y).
  const auto p2 = DiffusionLaw::p_laplacian(2.0);
  for (double y : {1e-9, 0.125, 2.0}) {
    CHECK(p2.H(y) == doctest::Approx(std::sqrt(2.0 * y)).epsilon(1e-14));
  }
}

TEST_CASE("ellipticity ratio stays inside the bounds") {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto law = DiffusionLaw::p_laplacian(p);
    CHECK(law.lambda1() == p - 1.0);
    CHECK(law.lambda2() == p - 1.0);
    for (double z : log_grid()) {
      CHECK(z * law.g_prime(z) / law.g(z) == doctest::Approx(p - 1.0).epsilon(1e-12));
    }
  }
  for (const auto& law : sample_laws()) {
    for (double z : log_grid()) {
      const double ratio = z * law.g_prime(z) / law.g(z);
      CHECK(ratio >= law.lambda1() - 1e-12);
      CHECK(ratio <= law.lambda2() + 1e-12);
    }
  }
}

TEST_CASE("g is strictly increasing and odd") {
  for (const auto& law : sample_laws()) {
    double prev = 0.0;
    for (double z : log_grid()) {
      const double gz = law.g(z);
      CHECK(gz > prev);
      prev = gz;
      CHECK(law.g_signed(-z) == -gz);
    }
  }
}

TEST_CASE("regularized law is linear below the threshold") {
  // Threshold 2 reproduces g_a(1) = 2, g_a(2) = 4 for P(3).
  const auto law = regularize(DiffusionLaw::p_laplacian(3.0), 2.0);
  CHECK(law.is_regularized());
  CHECK(law.alpha() == 2.0);
  CHECK(law.g(1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(law.g(2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(law.g(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(law.g(3.0) == 9.0);
  CHECK(law.g_prime(1.0) == 2.0);
  // Quadratic potential near zero.
  CHECK(law.potential(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(law.lambda1() == 1.0);
  CHECK(law.lambda2() == 2.0);
}

TEST_CASE("regularized conjugate is continuous across the kink") {
  for (double alpha : {0.5, 0.1, 1e-3}) {
    const auto law = regularize(DiffusionLaw::p_laplacian(3.0), alpha);
    const double t_knee = law.g(alpha);
    const double below = law.Psi(t_knee * (1.0 - 1e-12));
    const double above = law.Psi(t_knee * (1.0 + 1e-12));
    CHECK(std::fabs(above - below) <= 1e-10 * std::max(1e-12, law.Psi(t_knee)) + 1e-20);
    const double y = law.Psi(t_knee);
    CHECK(law.H(y * (1 + 1e-12)) == doctest::Approx(law.H(y * (1 - 1e-12))).epsilon(1e-9));
  }
}

TEST_CASE("regularized flux converges uniformly on compacts") {
  const auto base = DiffusionLaw::p_laplacian(3.0);
  double prev = INFINITY;
  for (double alpha : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const auto law = regularize(base, alpha);
    double sup = 0.0;
    for (int k = 0; k <= 4000; ++k) {
      const double z = 2.0 * k / 4000.0;
      sup = std::max(sup, std::fabs(law.g(z) - base.g(z)));
    }
    CHECK(sup < prev);
    CHECK(sup <= base.g(alpha));
    prev = sup;
  }
}

TEST_CASE("max_g_prime bounds sampled slopes") {
  for (const auto& law : sample_laws()) {
    if (!law.is_regularized()) continue;  // unbounded at 0 for p < 2
    const double bound = law.max_g_prime(3.0);
    for (int k = 0; k <= 300; ++k) CHECK(law.g_prime(k / 100.0) <= bound * (1 + 1e-12));
  }
}

TEST_CASE("invalid laws and arguments") {
  CHECK_THROWS_AS(DiffusionLaw::p_laplacian(1.0), DomainError);
  CHECK_THROWS_AS(DiffusionLaw::p_laplacian(NAN), DomainError);
  CHECK_THROWS_AS(DiffusionLaw::sum({}), DomainError);
  CHECK_THROWS_AS(DiffusionLaw::sum({{0.0, 2.0}}), DomainError);
  CHECK_THROWS_AS(DiffusionLaw::sum({{1.0, 0.5}}), DomainError);
  CHECK_THROWS_AS(regularize(DiffusionLaw::p_laplacian(2.0), 0.0), DomainError);
  CHECK_THROWS_AS(regularize(DiffusionLaw::p_laplacian(2.0), -1.0), DomainError);
  const auto law = DiffusionLaw::p_laplacian(3.0);
  CHECK_THROWS_AS(law.g(NAN), DomainError);
  CHECK_THROWS_AS(law.g(INFINITY), DomainError);
  CHECK_THROWS_AS(law.g(-1.0), DomainError);
  CHECK_THROWS_AS(law.psi(-1.0), DomainError);
  CHECK_THROWS_AS(law.Psi(NAN), DomainError);
  CHECK_THROWS_AS(law.H(NAN), DomainError);
}
