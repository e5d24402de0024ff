#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "kpp/errors.hpp"
#include "kpp/reaction.hpp"

using namespace kpp;

namespace {

double quartic(double s, double mu) { return 2.0 * (s - mu) * (1.0 - s * s); }

// Composite Simpson on [a, b], n even.
template <class Fn>
double simpson(Fn fn, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double acc = fn(a) + fn(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * fn(a + i * h);
  return acc * h / 3.0;
}

ReactionLaw tabulate(double mu, int n) {
  std::vector<double> s, f;
  for (int k = 0; k <= n; ++k) {
    const double x = -1.0 + 2.0 * k / n;
    s.push_back(x);
    f.push_back(quartic(x, mu));
  }
  return ReactionLaw::tabulated(s, f);
}

const ValidationCheck* find(const ValidationReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("double well zeros, primitive and mass") {
  for (double mu : {-0.4, -0.25, -0.1, 0.0}) {
    const auto rx = ReactionLaw::double_well(mu);
    CHECK(rx.kind() == ReactionLaw::Kind::DoubleWell);
    CHECK(rx.f(-1.0) == 0.0);
    CHECK(rx.f(mu) == 0.0);
    CHECK(rx.f(1.0) == 0.0);
    CHECK(rx.mu() == mu);
    CHECK(rx.F(-1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rx.mass() == doctest::Approx(-8.0 * mu / 3.0).epsilon(1e-14));
    for (double r : {-0.9, -0.3, 0.0, 0.5, 0.99}) {
      const double quad = simpson([&](double s) { return quartic(s, mu); }, -1.0, r);
      CHECK(rx.F(r) == doctest::Approx(quad).epsilon(1e-12));
    }
  }
}

TEST_CASE("double well Lipschitz constant dominates the slope") {
  for (double mu : {-0.25, -0.9}) {
    const auto rx = ReactionLaw::double_well(mu);
    CHECK(rx.lipschitz() == doctest::Approx(4.0 * (1.0 + std::fabs(mu))));
    for (int k = 0; k < 2000; ++k) {
      const double a = -1.0 + k / 1000.0;
      const double b = a + 1e-3;
      CHECK(std::fabs(rx.f(b) - rx.f(a)) / 1e-3 <= rx.lipschitz());
    }
  }
}

TEST_CASE("double well validates; mu = 0 is stationary") {
  const auto report = validate_kpp(ReactionLaw::double_well(-0.25));
  CHECK(report.passed);
  CHECK_FALSE(report.stationary);
  CHECK(report.mass == doctest::Approx(2.0 / 3.0));
  CHECK(report.first_failure() == nullptr);

  const auto flat = validate_kpp(ReactionLaw::double_well(0.0));
  CHECK(flat.passed);
  CHECK(flat.stationary);
  ValidationOptions strict;
  strict.require_positive_mass = true;
  CHECK_FALSE(validate_kpp(ReactionLaw::double_well(0.0), strict).passed);
}

TEST_CASE("interior zero above 0 gives negative mass") {
  const auto rx = tabulate(0.25, 400);
  CHECK(rx.mass() == doctest::Approx(-2.0 / 3.0).epsilon(1e-4));
  const auto report = validate_kpp(rx);
  CHECK_FALSE(report.passed);
  const auto* fail = report.first_failure();
  REQUIRE(fail != nullptr);
  CHECK(fail->name == "positive_mass");
  CHECK(fail->detail.find("F(1) = -0.666") == 0);
  CHECK(fail->detail.find("<= 0") != std::string::npos);
}

TEST_CASE("tabulated law interpolates and integrates its own interpolant") {
  const auto rx = tabulate(-0.25, 64);
  CHECK(rx.kind() == ReactionLaw::Kind::Tabulated);
  for (int k = 0; k <= 64; ++k) {
    const double s = -1.0 + 2.0 * k / 64;
    CHECK(rx.f(s) == doctest::Approx(quartic(s, -0.25)).epsilon(1e-13));
  }
  CHECK(rx.mu() == doctest::Approx(-0.25).epsilon(1e-12));
  for (double r : {-0.7, 0.1, 1.0}) {
    const double quad = simpson([&](double s) { return rx.f(s); }, -1.0, r, 64 * 200);
    CHECK(rx.F(r) == doctest::Approx(quad).epsilon(1e-10));
  }
  CHECK(rx.mass() == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
  CHECK(validate_kpp(rx).passed);
}

TEST_CASE("tabulated CSV round trip and malformed files") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "kpp_reaction_test";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "ok.csv");
    out << "s,f\n";
    for (int k = 0; k <= 100; ++k) {
      const double s = -1.0 + 2.0 * k / 100;
      out.precision(17);
      out << s << "," << quartic(s, -0.25) << "\n";
    }
  }
  const auto rx = ReactionLaw::tabulated_csv(dir / "ok.csv");
  CHECK(rx.mass() == doctest::Approx(2.0 / 3.0).epsilon(1e-4));

  {
    std::ofstream out(dir / "header.csv");
    out << "x,y\n-1,0\n0,1\n0.5,1\n1,0\n";
  }
  CHECK_THROWS_AS(ReactionLaw::tabulated_csv(dir / "header.csv"), DomainError);
  {
    std::ofstream out(dir / "order.csv");
    out << "s,f\n-1,0\n0.5,1\n0,1\n1,0\n";
  }
  CHECK_THROWS_AS(ReactionLaw::tabulated_csv(dir / "order.csv"), DomainError);
  CHECK_THROWS_AS(ReactionLaw::tabulated_csv(dir / "missing.csv"), DomainError);
  fs::remove_all(dir);
}

TEST_CASE("custom reaction matches the closed form") {
  const auto rx = ReactionLaw::custom([](double s) { return quartic(s, -0.4); });
  CHECK(rx.kind() == ReactionLaw::Kind::Custom);
  CHECK(rx.mu() == doctest::Approx(-0.4).epsilon(1e-10));
  CHECK(rx.mass() == doctest::Approx(8.0 * 0.4 / 3.0).epsilon(1e-12));
  CHECK(rx.F(0.3) == doctest::Approx(ReactionLaw::double_well(-0.4).F(0.3)).epsilon(1e-12));
  CHECK(rx.lipschitz() >= 4.0);
}

TEST_CASE("validation reports witnesses for broken reactions") {
  // Wrong orientation: +1 is not stable.
  const auto flipped = ReactionLaw::custom([](double s) { return -quartic(s, -0.25); });
  const auto r1 = validate_kpp(flipped);
  CHECK_FALSE(r1.passed);
  const auto* sign = find(r1, "sign_pattern");
  REQUIRE(sign != nullptr);
  CHECK_FALSE(sign->passed);
  CHECK(sign->witness.has_value());

  // f(-1) != 0.
  const auto shifted = ReactionLaw::custom([](double s) { return quartic(s, -0.25) + 0.1; });
  const auto* zeros = find(validate_kpp(shifted), "zeros");
  REQUIRE(zeros != nullptr);
  CHECK_FALSE(zeros->passed);

  // Understated Lipschitz bound.
  const auto liar = ReactionLaw::custom([](double s) { return quartic(s, -0.25); }, 1.0);
  const auto* lip = find(validate_kpp(liar), "lipschitz");
  REQUIRE(lip != nullptr);
  CHECK_FALSE(lip->passed);
}

TEST_CASE("reaction domain errors") {
  CHECK_THROWS_AS(ReactionLaw::double_well(-1.0), DomainError);
  CHECK_THROWS_AS(ReactionLaw::double_well(0.5), DomainError);
  const auto rx = ReactionLaw::double_well(-0.25);
  CHECK_THROWS_AS(rx.F(1.5), DomainError);
  CHECK_THROWS_AS(rx.F(NAN), DomainError);
  CHECK_THROWS_AS(ReactionLaw::tabulated({-1, 0, 1}, {0, 1, 0}), DomainError);
  CHECK_THROWS_AS(ReactionLaw::custom(nullptr), DomainError);
}
