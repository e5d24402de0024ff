#include <doctest.h>

#include <cmath>

#include "kpp/errors.hpp"
#include "kpp/profile.hpp"

using namespace kpp;

namespace {

// Closed-form p = 2 wave with q(0) = level.
double tanh_wave(double x, double level) { return -std::tanh(x - std::atanh(level)); }

double sup_error(const WaveSolution& w, double level) {
  double err = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    err = std::max(err, std::fabs(w.q[i] - tanh_wave(w.x[i], level)));
  }
  return err;
}

}  // namespace

TEST_CASE("p = 2 profile is the tanh wave") {
  const auto law = DiffusionLaw::p_laplacian(2.0);
  for (double mu : {-0.25, -0.4}) {
    const auto rx = ReactionLaw::double_well(mu);
    const auto res = find_critical_speed(law, rx);
    const auto w = reconstruct(res, law, rx, 1e-4, 2001);
    CHECK(w.size() == 2001);
    CHECK(w.c_star == res.c_star);
    CHECK(w.mu == mu);
    CHECK(sup_error(w, mu) <= 1e-6);
    CHECK(w.residuals.normalization <= 1e-12);
    CHECK(w.residuals.speed_identity <= 1e-6);
    CHECK(w.residuals.ode <= 1e-3);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double slope = -(1.0 - w.q[i] * w.q[i]);  // q_x of the tanh wave
      CHECK(w.qx[i] == doctest::Approx(slope).epsilon(1e-6));
    }
  }
}

TEST_CASE("stationary profile matches -tanh(x)") {
  const auto law = DiffusionLaw::p_laplacian(2.0);
  const auto rx = ReactionLaw::double_well(0.0);
  const auto w = reconstruct(find_critical_speed(law, rx), law, rx);
  CHECK(w.c_star == 0.0);
  CHECK(sup_error(w, 0.0) <= 1e-4);
  CHECK(std::isnan(w.residuals.speed_identity));
}

TEST_CASE("closed-form wave has a small discrete residual") {
  const auto law = DiffusionLaw::p_laplacian(2.0);
  const auto rx = ReactionLaw::double_well(-0.25);
  std::vector<double> x, q, qx;
  const int n = 4001;
  const double a = std::atanh(-0.25);
  for (int i = 0; i < n; ++i) {
    const double xi = -10.0 + 20.0 * i / (n - 1);
    x.push_back(xi);
    q.push_back(-std::tanh(xi - a));
    qx.push_back(-1.0 / std::pow(std::cosh(xi - a), 2));
  }
  const auto w = WaveSolution::from_samples(0.5, -0.25, x, q, qx);
  CHECK(ode_residual(w, law, rx) < 1e-4);
  // The wrong speed leaves an O(1) residual.
  const auto wrong = WaveSolution::from_samples(0.6, -0.25, x, q, qx);
  CHECK(ode_residual(wrong, law, rx) > 1e-2);
}

TEST_CASE("mass approaches the truncated range") {
  for (double p : {1.5, 2.0, 3.0}) {
    const auto law = DiffusionLaw::p_laplacian(p);
    const auto rx = ReactionLaw::double_well(-0.25);
    const auto w = reconstruct(find_critical_speed(law, rx), law, rx, 1e-3, 2001);
    INFO("p = " << p);
    CHECK(wave_mass(w) == doctest::Approx(w.q_hi - w.q_lo).epsilon(5e-3));
    CHECK(w.residuals.speed_identity <= 1e-5);
    CHECK(w.residuals.ode <= 2e-3);
  }
}

TEST_CASE("refining the samples shrinks the ode residual") {
  const auto law = DiffusionLaw::p_laplacian(3.0);
  const auto rx = ReactionLaw::double_well(-0.25);
  const auto res = find_critical_speed(law, rx);
  const auto coarse = reconstruct(res, law, rx, 1e-3, 501);
  const auto fine = reconstruct(res, law, rx, 1e-3, 2001);
  CHECK(fine.residuals.ode < coarse.residuals.ode);
}

TEST_CASE("anchor sets the translation") {
  const auto law = DiffusionLaw::p_laplacian(2.0);
  const auto rx = ReactionLaw::double_well(-0.25);
  const auto res = find_critical_speed(law, rx);
  ReconstructOptions opts;
  opts.anchor = 0.5;
  const auto w = reconstruct(res, law, rx, 1e-4, 1001, opts);
  CHECK(w.q_at(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sup_error(w, 0.5) <= 1e-6);
  // Same curve, shifted.
  const auto base = reconstruct(res, law, rx, 1e-4, 1001);
  const double shift = std::atanh(0.5) - std::atanh(-0.25);
  for (double x : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
    CHECK(w.q_at(x + shift) == doctest::Approx(base.q_at(x)).epsilon(1e-6));
  }
}

TEST_CASE("WaveSolution sample checks") {
  CHECK_THROWS_AS(WaveSolution::from_samples(0.5, 0.0, {0, 1}, {1, 0}, {0}),
                  InconsistentInputError);
  CHECK_THROWS_AS(WaveSolution::from_samples(0.5, 0.0, {0, 1, 2}, {1, 0, 0.5}, {0, 0, 0}),
                  InconsistentInputError);
  CHECK_THROWS_AS(WaveSolution::from_samples(0.5, 0.0, {0, 0, 2}, {1, 0, -1}, {0, 0, 0}),
                  InconsistentInputError);
  const auto w = WaveSolution::from_samples(0.5, 0.0, {0, 1, 2}, {1, 0, -1}, {-1, -1, -1});
  CHECK(w.q_at(0.5) == doctest::Approx(0.5));
  CHECK(w.q_at(-5.0) == 1.0);
  CHECK(w.q_at(5.0) == -1.0);
}

TEST_CASE("reconstruct rejects bad inputs") {
  const auto law = DiffusionLaw::p_laplacian(2.0);
  const auto rx = ReactionLaw::double_well(-0.25);
  auto res = find_critical_speed(law, rx);
  CHECK_THROWS_AS(reconstruct(res, law, rx, 0.0), DomainError);
  CHECK_THROWS_AS(reconstruct(res, law, rx, 0.7), DomainError);
  CHECK_THROWS_AS(reconstruct(res, law, rx, 1e-4, 3), DomainError);
  ReconstructOptions far;
  far.anchor = 0.99999;
  CHECK_THROWS_AS(reconstruct(res, law, rx, 1e-4, 101, far), DomainError);
  // Well above c* the trajectory crosses zero inside the range.
  res.c_star = 1.0;
  CHECK_THROWS_AS(reconstruct(res, law, rx), InconsistentInputError);
}
