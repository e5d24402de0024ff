#include "kpp/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kpp/errors.hpp"

namespace kpp {
namespace {

// Second-order derivative at the middle of three unevenly spaced points.
double central_slope(double x0, double x1, double x2, double u0, double u1,
                     double u2) {
  const double h1 = x1 - x0;
  const double h2 = x2 - x1;
  return (-h2 / (h1 * (h1 + h2))) * u0 + ((h2 - h1) / (h1 * h2)) * u1 +
         (h1 / (h2 * (h1 + h2))) * u2;
}

// n points on [lo, hi], uniform on each side of `pivot`, which is a node.
std::vector<double> pinned_grid(double lo, double hi, double pivot, int n) {
  const int below = std::clamp(
      static_cast<int>(std::lround((pivot - lo) / (hi - lo) * (n - 1))), 1,
      n - 2);
  std::vector<double> q(n);
  for (int k = 0; k <= below; ++k) q[k] = lo + (pivot - lo) * k / below;
  const int above = n - 1 - below;
  for (int k = 1; k <= above; ++k) q[below + k] = pivot + (hi - pivot) * k / above;
  q[below] = pivot;
  return q;
}

}  // namespace

WaveSolution WaveSolution::from_samples(double c_star, double mu,
                                        std::vector<double> x,
                                        std::vector<double> q,
                                        std::vector<double> qx) {
  if (x.size() != q.size() || x.size() != qx.size()) {
    throw InconsistentInputError("WaveSolution: sample arrays differ in length");
  }
  if (x.size() < 2) throw InconsistentInputError("WaveSolution: need >= 2 samples");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1]) || !(q[i] < q[i - 1])) {
      std::ostringstream msg;
      msg << "WaveSolution: profile not strictly decreasing at sample " << i
          << " (x = " << x[i] << ", q = " << q[i] << ")";
      throw InconsistentInputError(msg.str());
    }
  }
  WaveSolution w;
  w.c_star = c_star;
  w.mu = mu;
  w.q_hi = q.front();
  w.q_lo = q.back();
  w.x = std::move(x);
  w.q = std::move(q);
  w.qx = std::move(qx);
  return w;
}

double WaveSolution::q_at(double at) const {
  if (x.empty()) throw InconsistentInputError("q_at: empty wave");
  if (at <= x.front()) return q.front();
  if (at >= x.back()) return q.back();
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double t = (at - x[i - 1]) / (x[i] - x[i - 1]);
  return q[i - 1] + t * (q[i] - q[i - 1]);
}

WaveSolution reconstruct(const CriticalSpeedResult& result,
                         const DiffusionLaw& law, const ReactionLaw& reaction,
                         double eta, int n_samples,
                         const ReconstructOptions& opts) {
  if (!(eta > 0.0 && eta < 0.5)) {
    throw DomainError("reconstruct: eta must lie in (0, 0.5)");
  }
  if (n_samples < 5) throw DomainError("reconstruct: need n_samples >= 5");

  const ShootTrajectory traj =
      shoot(result.c_star, law, reaction, opts.integrator);
  const double q_lo = -1.0 + eta;
  const double q_hi = 1.0 - eta;
  for (std::size_t i = 0; i < traj.r.size(); ++i) {
    if (std::fabs(traj.r[i]) <= q_hi && !(traj.z[i] > 0.0)) {
      std::ostringstream msg;
      msg << "reconstruct: z(" << traj.r[i] << ") = " << traj.z[i]
          << " <= 0 inside the truncated range; not a wave trajectory";
      throw InconsistentInputError(msg.str());
    }
  }

  const double mu = reaction.mu();
  const double anchor = opts.anchor.value_or(mu);
  if (!(anchor > q_lo && anchor < q_hi)) {
    throw DomainError("reconstruct: anchor level outside the truncated range");
  }

  auto slope = [&](double q) {
    const double z = trajectory_value(traj, -q, law, reaction, opts.integrator);
    const double s = law.H(z);
    if (!(s > 0.0)) {
      std::ostringstream msg;
      msg << "reconstruct: |q_x| vanished at q = " << q;
      throw InconsistentInputError(msg.str());
    }
    return s;
  };
  auto segment = [&](double a, double b) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double q) { return 1.0 / slope(q); }, a, b, 8, opts.quad_tol, &err);
    // The requested tolerance sits near the noise of the re-integrated z;
    // only a gross miss means the integral is diverging.
    if (!std::isfinite(v) || err > 1e-6 * std::max(1.0, std::fabs(v))) {
      std::ostringstream msg;
      msg << "reconstruct: quadrature of dx/dq diverged near q = " << b
          << " (error estimate " << err << ")";
      throw NumericError(msg.str(), b);
    }
    return v;
  };

  const auto qs = pinned_grid(q_lo, q_hi, anchor, n_samples);
  const std::size_t pivot = static_cast<std::size_t>(
      std::find(qs.begin(), qs.end(), anchor) - qs.begin());
  std::vector<double> xs(qs.size(), 0.0);
  for (std::size_t k = pivot + 1; k < qs.size(); ++k) {
    xs[k] = xs[k - 1] - segment(qs[k - 1], qs[k]);
  }
  for (std::size_t k = pivot; k-- > 0;) {
    xs[k] = xs[k + 1] + segment(qs[k], qs[k + 1]);
  }

  std::vector<double> x(qs.rbegin(), qs.rend());
  std::vector<double> q(qs.rbegin(), qs.rend());
  std::vector<double> qx(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const std::size_t k = qs.size() - 1 - i;
    x[i] = xs[k];
    qx[i] = -slope(qs[k]);
  }

  auto wave = WaveSolution::from_samples(result.c_star, mu, std::move(x),
                                         std::move(q), std::move(qx));
  wave.q_lo = q_lo;
  wave.q_hi = q_hi;
  wave.residuals.normalization = std::fabs(wave.q_at(0.0) - mu);
  wave.residuals.ode = ode_residual(wave, law, reaction);
  if (result.c_star > 0.0) {
    wave.residuals.speed_identity =
        speed_identity_residual(result, law, reaction);
  }
  return wave;
}

double ode_residual(const WaveSolution& wave, const DiffusionLaw& law,
                    const ReactionLaw& reaction) {
  const std::size_t n = wave.size();
  if (n < 5) throw InconsistentInputError("ode_residual: need >= 5 samples");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(wave.x[i] > wave.x[i - 1]) || !(wave.q[i] < wave.q[i - 1])) {
      throw InconsistentInputError(
          "ode_residual: profile must be strictly decreasing");
    }
  }
  const auto& x = wave.x;
  const auto& q = wave.q;

  std::vector<double> flux(n, 0.0);
  std::vector<double> slope(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    slope[i] = central_slope(x[i - 1], x[i], x[i + 1], q[i - 1], q[i], q[i + 1]);
    flux[i] = law.g_signed(slope[i]);
  }

  double f_max = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    f_max = std::max(f_max, std::fabs(reaction.f(-1.0 + k / 1000.0)));
  }
  if (f_max == 0.0) f_max = 1.0;

  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double dflux =
        central_slope(x[i - 1], x[i], x[i + 1], flux[i - 1], flux[i], flux[i + 1]);
    const double r = dflux + wave.c_star * slope[i] + reaction.f(q[i]);
    worst = std::max(worst, std::fabs(r));
  }
  return worst / f_max;
}

double wave_mass(const WaveSolution& wave) {
  double acc = 0.0;
  for (std::size_t i = 1; i < wave.size(); ++i) {
    acc += 0.5 * (std::fabs(wave.qx[i]) + std::fabs(wave.qx[i - 1])) *
           (wave.x[i] - wave.x[i - 1]);
  }
  return acc;
}

}  // namespace kpp
