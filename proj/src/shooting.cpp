#include "kpp/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include "kpp/errors.hpp"

namespace kpp {
namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 1>;
using Stepper = odeint::runge_kutta_dopri5<State>;

constexpr int kContinuationNodes = 64;

struct PhasePlaneRhs {
  double c;
  const DiffusionLaw* law;
  const ReactionLaw* reaction;

  void operator()(const State& x, State& dxdt, double r) const {
    const double s = std::clamp(-r, -1.0, 1.0);
    const double drag = c > 0.0 ? c * law->H(x[0]) : 0.0;
    dxdt[0] = reaction->f(s) - drag;
  }
};

auto make_stepper(const IntegratorOptions& opts) {
  return odeint::make_controlled(opts.atol, opts.rtol, Stepper());
}

void check_options(const IntegratorOptions& opts) {
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0) || !(opts.first_step > 0.0) ||
      !(opts.max_step > 0.0) || !(opts.min_step > 0.0)) {
    throw DomainError("shoot: integrator tolerances and steps must be > 0");
  }
}

// z on [r0, r] after z(r0) <= 0 with r0 >= -mu: H(z⁺) vanishes, so
// z(r) = z(r0) + ∫_{r0}^{r} f(-s) ds = z(r0) + F(-r0) - F(-r).
double linear_continuation(const ReactionLaw& reaction, double r0, double z0,
                           double r) {
  return z0 + reaction.F(-r0) - reaction.F(-r);
}

}  // namespace

ShootTrajectory shoot(double c, const DiffusionLaw& law,
                      const ReactionLaw& reaction,
                      const IntegratorOptions& opts) {
  if (!std::isfinite(c) || c < 0.0) {
    std::ostringstream msg;
    msg << "shoot: speed must be finite and >= 0, got " << c;
    throw DomainError(msg.str());
  }
  check_options(opts);

  const double mu = reaction.mu();
  const PhasePlaneRhs rhs{c, &law, &reaction};
  auto stepper = make_stepper(opts);

  ShootTrajectory traj;
  traj.c = c;
  traj.r.push_back(-1.0);
  traj.z.push_back(0.0);

  State x{0.0};
  double r = -1.0;
  double dt = opts.first_step;
  while (r < 1.0) {
    dt = std::min({dt, opts.max_step, 1.0 - r});
    const double r_before = r;
    const auto res = stepper.try_step(rhs, x, r, dt);
    if (res == odeint::fail) {
      if (dt < opts.min_step) {
        std::ostringstream msg;
        msg << "shoot: step size underflow at r = " << r << " (c = " << c << ")";
        throw NumericError(msg.str(), r);
      }
      continue;
    }
    if (1.0 - r < 1e-14) r = 1.0;
    traj.r.push_back(r);
    traj.z.push_back(x[0]);
    if (traj.r.size() > opts.max_nodes) {
      throw NumericError("shoot: node budget exhausted", r);
    }
    if (opts.early_exit && r < 1.0 && x[0] <= 0.0 && r >= -mu && r > r_before) {
      traj.early_negative_at = r;
      const double r0 = r;
      const double z0 = x[0];
      for (int k = 1; k <= kContinuationNodes; ++k) {
        const double rk =
            k == kContinuationNodes ? 1.0 : r0 + (1.0 - r0) * k / kContinuationNodes;
        traj.r.push_back(rk);
        traj.z.push_back(linear_continuation(reaction, r0, z0, rk));
      }
      break;
    }
  }
  traj.terminal = traj.z.back();
  return traj;
}

double trajectory_value(const ShootTrajectory& traj, double r,
                        const DiffusionLaw& law, const ReactionLaw& reaction,
                        const IntegratorOptions& opts) {
  if (!(r >= -1.0 && r <= 1.0)) {
    std::ostringstream msg;
    msg << "trajectory_value: r = " << r << " outside [-1, 1]";
    throw DomainError(msg.str());
  }
  if (traj.r.empty()) throw InconsistentInputError("trajectory_value: empty trajectory");
  if (traj.early_negative_at && r >= *traj.early_negative_at) {
    const double r0 = *traj.early_negative_at;
    const auto it = std::lower_bound(traj.r.begin(), traj.r.end(), r0);
    const double z0 = traj.z[static_cast<std::size_t>(it - traj.r.begin())];
    return linear_continuation(reaction, r0, z0, r);
  }
  auto it = std::upper_bound(traj.r.begin(), traj.r.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - traj.r.begin()) - 1;
  if (traj.r[i] == r) return traj.z[i];

  const PhasePlaneRhs rhs{traj.c, &law, &reaction};
  State x{traj.z[i]};
  const double span = r - traj.r[i];
  odeint::integrate_adaptive(make_stepper(opts), rhs, x, traj.r[i], r,
                             std::min(span, opts.max_step));
  return x[0];
}

CriticalSpeedResult find_critical_speed(const DiffusionLaw& law,
                                        const ReactionLaw& reaction,
                                        const SolverOptions& opts) {
  if (!(opts.c_tol > 0.0) || !(opts.z_tol >= 0.0) || !(opts.c_max > 0.0)) {
    throw DomainError("find_critical_speed: invalid tolerances");
  }
  const auto report = validate_kpp(reaction);
  if (!report.passed) {
    const auto* fail = report.first_failure();
    throw DomainError("find_critical_speed: reaction is not bistable (" +
                      fail->name + ": " + fail->detail + ")");
  }

  CriticalSpeedResult out;
  if (report.stationary) {
    out.stationary = true;
    out.trajectory = shoot(0.0, law, reaction, opts.integrator);
    return out;
  }

  auto terminal = [&](double c) {
    return shoot(c, law, reaction, opts.integrator).terminal;
  };

  // Sign of z_c(1). Inside the ±z_tol band the coarse value cannot be
  // trusted (for p > 2 z_c(1) is very flat in c), so re-shoot with tighter
  // tolerances; 0 means still critical.
  IntegratorOptions fine = opts.integrator;
  fine.rtol *= 1e-2;
  fine.atol *= 1e-2;
  auto classify = [&](double c) {
    double t = terminal(c);
    if (std::fabs(t) <= opts.z_tol) {
      t = shoot(c, law, reaction, fine).terminal;
      if (std::fabs(t) <= 1e-3 * opts.z_tol) return 0;
    }
    return t > 0.0 ? 1 : -1;
  };

  double lo = 0.0;
  double hi = 1.0;
  int iterations = 0;
  for (double t = terminal(hi); t >= -opts.z_tol; t = terminal(hi)) {
    ++iterations;
    if (t > opts.z_tol) lo = hi;
    hi *= 2.0;
    if (hi > opts.c_max) {
      std::ostringstream msg;
      msg << "find_critical_speed: no upper bracket below c_max = " << opts.c_max;
      throw NumericError(msg.str(), hi);
    }
  }

  while (hi - lo > opts.c_tol && iterations < opts.max_iterations) {
    ++iterations;
    const double mid = 0.5 * (lo + hi);
    const int side = classify(mid);
    if (side > 0) {
      lo = mid;
    } else if (side < 0) {
      hi = mid;
    } else {
      // Inside the critical band: keep mid bracketed and shrink around it.
      const double quarter = 0.25 * (hi - lo);
      lo = std::max(lo, mid - quarter);
      hi = std::min(hi, mid + quarter);
    }
  }
  if (hi - lo > opts.c_tol) {
    throw NumericError("find_critical_speed: bisection did not converge", lo);
  }

  out.c_star = 0.5 * (lo + hi);
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  out.iterations = iterations;
  out.trajectory = shoot(out.c_star, law, reaction, opts.integrator);
  return out;
}

double dissipation_integral(const ShootTrajectory& traj,
                            const DiffusionLaw& law,
                            const ReactionLaw& reaction,
                            const IntegratorOptions& opts) {
  using Gauss = boost::math::quadrature::gauss<double, 7>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < traj.r.size(); ++i) {
    const double a = traj.r[i];
    const double b = traj.r[i + 1];
    if (traj.early_negative_at && a >= *traj.early_negative_at) break;
    if (b <= a) continue;
    total += Gauss::integrate(
        [&](double r) {
          return law.H(trajectory_value(traj, r, law, reaction, opts));
        },
        a, b);
  }
  return total;
}

double speed_identity_residual(const CriticalSpeedResult& result,
                               const DiffusionLaw& law,
                               const ReactionLaw& reaction,
                               const IntegratorOptions& opts) {
  if (!(result.c_star > 0.0)) {
    throw DomainError(
        "speed_identity_residual: c* = 0, the identity degenerates to 0 = 0");
  }
  const double mass = reaction.mass();
  const double integral = dissipation_integral(result.trajectory, law, reaction, opts);
  return std::fabs(result.c_star * integral - mass) / mass;
}

}  // namespace kpp
