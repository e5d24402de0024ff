#pragma once

// Deliberately naive reference solver for the phase-plane problem with a
// p-Laplacian law and the quartic double well. Shares no code with the
// library: fixed-step classical RK4, closed-form H, plain bisection on c.

#include <algorithm>
#include <cmath>

namespace oracle {

struct Problem {
  double p = 2.0;
  double mu = -0.25;
};

inline double well(double s, double mu) { return 2.0 * (s - mu) * (1.0 - s * s); }

// H(y) = (q y)^{1/p}, q = p/(p-1), for y >= 0.
inline double contact_speed(double y, double p) {
  const double q = p / (p - 1.0);
  return y > 0.0 ? std::pow(q * y, 1.0 / p) : 0.0;
}

// z(1) for speed c with `nodes` uniform RK4 steps over [-1, 1].
inline double terminal(const Problem& pr, double c, long nodes) {
  const double h = 2.0 / static_cast<double>(nodes);
  auto rhs = [&](double r, double z) {
    return well(-r, pr.mu) - c * contact_speed(std::max(z, 0.0), pr.p);
  };
  double z = 0.0;
  for (long i = 0; i < nodes; ++i) {
    const double r = -1.0 + h * static_cast<double>(i);
    const double k1 = rhs(r, z);
    const double k2 = rhs(r + 0.5 * h, z + 0.5 * h * k1);
    const double k3 = rhs(r + 0.5 * h, z + 0.5 * h * k2);
    const double k4 = rhs(r + h, z + h * k3);
    z += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
  }
  return z;
}

// sup{c : z_c(1) > 0} by bisection on [0, c_hi] to width `tol`.
inline double critical_speed(const Problem& pr, long nodes = 1'000'000,
                             double tol = 1e-10, double c_hi = 4.0) {
  double lo = 0.0, hi = c_hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (terminal(pr, mid, nodes) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
