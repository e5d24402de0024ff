#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <utility>

#include <boost/math/tools/toms748_solve.hpp>

#include "kpp/errors.hpp"

namespace kpp::detail {

/// Relative bracket-width termination test for TOMS748.
struct RelativeWidth {
  double rel;
  bool operator()(double a, double b) const {
    return std::fabs(a - b) <= rel * std::fmax(std::fabs(a), std::fabs(b));
  }
};

/// Solves fn(x) = target for x ≥ 0, where fn is continuous, strictly
/// increasing, unbounded and fn(0) = 0. The bracket starts at [0, 1] and its
/// upper end doubles until it overshoots the target (and its lower end halves
/// for small targets), then TOMS748 refines it to relative width `rel_tol`.
template <typename Fn>
double invert_increasing(const Fn& fn, double target, double rel_tol = 1e-13,
                         std::uintmax_t max_iter = 300) {
  if (!std::isfinite(target)) {
    throw DomainError("invert_increasing: non-finite target");
  }
  if (target <= 0.0) return 0.0;

  double hi = 1.0;
  double f_hi = fn(hi) - target;
  int doublings = 0;
  while (f_hi < 0.0) {
    hi *= 2.0;
    f_hi = fn(hi) - target;
    if (++doublings > 2000 || !std::isfinite(f_hi)) {
      throw NumericError("invert_increasing: no upper bracket", hi);
    }
  }
  double lo = 0.0;
  double f_lo = -target;
  if (doublings == 0) {
    // Tighten from below so relative termination is reachable for tiny roots.
    double cand = hi;
    for (int k = 0; k < 2000; ++k) {
      const double half = 0.5 * cand;
      if (half == 0.0) break;
      const double f_half = fn(half) - target;
      if (f_half < 0.0) {
        lo = half;
        f_lo = f_half;
        break;
      }
      hi = half;
      f_hi = f_half;
      cand = half;
    }
  } else {
    lo = 0.5 * hi;
    f_lo = fn(lo) - target;
  }
  if (f_hi == 0.0) return hi;
  if (f_lo == 0.0) return lo;

  std::uintmax_t iters = max_iter;
  auto shifted = [&](double x) { return fn(x) - target; };
  std::pair<double, double> r;
  try {
    r = boost::math::tools::toms748_solve(shifted, lo, hi, f_lo, f_hi,
                                          RelativeWidth{rel_tol}, iters);
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << "invert_increasing: root finder failed on [" << lo << ", " << hi
        << "]: " << e.what();
    throw NumericError(msg.str(), lo);
  }
  if (iters >= max_iter && !RelativeWidth{rel_tol}(r.first, r.second)) {
    std::ostringstream msg;
    msg << "invert_increasing: no convergence after " << iters
        << " iterations, bracket [" << r.first << ", " << r.second << "]";
    throw NumericError(msg.str(), r.first);
  }
  return 0.5 * (r.first + r.second);
}

}  // namespace kpp::detail
