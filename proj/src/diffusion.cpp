#include "kpp/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kpp/detail/roots.hpp"
#include "kpp/errors.hpp"

namespace kpp {
namespace {

void require_finite_nonneg(double v, const char* op) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string(op) + ": non-finite argument");
  }
  if (v < 0.0) {
    std::ostringstream msg;
    msg << op << ": negative argument " << v;
    throw DomainError(msg.str());
  }
}

// z^e with the common integer exponents special-cased; the simulator calls
// this in its inner loop.
inline double power(double z, double e) {
  if (e == 1.0) return z;
  if (e == 2.0) return z * z;
  if (e == 0.5) return std::sqrt(z);
  return std::pow(z, e);
}

double conjugate_exponent(double p) { return p / (p - 1.0); }

}  // namespace

DiffusionLaw DiffusionLaw::p_laplacian(double p) {
  if (!std::isfinite(p) || p <= 1.0) {
    std::ostringstream msg;
    msg << "p_laplacian: exponent must be > 1, got " << p;
    throw DomainError(msg.str());
  }
  return DiffusionLaw(PLaplacian{p}, p - 1.0, p - 1.0);
}

DiffusionLaw DiffusionLaw::sum(std::vector<PowerTerm> terms) {
  if (terms.empty()) throw DomainError("sum: no terms");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& t : terms) {
    if (!std::isfinite(t.weight) || t.weight <= 0.0 || !std::isfinite(t.p) ||
        t.p <= 1.0) {
      std::ostringstream msg;
      msg << "sum: invalid term (weight " << t.weight << ", p " << t.p
          << "); need weight > 0 and p > 1";
      throw DomainError(msg.str());
    }
    lo = std::min(lo, t.p - 1.0);
    hi = std::max(hi, t.p - 1.0);
  }
  return DiffusionLaw(Sum{std::move(terms)}, lo, hi);
}

DiffusionLaw regularize(const DiffusionLaw& law, double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    std::ostringstream msg;
    msg << "regularize: alpha must be > 0, got " << alpha;
    throw DomainError(msg.str());
  }
  auto base = std::make_shared<const DiffusionLaw>(law);
  const double g_alpha = base->g(alpha);
  const double slope = g_alpha / alpha;
  const double shift = 0.5 * alpha * g_alpha - base->potential(alpha);
  return DiffusionLaw(
      DiffusionLaw::Regularized{std::move(base), alpha, slope, shift},
      std::min(1.0, law.lambda1()), std::max(1.0, law.lambda2()));
}

double DiffusionLaw::alpha() const noexcept {
  if (const auto* r = std::get_if<Regularized>(&kind_)) return r->alpha;
  return 0.0;
}

double DiffusionLaw::g(double z) const {
  require_finite_nonneg(z, "g");
  if (const auto* pl = std::get_if<PLaplacian>(&kind_)) {
    return power(z, pl->p - 1.0);
  }
  if (const auto* r = std::get_if<Regularized>(&kind_)) {
    return z <= r->alpha ? r->slope * z : r->base->g(z);
  }
  double acc = 0.0;
  for (const auto& t : std::get<Sum>(kind_).terms) {
    acc += t.weight * power(z, t.p - 1.0);
  }
  return acc;
}

double DiffusionLaw::g_signed(double s) const {
  return s < 0.0 ? -g(-s) : g(s);
}

double DiffusionLaw::g_prime(double z) const {
  require_finite_nonneg(z, "g_prime");
  auto term = [](double w, double p, double z) {
    if (p == 2.0) return w;
    if (z == 0.0) {
      return p < 2.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return w * (p - 1.0) * std::pow(z, p - 2.0);
  };
  if (const auto* pl = std::get_if<PLaplacian>(&kind_)) {
    return term(1.0, pl->p, z);
  }
  if (const auto* r = std::get_if<Regularized>(&kind_)) {
    return z < r->alpha ? r->slope : r->base->g_prime(z);
  }
  double acc = 0.0;
  for (const auto& t : std::get<Sum>(kind_).terms) acc += term(t.weight, t.p, z);
  return acc;
}

double DiffusionLaw::potential(double s) const {
  if (!std::isfinite(s)) throw DomainError("potential: non-finite argument");
  s = std::fabs(s);
  if (const auto* pl = std::get_if<PLaplacian>(&kind_)) {
    return std::pow(s, pl->p) / pl->p;
  }
  if (const auto* r = std::get_if<Regularized>(&kind_)) {
    return s <= r->alpha ? 0.5 * r->slope * s * s
                         : r->base->potential(s) + r->shift;
  }
  double acc = 0.0;
  for (const auto& t : std::get<Sum>(kind_).terms) {
    acc += t.weight * std::pow(s, t.p) / t.p;
  }
  return acc;
}

double DiffusionLaw::psi(double t) const {
  require_finite_nonneg(t, "psi");
  if (const auto* pl = std::get_if<PLaplacian>(&kind_)) {
    return power(t, 1.0 / (pl->p - 1.0));
  }
  if (const auto* r = std::get_if<Regularized>(&kind_)) {
    return t <= r->slope * r->alpha ? t / r->slope : r->base->psi(t);
  }
  return detail::invert_increasing([this](double s) { return g(s); }, t);
}

double DiffusionLaw::Psi(double t) const {
  require_finite_nonneg(t, "Psi");
  if (const auto* pl = std::get_if<PLaplacian>(&kind_)) {
    const double q = conjugate_exponent(pl->p);
    return std::pow(t, q) / q;
  }
  if (const auto* r = std::get_if<Regularized>(&kind_)) {
    return t <= r->slope * r->alpha ? 0.5 * t * t / r->slope
                                    : r->base->Psi(t) - r->shift;
  }
  const double s = psi(t);
  return t * s - potential(s);
}

double DiffusionLaw::contact(double s) const { return s * g(s) - potential(s); }

double DiffusionLaw::contact_inverse(double y) const {
  if (y <= 0.0) return 0.0;
  if (const auto* pl = std::get_if<PLaplacian>(&kind_)) {
    const double q = conjugate_exponent(pl->p);
    return power(q * y, 1.0 / pl->p);
  }
  if (const auto* r = std::get_if<Regularized>(&kind_)) {
    const double knee = 0.5 * r->slope * r->alpha * r->alpha;
    return y <= knee ? std::sqrt(2.0 * y / r->slope)
                     : r->base->contact_inverse(y + r->shift);
  }
  return detail::invert_increasing([this](double s) { return contact(s); }, y);
}

double DiffusionLaw::H(double y) const {
  if (!std::isfinite(y)) throw DomainError("H: non-finite argument");
  return contact_inverse(std::max(y, 0.0));
}

double DiffusionLaw::Psi_inverse(double y) const {
  require_finite_nonneg(y, "Psi_inverse");
  if (const auto* pl = std::get_if<PLaplacian>(&kind_)) {
    const double q = conjugate_exponent(pl->p);
    return std::pow(q * y, 1.0 / q);
  }
  return g(contact_inverse(y));
}

double DiffusionLaw::max_g_prime(double z_max) const {
  require_finite_nonneg(z_max, "max_g_prime");
  return max_g_prime_on(0.0, z_max);
}

double DiffusionLaw::max_g_prime_on(double z_lo, double z_hi) const {
  if (const auto* r = std::get_if<Regularized>(&kind_)) {
    if (z_hi <= r->alpha) return r->slope;
    const double base_max =
        r->base->max_g_prime_on(std::max(z_lo, r->alpha), z_hi);
    return z_lo < r->alpha ? std::max(r->slope, base_max) : base_max;
  }
  double best = std::max(g_prime(z_lo), g_prime(z_hi));
  if (std::holds_alternative<Sum>(kind_) && z_hi > z_lo) {
    // Mixed exponents need not be monotone in g′; sample log-spaced.
    const double a = std::max(z_lo, 1e-12 * std::max(1.0, z_hi));
    const int n = 256;
    for (int i = 0; i <= n; ++i) {
      const double z = a * std::pow(z_hi / a, static_cast<double>(i) / n);
      best = std::max(best, g_prime(z));
    }
  }
  return best;
}

}  // namespace kpp
