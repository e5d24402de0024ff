#pragma once

#include <memory>
#include <utility>
#include <variant>
#include <vector>

namespace kpp {

/// One term w·|s|^p / p of a sum of p-Laplacian potentials.
struct PowerTerm {
  double weight;
  double p;
};

/// An admissible radially symmetric diffusion potential Φ(s) = Φ(|s|) in one
/// space dimension, together with its convex-conjugate machinery.
///
/// Naming, for s, z ≥ 0:
///   potential(s) = Φ(s)            flux g(z) = Φ'(z)
///   psi(t)       = g⁻¹(t)          Psi(t)    = sup_s (s·t − Φ(s))
///   H(y)         = psi(Psi⁻¹(y⁺))
///
/// Three families are supported: a single p-Laplacian, a positive sum of
/// p-Laplacians, and the quadratic regularization of another law, which is
/// linear in the flux on [0, α] and coincides with the base law beyond.
/// Values are immutable; copies share the regularization base.
class DiffusionLaw {
 public:
  struct PLaplacian {
    double p;
  };
  struct Sum {
    std::vector<PowerTerm> terms;
  };
  struct Regularized {
    std::shared_ptr<const DiffusionLaw> base;
    double alpha;
    double slope;  // g(alpha) / alpha
    double shift;  // conjugate offset between base and regularized law
  };
  using Kind = std::variant<PLaplacian, Sum, Regularized>;

  static DiffusionLaw p_laplacian(double p);
  static DiffusionLaw sum(std::vector<PowerTerm> terms);

  const Kind& kind() const noexcept { return kind_; }
  bool is_regularized() const noexcept {
    return std::holds_alternative<Regularized>(kind_);
  }
  /// Regularization threshold, 0 for unregularized laws.
  double alpha() const noexcept;

  /// Ellipticity bounds Λ₁ ≤ z·g′(z)/g(z) ≤ Λ₂.
  double lambda1() const noexcept { return lambda1_; }
  double lambda2() const noexcept { return lambda2_; }

  double g(double z) const;
  /// Odd extension sign(s)·g(|s|).
  double g_signed(double s) const;
  double g_prime(double z) const;
  double potential(double s) const;
  double psi(double t) const;
  double Psi(double t) const;
  double Psi_inverse(double y) const;
  double H(double y) const;

  /// Upper bound of g′ on [0, z_max].
  double max_g_prime(double z_max) const;

 private:
  DiffusionLaw(Kind kind, double lambda1, double lambda2)
      : kind_(std::move(kind)), lambda1_(lambda1), lambda2_(lambda2) {}

  // s ↦ s·g(s) − Φ(s); equals Psi(g(s)).
  double contact(double s) const;
  // Inverse of contact on [0, ∞); this is H on y ≥ 0.
  double contact_inverse(double y) const;
  double max_g_prime_on(double z_lo, double z_hi) const;

  friend DiffusionLaw regularize(const DiffusionLaw& law, double alpha);

  Kind kind_;
  double lambda1_;
  double lambda2_;
};

/// Quadratic regularization near zero gradient: the result has flux
/// g_α(z) = g(α)/α · z on [0, α] and g_α = g on [α, ∞).
DiffusionLaw regularize(const DiffusionLaw& law, double alpha);

}  // namespace kpp
