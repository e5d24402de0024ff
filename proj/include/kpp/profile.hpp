#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "kpp/diffusion.hpp"
#include "kpp/reaction.hpp"
#include "kpp/shooting.hpp"

namespace kpp {

struct WaveResiduals {
  /// |c·∫|q_x|²dx − F(1)| / F(1); NaN for the stationary wave.
  double speed_identity = std::numeric_limits<double>::quiet_NaN();
  /// Sup-norm of the discrete wave equation, relative to max|f|.
  double ode = std::numeric_limits<double>::quiet_NaN();
  /// |q(0) − mu|.
  double normalization = std::numeric_limits<double>::quiet_NaN();
};

/// Spatial traveling-wave profile q(x), sampled with x increasing and q
/// strictly decreasing, over the truncated range q in [q_lo, q_hi].
struct WaveSolution {
  double c_star = 0.0;
  double mu = 0.0;
  std::vector<double> x;
  std::vector<double> q;
  std::vector<double> qx;
  double q_lo = -1.0;
  double q_hi = 1.0;
  WaveResiduals residuals;

  /// Builds a wave from raw samples; throws InconsistentInputError unless
  /// x is strictly increasing and q strictly decreasing.
  static WaveSolution from_samples(double c_star, double mu,
                                   std::vector<double> x, std::vector<double> q,
                                   std::vector<double> qx);

  /// Linear interpolation of q at x, clamped to the sampled range.
  double q_at(double x) const;
  std::size_t size() const noexcept { return x.size(); }
};

struct ReconstructOptions {
  /// Tolerances for re-shooting at c*; the tails need z resolved far below
  /// the shooting defaults.
  IntegratorOptions integrator{.rtol = 1e-11, .atol = 1e-18};
  /// Level placed at x = 0; defaults to mu.
  std::optional<double> anchor;
  double quad_tol = 1e-10;
};

/// Recovers q(x) from the phase-plane solution: |q_x| = H(z(−q)) and
/// x(q) = −∫_anchor^q ds / H(z(−s)), on q in [−1+eta, 1−eta].
WaveSolution reconstruct(const CriticalSpeedResult& result,
                         const DiffusionLaw& law, const ReactionLaw& reaction,
                         double eta = 1e-4, int n_samples = 2001,
                         const ReconstructOptions& opts = {});

/// Finite-difference sup-norm of (g(q_x))_x + c q_x + f(q) over interior
/// samples, divided by max|f| on [−1, 1].
double ode_residual(const WaveSolution& wave, const DiffusionLaw& law,
                    const ReactionLaw& reaction);

/// Trapezoidal ∫|q_x| dx over the samples; equals q_hi − q_lo in the limit.
double wave_mass(const WaveSolution& wave);

}  // namespace kpp
