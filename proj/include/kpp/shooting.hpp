#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "kpp/diffusion.hpp"
#include "kpp/reaction.hpp"

namespace kpp {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double first_step = 1e-8;
  double max_step = 1e-2;
  double min_step = 1e-15;
  std::size_t max_nodes = 1'000'000;
  /// Stop once z <= 0 at r >= -mu and finish with the exact linear
  /// continuation z(1) = z(r) + F(-r).
  bool early_exit = true;
};

struct SolverOptions {
  IntegratorOptions integrator;
  double c_tol = 1e-8;
  double z_tol = 1e-9;
  double c_max = 1e6;
  int max_iterations = 500;
};

/// Solution of z' + c·H(z⁺) = f(-r), z(-1) = 0 on [-1, 1] for one speed c.
struct ShootTrajectory {
  double c = 0.0;
  std::vector<double> r;
  std::vector<double> z;
  double terminal = 0.0;
  /// First r >= -mu at which z became <= 0, when integration stopped there.
  std::optional<double> early_negative_at;
};

struct CriticalSpeedResult {
  double c_star = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int iterations = 0;
  bool stationary = false;
  ShootTrajectory trajectory;
};

/// Integrates the reflected phase-plane equation from r = -1 with an adaptive
/// Dormand–Prince 5(4) pair.
ShootTrajectory shoot(double c, const DiffusionLaw& law,
                      const ReactionLaw& reaction,
                      const IntegratorOptions& opts = {});

/// Value z_c(r) at an arbitrary r, obtained by integrating from the nearest
/// stored node at or below r.
double trajectory_value(const ShootTrajectory& traj, double r,
                        const DiffusionLaw& law, const ReactionLaw& reaction,
                        const IntegratorOptions& opts = {});

/// c* = sup{c >= 0 : z_c(1) > 0}, by upper-bracket doubling and bisection.
CriticalSpeedResult find_critical_speed(const DiffusionLaw& law,
                                        const ReactionLaw& reaction,
                                        const SolverOptions& opts = {});

/// ∫_{-1}^{1} H(z⁺(r)) dr over the trajectory, which is ∫|q_x|² dx of the wave.
double dissipation_integral(const ShootTrajectory& traj,
                            const DiffusionLaw& law,
                            const ReactionLaw& reaction,
                            const IntegratorOptions& opts = {});

/// |c*·∫|q_x|² dx − F(1)| / F(1). Throws DomainError when c* = 0.
double speed_identity_residual(const CriticalSpeedResult& result,
                               const DiffusionLaw& law,
                               const ReactionLaw& reaction,
                               const IntegratorOptions& opts = {});

}  // namespace kpp
