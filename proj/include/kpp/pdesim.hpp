#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpp/diffusion.hpp"
#include "kpp/reaction.hpp"

namespace kpp {

enum class Geometry { Line, Radial };

/// Uniform node-centred grid. Radial grids start at the axis r = 0 and carry
/// the space dimension N of the (N−1)/r term.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  int n = 3;
  Geometry geometry = Geometry::Line;
  int dimension = 1;

  static Grid1D line(double x_min, double x_max, int n);
  static Grid1D radial(double radius, int n, int dimension);

  double dx() const noexcept { return (x_max - x_min) / (n - 1); }
  double node(int i) const noexcept { return x_min + i * dx(); }
  /// Throws ConfigError on an inconsistent grid.
  void validate() const;
};

/// Solution of ∂_t u = div g(ε∇u) + f(u)/ε on a grid at time t.
struct SimState {
  Grid1D grid;
  std::vector<double> u;
  double t = 0.0;
  double epsilon = 1.0;
  double alpha = 0.0;
};

/// u(x) = −tanh((x − center)/ε): +1 behind the front, −1 ahead of it.
SimState tanh_front(const Grid1D& grid, double center, double epsilon,
                    double alpha);

struct StepOptions {
  /// Debug switch: drop the reaction term to check flux conservation.
  bool reaction = true;
};

/// Largest explicit step keeping the scheme monotone for the current state:
/// min of 0.4·dx²/(ε·max g′) (scaled by the stencil weight), 0.5·ε/L_f and
/// the combined diffusion-plus-reaction bound.
double stable_dt(const SimState& state, const DiffusionLaw& law,
                 const ReactionLaw& reaction, const StepOptions& opts = {});

/// One explicit conservative step. Throws ConfigError if dt exceeds
/// stable_dt or the law is not regularized.
SimState step(const SimState& state, const DiffusionLaw& law,
              const ReactionLaw& reaction, double dt,
              const StepOptions& opts = {});

struct FrontSample {
  double t;
  double x_front;
};

struct FrontTrace {
  std::vector<FrontSample> samples;
  double fitted_speed = 0.0;
  double fit_t_lo = 0.0;
  double fit_t_hi = 0.0;
  double fit_residual = 0.0;
  std::vector<std::string> warnings;
};

struct Snapshot {
  double t;
  std::vector<double> u;
};

struct FrontOptions {
  double t_end = 0.0;
  /// Level whose crossing defines the front; defaults to mu.
  std::optional<double> track_level;
  double fit_fraction = 0.5;
  /// Simulated time between front samples.
  double sample_interval = 0.5;
  /// Simulated time between stored snapshots; 0 disables them.
  double snapshot_interval = 0.0;
  /// Fraction of stable_dt actually used.
  double dt_safety = 1.0;
  StepOptions step;
};

struct FrontRun {
  FrontTrace trace;
  std::vector<Snapshot> snapshots;
  SimState final_state;
};

/// Position of the crossing of `level` by linear interpolation. With several
/// crossings the largest-x one is returned and `multiple` is set.
std::optional<double> locate_front(const SimState& state, double level,
                                   bool* multiple = nullptr);

/// Distance between the crossings of `hi` and `lo`.
double interface_width(const SimState& state, double hi = 0.9, double lo = -0.9);

/// Least-squares slope of x_front over samples with t in [t_lo, t_hi];
/// `residual` receives the RMS misfit.
double fit_front_speed(std::span<const FrontSample> samples, double t_lo,
                       double t_hi, double* residual = nullptr);

/// Steps to t_end, sampling the front position, and fits its speed on the
/// trailing fit_fraction of samples.
FrontRun run_front(const SimState& initial, const DiffusionLaw& law,
                   const ReactionLaw& reaction, const FrontOptions& opts);

/// Shared setup of one front simulation; epsilon_sweep varies epsilon.
struct FrontConfig {
  Grid1D grid;
  DiffusionLaw law;
  ReactionLaw reaction;
  FrontOptions front;
  /// Initial front location (plateau radius for radial grids).
  double center = 0.0;
};

struct SweepRow {
  double epsilon;
  double fitted_speed;
  double interface_width;
};

/// Runs one front simulation per epsilon on the scaled equation, with up to
/// `workers` running concurrently. Rows come back in input order.
std::vector<SweepRow> epsilon_sweep(const FrontConfig& config,
                                    std::span<const double> epsilons,
                                    int workers = 1);

}  // namespace kpp
