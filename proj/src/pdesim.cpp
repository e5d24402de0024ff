#include "kpp/pdesim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "kpp/errors.hpp"

namespace kpp {
namespace {

// Flux g_α evaluated inline for regularized power laws, which is what every
// simulation uses; anything else goes through DiffusionLaw.
class FluxKernel {
 public:
  explicit FluxKernel(const DiffusionLaw& law) : law_(&law) {
    if (const auto* r = std::get_if<DiffusionLaw::Regularized>(&law.kind())) {
      if (const auto* pl =
              std::get_if<DiffusionLaw::PLaplacian>(&r->base->kind())) {
        fast_ = true;
        alpha_ = r->alpha;
        slope_ = r->slope;
        exponent_ = pl->p - 1.0;
      }
    }
  }

  double operator()(double s) const {
    if (!fast_) return law_->g_signed(s);
    const double a = std::fabs(s);
    double v;
    if (a <= alpha_) {
      v = slope_ * a;
    } else if (exponent_ == 1.0) {
      v = a;
    } else if (exponent_ == 2.0) {
      v = a * a;
    } else {
      v = std::pow(a, exponent_);
    }
    return s < 0.0 ? -v : v;
  }

 private:
  const DiffusionLaw* law_;
  bool fast_ = false;
  double alpha_ = 0.0;
  double slope_ = 0.0;
  double exponent_ = 0.0;
};

class ReactionKernel {
 public:
  explicit ReactionKernel(const ReactionLaw& law)
      : law_(&law),
        double_well_(law.kind() == ReactionLaw::Kind::DoubleWell),
        mu_(law.mu()) {}

  double operator()(double s) const {
    if (double_well_) return 2.0 * (s - mu_) * (1.0 - s * s);
    return law_->f(std::clamp(s, -1.0, 1.0));
  }

 private:
  const ReactionLaw* law_;
  bool double_well_;
  double mu_;
};

// Face weights (r_{i±1/2}/r_i)^{N−1} of the radial divergence; all ones on a
// line. Node 0 of a radial grid uses the symmetric limit 2N·F_{1/2}/dx.
struct Stencil {
  std::vector<double> plus;
  std::vector<double> minus;
  double max_weight_sum = 2.0;

  explicit Stencil(const Grid1D& grid) : plus(grid.n, 1.0), minus(grid.n, 1.0) {
    const int n = grid.n;
    if (grid.geometry == Geometry::Line) {
      plus[0] = 2.0;
      minus[0] = 0.0;
      plus[n - 1] = 0.0;
      minus[n - 1] = 2.0;
      return;
    }
    const double dx = grid.dx();
    const int e = grid.dimension - 1;
    plus[0] = 2.0 * grid.dimension;
    minus[0] = 0.0;
    for (int i = 1; i < n; ++i) {
      const double r = i * dx;
      plus[i] = std::pow((r + 0.5 * dx) / r, e);
      minus[i] = std::pow((r - 0.5 * dx) / r, e);
    }
    // Mirror node beyond the outer boundary: F_{n-1/2} = -F_{n-3/2}.
    minus[n - 1] += plus[n - 1];
    plus[n - 1] = 0.0;
    max_weight_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      max_weight_sum = std::max(max_weight_sum, plus[i] + minus[i]);
    }
  }
};

class Stepper {
 public:
  Stepper(const Grid1D& grid, const DiffusionLaw& law,
          const ReactionLaw& reaction)
      : stencil_(grid), flux_(law), react_(reaction), faces_(grid.n - 1) {}

  double max_weight_sum() const { return stencil_.max_weight_sum; }

  void advance(const std::vector<double>& u, std::vector<double>& out,
               double dx, double dt, double epsilon, bool with_reaction) {
    const std::size_t n = u.size();
    const double scale = epsilon / dx;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      faces_[i] = flux_(scale * (u[i + 1] - u[i]));
    }
    const double k = dt / dx;
    const double kr = dt / epsilon;
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double right = i + 1 < n ? faces_[i] : 0.0;
      const double left = i > 0 ? faces_[i - 1] : 0.0;
      double v = u[i] + k * (stencil_.plus[i] * right - stencil_.minus[i] * left);
      if (with_reaction) v += kr * react_(u[i]);
      out[i] = std::clamp(v, -1.0, 1.0);
    }
  }

 private:
  Stencil stencil_;
  FluxKernel flux_;
  ReactionKernel react_;
  std::vector<double> faces_;
};

double max_jump(const std::vector<double>& u) {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    m = std::max(m, std::fabs(u[i + 1] - u[i]));
  }
  return m;
}

double stable_dt_impl(const SimState& state, const DiffusionLaw& law,
                      const ReactionLaw& reaction, bool with_reaction,
                      double weight_sum) {
  const double dx = state.grid.dx();
  const double eps = state.epsilon;
  const double z_max = eps * max_jump(state.u) / dx;
  const double gp = law.max_g_prime(z_max);
  if (!std::isfinite(gp)) {
    throw ConfigError("stable_dt: flux derivative unbounded near zero gradient; "
                      "regularize the diffusion law");
  }
  const double lf = with_reaction ? reaction.lipschitz() : 0.0;
  const double diff_rate = eps * gp * weight_sum / (dx * dx);
  double dt = std::numeric_limits<double>::infinity();
  if (diff_rate > 0.0) dt = std::min(dt, 0.8 / diff_rate);
  if (lf > 0.0) dt = std::min(dt, 0.5 * eps / lf);
  const double total = diff_rate + lf / eps;
  if (total > 0.0) dt = std::min(dt, 0.9 / total);
  return dt;
}

void check_state(const SimState& state, const DiffusionLaw& law) {
  state.grid.validate();
  if (state.u.size() != static_cast<std::size_t>(state.grid.n)) {
    throw ConfigError("SimState: u has wrong length for the grid");
  }
  if (!(state.epsilon > 0.0) || !std::isfinite(state.epsilon)) {
    throw ConfigError("SimState: epsilon must be > 0");
  }
  if (!law.is_regularized()) {
    throw ConfigError("simulation requires a regularized diffusion law (alpha > 0)");
  }
}

}  // namespace

Grid1D Grid1D::line(double x_min, double x_max, int n) {
  Grid1D g{x_min, x_max, n, Geometry::Line, 1};
  g.validate();
  return g;
}

Grid1D Grid1D::radial(double radius, int n, int dimension) {
  Grid1D g{0.0, radius, n, Geometry::Radial, dimension};
  g.validate();
  return g;
}

void Grid1D::validate() const {
  if (n < 3) throw ConfigError("grid: need n >= 3");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw ConfigError("grid: need finite x_min < x_max");
  }
  if (geometry == Geometry::Radial) {
    if (x_min != 0.0) throw ConfigError("grid: radial grids start at r = 0");
    if (dimension < 2) throw ConfigError("grid: radial geometry needs N >= 2");
  }
}

SimState tanh_front(const Grid1D& grid, double center, double epsilon,
                    double alpha) {
  grid.validate();
  SimState s;
  s.grid = grid;
  s.epsilon = epsilon;
  s.alpha = alpha;
  s.u.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    s.u[i] = -std::tanh((grid.node(i) - center) / epsilon);
  }
  return s;
}

double stable_dt(const SimState& state, const DiffusionLaw& law,
                 const ReactionLaw& reaction, const StepOptions& opts) {
  check_state(state, law);
  return stable_dt_impl(state, law, reaction, opts.reaction,
                        Stencil(state.grid).max_weight_sum);
}

SimState step(const SimState& state, const DiffusionLaw& law,
              const ReactionLaw& reaction, double dt, const StepOptions& opts) {
  check_state(state, law);
  Stepper stepper(state.grid, law, reaction);
  const double admissible = stable_dt_impl(state, law, reaction, opts.reaction,
                                           stepper.max_weight_sum());
  if (!(dt > 0.0) || dt > admissible * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "step: dt = " << dt << " violates the stability bound; admissible dt <= "
        << admissible;
    throw ConfigError(msg.str());
  }
  SimState next = state;
  stepper.advance(state.u, next.u, state.grid.dx(), dt, state.epsilon,
                  opts.reaction);
  next.t = state.t + dt;
  return next;
}

std::optional<double> locate_front(const SimState& state, double level,
                                   bool* multiple) {
  const auto& u = state.u;
  int crossings = 0;
  std::optional<double> last;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double a = u[i] - level;
    const double b = u[i + 1] - level;
    if ((a >= 0.0 && b < 0.0) || (a < 0.0 && b >= 0.0)) {
      ++crossings;
      const double t = a / (a - b);
      last = state.grid.node(static_cast<int>(i)) + t * state.grid.dx();
    }
  }
  if (multiple) *multiple = crossings > 1;
  return last;
}

double interface_width(const SimState& state, double hi, double lo) {
  const auto a = locate_front(state, hi);
  const auto b = locate_front(state, lo);
  if (!a || !b) throw NumericError("interface_width: level not crossed", state.t);
  return std::fabs(*b - *a);
}

double fit_front_speed(std::span<const FrontSample> samples, double t_lo,
                       double t_hi, double* residual) {
  double st = 0.0, sx = 0.0;
  int m = 0;
  for (const auto& s : samples) {
    if (s.t < t_lo || s.t > t_hi) continue;
    st += s.t;
    sx += s.x_front;
    ++m;
  }
  if (m < 2) throw NumericError("fit_front_speed: fewer than two samples in window", t_lo);
  const double tm = st / m;
  const double xm = sx / m;
  double stt = 0.0, stx = 0.0;
  for (const auto& s : samples) {
    if (s.t < t_lo || s.t > t_hi) continue;
    stt += (s.t - tm) * (s.t - tm);
    stx += (s.t - tm) * (s.x_front - xm);
  }
  const double slope = stx / stt;
  if (residual) {
    double ss = 0.0;
    for (const auto& s : samples) {
      if (s.t < t_lo || s.t > t_hi) continue;
      const double e = s.x_front - (xm + slope * (s.t - tm));
      ss += e * e;
    }
    *residual = std::sqrt(ss / m);
  }
  return slope;
}

FrontRun run_front(const SimState& initial, const DiffusionLaw& law,
                   const ReactionLaw& reaction, const FrontOptions& opts) {
  check_state(initial, law);
  if (!(opts.t_end > 0.0) || !std::isfinite(opts.t_end)) {
    throw DomainError("run_front: t_end must be > 0");
  }
  if (!(opts.fit_fraction > 0.0 && opts.fit_fraction <= 1.0)) {
    throw DomainError("run_front: fit_fraction must lie in (0, 1]");
  }
  if (!(opts.sample_interval > 0.0)) {
    throw DomainError("run_front: sample_interval must be > 0");
  }
  if (!(opts.dt_safety > 0.0 && opts.dt_safety <= 1.0)) {
    throw DomainError("run_front: dt_safety must lie in (0, 1]");
  }
  const double level = opts.track_level.value_or(reaction.mu());

  FrontRun run;
  SimState state = initial;
  std::vector<double> scratch;
  Stepper stepper(state.grid, law, reaction);
  const double dx = state.grid.dx();
  bool warned = false;

  auto record = [&]() {
    bool multiple = false;
    const auto x = locate_front(state, level, &multiple);
    if (!x) {
      std::ostringstream msg;
      msg << "run_front: front left the grid at t = " << state.t
          << "; enlarge the domain or shorten t_end";
      throw NumericError(msg.str(), state.t);
    }
    if (multiple && !warned) {
      std::ostringstream msg;
      msg << "multiple crossings of level " << level << " at t = " << state.t
          << "; tracking the largest";
      run.trace.warnings.push_back(msg.str());
      warned = true;
    }
    run.trace.samples.push_back({state.t, *x});
  };
  auto snapshot = [&]() { run.snapshots.push_back({state.t, state.u}); };

  record();
  if (opts.snapshot_interval > 0.0) snapshot();
  long sample_k = 1;
  long snap_k = 1;
  // Stop short of round-off slivers at each target time.
  const double slack = 1e-9 * opts.sample_interval;
  while (state.t < opts.t_end - slack) {
    const double next_sample =
        std::min(opts.t_end, static_cast<double>(sample_k) * opts.sample_interval);
    double next_snap = std::numeric_limits<double>::infinity();
    if (opts.snapshot_interval > 0.0) {
      next_snap = std::min(opts.t_end,
                           static_cast<double>(snap_k) * opts.snapshot_interval);
    }
    const double target = std::min(next_sample, next_snap);
    const double bound = stable_dt_impl(state, law, reaction, opts.step.reaction,
                                        stepper.max_weight_sum());
    double dt = opts.dt_safety * bound;
    if (state.t + dt >= target - slack) dt = target - state.t;
    stepper.advance(state.u, scratch, dx, dt, state.epsilon, opts.step.reaction);
    state.u.swap(scratch);
    state.t = state.t + dt >= target - slack ? target : state.t + dt;
    if (state.t == next_sample) {
      record();
      ++sample_k;
    }
    if (state.t == next_snap) {
      snapshot();
      ++snap_k;
    }
  }

  auto& tr = run.trace;
  const std::size_t n = tr.samples.size();
  std::size_t first = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (1.0 - opts.fit_fraction)));
  first = std::min(first, n >= 2 ? n - 2 : 0);
  tr.fit_t_lo = tr.samples[first].t;
  tr.fit_t_hi = tr.samples.back().t;
  tr.fitted_speed =
      fit_front_speed(tr.samples, tr.fit_t_lo, tr.fit_t_hi, &tr.fit_residual);
  run.final_state = std::move(state);
  return run;
}

std::vector<SweepRow> epsilon_sweep(const FrontConfig& config,
                                    std::span<const double> epsilons,
                                    int workers) {
  std::vector<SweepRow> rows(epsilons.size());
  for (const double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw DomainError("epsilon_sweep: every epsilon must be > 0");
    }
  }
  if (epsilons.empty()) return rows;

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    for (std::size_t i = next++; i < epsilons.size(); i = next++) {
      try {
        const double eps = epsilons[i];
        const SimState s0 =
            tanh_front(config.grid, config.center, eps, config.law.alpha());
        const FrontRun run = run_front(s0, config.law, config.reaction, config.front);
        rows[i] = {eps, run.trace.fitted_speed, interface_width(run.final_state)};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int pool = std::clamp(workers, 1, static_cast<int>(epsilons.size()));
  std::vector<std::thread> threads;
  for (int k = 1; k < pool; ++k) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace kpp
