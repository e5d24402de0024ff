#include "kpp/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpp/errors.hpp"
#include "kpp/output.hpp"
#include "kpp/profile.hpp"

namespace kpp {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Inputs {
  DiffusionLaw law;
  ReactionLaw reaction;
};

// Problems building the laws are input problems, not solver failures.
Inputs build_inputs(const RunConfig& cfg) {
  try {
    return {cfg.diffusion.build(), cfg.reaction.build(cfg.base_dir)};
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json checks_json(const ValidationReport& r) {
  json arr = json::array();
  for (const auto& c : r.checks) {
    json j{{"name", c.name}, {"passed", c.passed}, {"required", c.required},
           {"detail", c.detail}};
    j["witness"] = c.witness ? json(*c.witness) : json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr;
}

json law_json(const RunConfig& cfg, const Inputs& in) {
  json d{{"kind", cfg.diffusion.kind}};
  if (cfg.diffusion.kind == "sum") {
    json terms = json::array();
    for (const auto& t : cfg.diffusion.terms) terms.push_back({t.weight, t.p});
    d["terms"] = std::move(terms);
  } else {
    d["p"] = cfg.diffusion.p;
  }
  d["alpha"] = in.law.is_regularized() ? json(in.law.alpha()) : json(nullptr);
  d["lambda1"] = in.law.lambda1();
  d["lambda2"] = in.law.lambda2();
  json r{{"kind", cfg.reaction.kind},
         {"mu", nan_to_null(in.reaction.mu())},
         {"F1", in.reaction.mass()},
         {"lipschitz", in.reaction.lipschitz()}};
  if (cfg.reaction.kind == "tabulated") r["path"] = cfg.reaction.path.generic_string();
  return {{"diffusion", std::move(d)}, {"reaction", std::move(r)}};
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void finish_report(json& report, const RunConfig& cfg, const Stopwatch& clock) {
  if (!cfg.deterministic) report["elapsed_seconds"] = clock.seconds();
  report["config"] = to_toml(cfg);
}

void write_json(const fs::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

std::string fixed10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f\n", v);
  return buf;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first
// failure after all threads stop.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

DiffusionLaw simulation_law(const RunConfig& cfg, const DiffusionLaw& law) {
  return law.is_regularized() ? law : regularize(law, cfg.sim.alpha);
}

FrontOptions front_options(const RunConfig& cfg) {
  FrontOptions o;
  o.t_end = cfg.sim.t_end;
  o.fit_fraction = cfg.sim.fit_fraction;
  o.sample_interval = cfg.sim.sample_interval;
  o.snapshot_interval = cfg.sim.snapshot_stride;
  return o;
}

void require_t_end(const RunConfig& cfg) {
  if (!(cfg.sim.t_end > 0.0)) {
    throw ConfigError("config: key 'sim.t_end': must be > 0 to run a simulation");
  }
}

}  // namespace

int cmd_validate(const RunConfig& cfg, std::ostream& log) {
  const Inputs in = build_inputs(cfg);
  const ValidationReport report = validate_kpp(in.reaction);
  bool ok = report.passed;
  for (const auto& c : report.checks) {
    log << (c.passed ? "PASS " : (c.required ? "FAIL " : "WARN ")) << c.name;
    if (!c.detail.empty()) log << ": " << c.detail;
    if (!c.passed && c.witness) log << " (at s = " << format_number(*c.witness) << ")";
    log << "\n";
  }

  // Diffusion invariants on a log-spaced sample of gradients.
  const auto& law = in.law;
  double ratio_lo = INFINITY, ratio_hi = -INFINITY, roundtrip = 0.0, fenchel = 0.0;
  for (int k = 0; k <= 120; ++k) {
    const double z = std::pow(10.0, -6.0 + 0.1 * k);
    const double gz = law.g(z);
    const double ratio = z * law.g_prime(z) / gz;
    ratio_lo = std::min(ratio_lo, ratio);
    ratio_hi = std::max(ratio_hi, ratio);
    const double t = gz;
    const double s = law.psi(t);
    roundtrip = std::max(roundtrip, std::fabs(law.g(s) - t) / std::max(1.0, t));
    const double Psi = law.Psi(t);
    fenchel = std::max(fenchel, std::fabs(Psi - (t * s - law.potential(s))) /
                                    std::max(1.0, std::fabs(Psi)));
  }
  auto line = [&](const char* name, bool pass, const std::string& detail) {
    log << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    ok = ok && pass;
  };
  const double slack = 1e-9;
  line("ellipticity",
       ratio_lo >= law.lambda1() - slack && ratio_hi <= law.lambda2() + slack,
       "z g'(z)/g(z) in [" + format_number(ratio_lo) + ", " + format_number(ratio_hi) +
           "], bounds [" + format_number(law.lambda1()) + ", " +
           format_number(law.lambda2()) + "]");
  line("psi_roundtrip", roundtrip <= 1e-12,
       "max |g(psi(t)) - t| = " + format_number(roundtrip));
  line("fenchel", fenchel <= 1e-12,
       "max |Psi(t) - (t psi(t) - Phi(psi(t)))| = " + format_number(fenchel));
  if (report.stationary) log << "note: F(1) = 0, the wave is stationary (c* = 0)\n";
  log << (ok ? "valid\n" : "invalid\n");
  return ok ? kExitOk : kExitFailed;
}

int cmd_wave(const CommandContext& ctx, std::ostream& log) {
  const Stopwatch clock;
  const auto& cfg = ctx.config;
  const Inputs in = build_inputs(cfg);
  const ValidationReport check = validate_kpp(in.reaction);
  if (!check.passed) {
    const auto* f = check.first_failure();
    log << "reaction rejected: " << f->name << ": " << f->detail << "\n";
    return kExitFailed;
  }

  const CriticalSpeedResult res = find_critical_speed(in.law, in.reaction, cfg.solver);
  const WaveSolution wave =
      reconstruct(res, in.law, in.reaction, cfg.profile.eta, cfg.profile.n_samples);

  // Tail behaviour as the truncation is refined tenfold; reported, not judged.
  json tails{{"eta", cfg.profile.eta},
             {"x_min", wave.x.front()},
             {"x_max", wave.x.back()}};
  const double eta_fine = cfg.profile.eta / 10.0;
  try {
    const WaveSolution fine = reconstruct(res, in.law, in.reaction, eta_fine, 201);
    tails["eta_refined"] = eta_fine;
    tails["x_min_refined"] = fine.x.front();
    tails["x_max_refined"] = fine.x.back();
  } catch (const std::exception& e) {
    tails["eta_refined"] = eta_fine;
    tails["refinement_error"] = e.what();
  }

  const fs::path& out = ctx.out_dir;
  write_atomic(out / "speed.txt", fixed10(res.c_star));
  write_atomic(out / "z.csv", csv_table({"r", "z"}, {res.trajectory.r, res.trajectory.z}));
  write_atomic(out / "profile.csv", csv_table({"x", "q", "qx"}, {wave.x, wave.q, wave.qx}));

  json report{{"command", "wave"}};
  report["law"] = law_json(cfg, in);
  report["validation"] = checks_json(check);
  report["c_star"] = res.c_star;
  report["stationary"] = res.stationary;
  report["bracket"] = {res.bracket_lo, res.bracket_hi};
  report["iterations"] = res.iterations;
  report["trajectory_nodes"] = res.trajectory.r.size();
  report["residuals"] = {{"speed_identity", nan_to_null(wave.residuals.speed_identity)},
                         {"ode", nan_to_null(wave.residuals.ode)},
                         {"normalization", nan_to_null(wave.residuals.normalization)}};
  report["profile"] = {{"n_samples", wave.size()},
                       {"q_lo", wave.q_lo},
                       {"q_hi", wave.q_hi},
                       {"mass", wave_mass(wave)}};
  report["tails"] = std::move(tails);
  finish_report(report, cfg, clock);
  write_json(out / "report.json", report);

  if (ctx.svg) {
    write_atomic(out / "profile.svg",
                 svg_line_plot({"traveling wave profile", "x", "q",
                                {{"q(x)", wave.x, wave.q}}}));
    write_atomic(out / "z.svg",
                 svg_line_plot({"phase-plane trajectory", "r", "z",
                                {{"z(r)", res.trajectory.r, res.trajectory.z}}}));
  }

  log << "c* = " << format_number(res.c_star) << (res.stationary ? " (stationary)" : "")
      << "\n";
  log << "residuals: speed identity " << format_number(wave.residuals.speed_identity)
      << ", ode " << format_number(wave.residuals.ode) << ", normalization "
      << format_number(wave.residuals.normalization) << "\n";
  log << "wrote " << out.string() << "\n";
  return kExitOk;
}

int cmd_simulate(const CommandContext& ctx, std::ostream& log) {
  const Stopwatch clock;
  const auto& cfg = ctx.config;
  require_t_end(cfg);
  const Inputs in = build_inputs(cfg);
  const DiffusionLaw law = simulation_law(cfg, in.law);
  const Grid1D grid = cfg.grid.build();

  const CriticalSpeedResult shot = find_critical_speed(law, in.reaction, cfg.solver);
  const SimState s0 = tanh_front(grid, cfg.sim.center, cfg.sim.epsilon, law.alpha());
  const FrontRun run = run_front(s0, law, in.reaction, front_options(cfg));
  const auto& tr = run.trace;

  std::vector<double> t, xf;
  for (const auto& s : tr.samples) {
    t.push_back(s.t);
    xf.push_back(s.x_front);
  }
  std::vector<Snapshot> snaps = run.snapshots;
  if (snaps.empty()) {
    snaps.push_back({s0.t, s0.u});
    snaps.push_back({run.final_state.t, run.final_state.u});
  }
  std::vector<double> st, sx, su;
  for (const auto& snap : snaps) {
    for (int i = 0; i < grid.n; ++i) {
      st.push_back(snap.t);
      sx.push_back(grid.node(i));
      su.push_back(snap.u[static_cast<std::size_t>(i)]);
    }
  }

  // Speeds over consecutive thirds of the run show acceleration or curvature
  // retardation.
  json windows = json::array();
  for (int k = 0; k < 3; ++k) {
    const double lo = cfg.sim.t_end * k / 3.0;
    const double hi = cfg.sim.t_end * (k + 1) / 3.0;
    const double v = fit_front_speed(tr.samples, lo, hi);
    windows.push_back({{"t_lo", lo}, {"t_hi", hi}, {"speed", v}});
  }

  const fs::path& out = ctx.out_dir;
  write_atomic(out / "front.csv", csv_table({"t", "x_front"}, {t, xf}));
  write_atomic(out / "snapshots.csv", csv_table({"t", "x", "u"}, {st, sx, su}));

  json report{{"command", "simulate"}};
  report["law"] = law_json(cfg, Inputs{law, in.reaction});
  report["geometry"] = cfg.grid.geometry;
  report["dimension"] = grid.geometry == Geometry::Radial ? grid.dimension : 1;
  report["epsilon"] = cfg.sim.epsilon;
  report["fitted_speed"] = tr.fitted_speed;
  report["c_star"] = shot.c_star;
  report["relative_difference"] =
      shot.c_star > 0.0 ? json(std::fabs(tr.fitted_speed - shot.c_star) / shot.c_star)
                        : json(nullptr);
  report["fit_window"] = {tr.fit_t_lo, tr.fit_t_hi};
  report["fit_residual"] = tr.fit_residual;
  report["window_speeds"] = std::move(windows);
  report["final_front"] = xf.back();
  report["interface_width"] = nan_to_null(interface_width(run.final_state));
  report["samples"] = tr.samples.size();
  report["warnings"] = tr.warnings;
  finish_report(report, cfg, clock);
  write_json(out / "report.json", report);

  if (ctx.svg) {
    std::vector<double> ref;
    for (double ti : t) ref.push_back(xf.front() + shot.c_star * ti);
    write_atomic(out / "front.svg",
                 svg_line_plot({"front position", "t", "x_front",
                                {{"simulation", t, xf}, {"c* t", t, ref}}}));
  }

  log << "fitted speed " << format_number(tr.fitted_speed) << ", c* "
      << format_number(shot.c_star) << "\n";
  for (const auto& w : tr.warnings) log << "warning: " << w << "\n";
  log << "wrote " << out.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const CommandContext& ctx, std::ostream& log) {
  const Stopwatch clock;
  const auto& cfg = ctx.config;
  require_t_end(cfg);
  const Inputs in = build_inputs(cfg);
  const DiffusionLaw law = simulation_law(cfg, in.law);
  const FrontConfig fc{cfg.grid.build(), law, in.reaction, front_options(cfg),
                       cfg.sim.center};
  const double c_star = find_critical_speed(law, in.reaction, cfg.solver).c_star;
  const auto rows = epsilon_sweep(fc, cfg.sweep_epsilons, ctx.workers);

  std::vector<double> eps, speed, width, ratio;
  json table = json::array();
  for (const auto& r : rows) {
    eps.push_back(r.epsilon);
    speed.push_back(r.fitted_speed);
    width.push_back(r.interface_width);
    ratio.push_back(r.interface_width / r.epsilon);
    table.push_back({{"epsilon", r.epsilon},
                     {"fitted_speed", r.fitted_speed},
                     {"interface_width", nan_to_null(r.interface_width)}});
  }
  const fs::path& out = ctx.out_dir;
  write_atomic(out / "sweep.csv",
               csv_table({"epsilon", "fitted_speed", "interface_width", "width_over_epsilon"},
                         {eps, speed, width, ratio}));
  json report{{"command", "sweep"}};
  report["law"] = law_json(cfg, Inputs{law, in.reaction});
  report["c_star"] = c_star;
  report["rows"] = std::move(table);
  finish_report(report, cfg, clock);
  write_json(out / "report.json", report);
  if (ctx.svg) {
    write_atomic(out / "sweep.svg",
                 svg_line_plot({"fitted speed against epsilon", "epsilon", "speed",
                                {{"fitted", eps, speed},
                                 {"c*", eps, std::vector<double>(eps.size(), c_star)}}}));
  }
  for (const auto& r : rows) {
    log << "epsilon " << format_number(r.epsilon) << ": speed "
        << format_number(r.fitted_speed) << ", width " << format_number(r.interface_width)
        << "\n";
  }
  log << "wrote " << out.string() << "\n";
  return kExitOk;
}

int cmd_regularization_study(const CommandContext& ctx, std::ostream& log) {
  const Stopwatch clock;
  const auto& cfg = ctx.config;
  RunConfig plain = cfg;
  plain.diffusion.alpha.reset();
  const Inputs in = build_inputs(plain);

  const auto& alphas = cfg.regularization_alphas;
  std::vector<double> c(alphas.size());
  double c_base = 0.0;
  parallel_for(alphas.size() + 1, ctx.workers, [&](std::size_t i) {
    if (i == alphas.size()) {
      c_base = find_critical_speed(in.law, in.reaction, cfg.solver).c_star;
    } else {
      c[i] = find_critical_speed(regularize(in.law, alphas[i]), in.reaction, cfg.solver)
                 .c_star;
    }
  });

  std::vector<double> gap(alphas.size(), std::nan("")), diff(alphas.size());
  bool decreasing = true;
  json table = json::array();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    diff[i] = c[i] - c_base;
    if (i > 0) gap[i] = std::fabs(c[i] - c[i - 1]);
    if (i > 1 && !(gap[i] < gap[i - 1])) decreasing = false;
    table.push_back({{"alpha", alphas[i]},
                     {"c_alpha", c[i]},
                     {"gap", nan_to_null(gap[i])},
                     {"difference_from_unregularized", diff[i]}});
  }

  const fs::path& out = ctx.out_dir;
  write_atomic(out / "regularization.csv",
               csv_table({"alpha", "c_alpha", "gap", "difference_from_unregularized"},
                         {alphas, c, gap, diff}));
  json report{{"command", "regularization-study"}};
  report["law"] = law_json(plain, in);
  report["c_unregularized"] = c_base;
  report["rows"] = std::move(table);
  report["gaps_strictly_decreasing"] = decreasing;
  report["final_gap"] = alphas.size() > 1 ? json(gap.back()) : json(nullptr);
  finish_report(report, cfg, clock);
  write_json(out / "report.json", report);
  if (ctx.svg) {
    std::vector<double> la;
    for (double a : alphas) la.push_back(std::log10(a));
    write_atomic(out / "regularization.svg",
                 svg_line_plot({"regularized critical speed", "log10 alpha", "c_alpha",
                                {{"c_alpha", la, c},
                                 {"unregularized", la,
                                  std::vector<double>(la.size(), c_base)}}}));
  }
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    log << "alpha " << format_number(alphas[i]) << ": c = " << format_number(c[i]) << "\n";
  }
  log << "unregularized c = " << format_number(c_base) << "; gaps "
      << (decreasing ? "strictly decreasing" : "NOT strictly decreasing") << "\n";
  log << "wrote " << out.string() << "\n";
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  CLI::App app{"Traveling-wave speeds and front simulations for degenerate bistable "
               "reaction-diffusion equations",
               "kppwave"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  int workers = 1;
  bool svg = false;
  app.add_option("--config", config_path, "TOML run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides `output` in the config)");
  app.add_option("--workers", workers, "worker threads for sweep subcommands (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--svg", svg, "also write SVG plots");

  auto* validate = app.add_subcommand("validate", "check the reaction and diffusion laws");
  auto* wave = app.add_subcommand("wave", "critical speed, phase-plane trajectory, profile");
  auto* simulate = app.add_subcommand("simulate", "PDE front simulation");
  auto* sweep = app.add_subcommand("sweep", "front simulations over sweep.epsilons");
  auto* reg = app.add_subcommand("regularization-study",
                                 "critical speed along regularization.alphas");
  for (auto* sub : {validate, wave, simulate, sweep, reg}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    CommandContext ctx;
    ctx.config = load_config(config_path);
    ctx.out_dir = out_dir.empty() ? ctx.config.output : fs::path(out_dir);
    ctx.workers = workers > 0 ? workers
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    ctx.svg = svg;
    if (*validate) return cmd_validate(ctx.config, log);
    if (*wave) return cmd_wave(ctx, log);
    if (*simulate) return cmd_simulate(ctx, log);
    if (*sweep) return cmd_sweep(ctx, log);
    return cmd_regularization_study(ctx, log);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  }
}

}  // namespace kpp
