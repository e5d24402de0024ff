#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kpp/diffusion.hpp"
#include "kpp/pdesim.hpp"
#include "kpp/reaction.hpp"
#include "kpp/shooting.hpp"

namespace kpp {

struct DiffusionSpec {
  std::string kind = "p_laplacian";  // "p_laplacian" | "sum"
  double p = 2.0;
  std::vector<PowerTerm> terms;
  std::optional<double> alpha;

  DiffusionLaw build() const;
};

struct ReactionSpec {
  std::string kind = "double_well";  // "double_well" | "tabulated"
  double mu = -0.25;
  std::filesystem::path path;  // tabulated only; relative to the config file

  ReactionLaw build(const std::filesystem::path& base_dir) const;
};

struct ProfileSpec {
  double eta = 1e-4;
  int n_samples = 2001;
};

struct GridSpec {
  double x_min = -30.0;
  double x_max = 90.0;
  int n = 6001;
  std::string geometry = "line";  // "line" | "radial"
  int N = 2;

  Grid1D build() const;
};

struct SimSpec {
  double epsilon = 1.0;
  double alpha = 1e-3;
  double t_end = 120.0;
  /// Simulated time between stored snapshots; 0 disables snapshots.csv rows
  /// beyond the initial and final states.
  double snapshot_stride = 10.0;
  double fit_fraction = 0.5;
  double sample_interval = 0.5;
  /// Initial front position (plateau radius for radial grids).
  double center = 0.0;
};

struct RunConfig {
  DiffusionSpec diffusion;
  ReactionSpec reaction;
  SolverOptions solver;
  ProfileSpec profile;
  GridSpec grid;
  SimSpec sim;
  std::vector<double> sweep_epsilons{1.0, 0.5, 0.25};
  std::vector<double> regularization_alphas{1e-1, 1e-2, 1e-3, 1e-4};
  std::filesystem::path output = "out";
  /// Omit wall-clock timings from reports so reruns are byte-identical.
  bool deterministic = true;
  /// Directory that relative paths in the config resolve against.
  std::filesystem::path base_dir = ".";
};

/// Parses a TOML document. Unknown keys, wrong value types and out-of-range
/// values throw ConfigError naming the key and source line.
RunConfig parse_config(std::string_view text,
                       const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Serializes every effective option; parse_config of the result reproduces
/// the same configuration.
std::string to_toml(const RunConfig& config);

}  // namespace kpp
