#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kpp {

/// One checked condition of a ValidationReport.
struct ValidationCheck {
  std::string name;
  bool passed = true;
  bool required = true;
  std::string detail;
  std::optional<double> witness;  // sample point that violated the condition
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool passed = true;
  /// F(1) = 0: the front is stationary, speed zero.
  bool stationary = false;
  double mass = 0.0;  // F(1)
  double lipschitz_estimate = 0.0;

  /// First failed required check, if any.
  const ValidationCheck* first_failure() const;
};

/// A bistable reaction f on [-1, 1] with zeros at -1, mu, 1.
///
/// Three representations share one interface:
///  - the quartic double well f(s) = 2 (s - mu)(1 - s²) with closed-form F;
///  - tabulated samples, interpolated by a monotone piecewise cubic so no
///    zeros appear between samples of equal sign;
///  - an arbitrary callable.
/// F(r) is the primitive of f with F(-1) = 0.
class ReactionLaw {
 public:
  static ReactionLaw double_well(double mu);
  static ReactionLaw tabulated(std::vector<double> s, std::vector<double> f);
  /// Reads a CSV file with header `s,f` and strictly increasing s from -1 to 1.
  static ReactionLaw tabulated_csv(const std::filesystem::path& path);
  /// `lipschitz` may be omitted, in which case it is estimated on a fine grid.
  static ReactionLaw custom(std::function<double(double)> fn,
                            std::optional<double> lipschitz = std::nullopt);

  enum class Kind { DoubleWell, Tabulated, Custom };
  Kind kind() const noexcept;

  double f(double s) const;
  double F(double r) const;
  /// Interior zero; NaN when f does not change sign exactly once in (-1, 1).
  double mu() const noexcept;
  double lipschitz() const noexcept;
  double mass() const { return F(1.0); }

 private:
  struct Impl;
  explicit ReactionLaw(std::shared_ptr<const Impl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct ValidationOptions {
  bool require_positive_mass = false;
  /// Uniform sign-pattern grid on [-1, 1]; the three zeros are added.
  int grid_points = 2001;
  double zero_tol = 1e-12;
};

/// Checks the bistable structure: zeros at -1, mu, 1, the sign pattern,
/// F(1) - F(r) > 0 on (-1, 1), optionally F(1) > 0, and the Lipschitz bound.
ValidationReport validate_kpp(const ReactionLaw& law,
                              const ValidationOptions& opts = {});

}  // namespace kpp
