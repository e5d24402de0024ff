#include "kpp/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <variant>

#include <boost/math/special_functions/fpclassify.hpp>  // pchip.hpp uses isnan unqualified
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "kpp/detail/roots.hpp"
#include "kpp/errors.hpp"

namespace kpp {
namespace {

constexpr double kEdgeSlack = 1e-12;
constexpr int kScanPoints = 2001;
constexpr int kCustomKnots = 64;

double clamp_to_interval(double s, const char* op) {
  if (!std::isfinite(s) || s < -1.0 - kEdgeSlack || s > 1.0 + kEdgeSlack) {
    std::ostringstream msg;
    msg << op << ": argument " << s << " outside [-1, 1]";
    throw DomainError(msg.str());
  }
  return std::clamp(s, -1.0, 1.0);
}

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

// Interior zero from one sign change of fn along increasing nodes; NaN if the
// number of sign changes differs from one.
template <typename Fn>
double locate_sign_change(const Fn& fn, const std::vector<double>& nodes) {
  int last_sign = 0;
  double last_s = -1.0;
  int changes = 0;
  double lo = 0.0, hi = 0.0;
  std::optional<double> exact_zero;
  std::optional<double> pending_zero;
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    const double v = fn(nodes[i]);
    if (v == 0.0) {
      pending_zero = nodes[i];
      continue;
    }
    const int sign = v > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) {
      ++changes;
      lo = last_s;
      hi = nodes[i];
      exact_zero = pending_zero;
    }
    pending_zero.reset();
    last_sign = sign;
    last_s = nodes[i];
  }
  if (changes != 1) return std::numeric_limits<double>::quiet_NaN();
  if (exact_zero) return *exact_zero;
  const double f_lo = fn(lo);
  const double f_hi = fn(hi);
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      fn, lo, hi, f_lo, f_hi,
      [](double a, double b) { return std::fabs(a - b) <= 1e-15; }, iters);
  return 0.5 * (r.first + r.second);
}

std::vector<double> uniform_nodes(int n) {
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = -1.0 + 2.0 * i / (n - 1);
  return s;
}

template <typename Fn>
double estimate_lipschitz(const Fn& fn) {
  const auto s = uniform_nodes(20001);
  double best = 0.0;
  double prev = fn(s[0]);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double cur = fn(s[i]);
    best = std::max(best, std::fabs(cur - prev) / (s[i] - s[i - 1]));
    prev = cur;
  }
  // Secants on a grid underestimate the derivative peak by O(h).
  return 1.01 * best;
}

}  // namespace

struct ReactionLaw::Impl {
  struct DoubleWell {
    double mu;
  };
  struct Table {
    std::vector<double> knots;
    std::shared_ptr<Pchip> interp;
    std::vector<double> cumulative;  // F at knots
  };
  struct Callable {
    std::function<double(double)> fn;
    std::vector<double> knots;
    std::vector<double> cumulative;
  };

  std::variant<DoubleWell, Table, Callable> rep;
  double mu = std::numeric_limits<double>::quiet_NaN();
  double lipschitz = 0.0;

  double f(double s) const {
    if (const auto* dw = std::get_if<DoubleWell>(&rep)) {
      return 2.0 * (s - dw->mu) * (1.0 - s * s);
    }
    if (const auto* t = std::get_if<Table>(&rep)) return (*t->interp)(s);
    return std::get<Callable>(rep).fn(s);
  }

  double F(double r) const {
    if (const auto* dw = std::get_if<DoubleWell>(&rep)) {
      // Closed form of the quartic double well.
      const double m = dw->mu;
      const double d = r - m;
      const double F_mu = -0.5 * std::pow(1.0 + m, 3) * (1.0 - m / 3.0);
      const double minus_F = (r * r - 1.0) * d * d - 0.5 * d * d * d * d -
                             (2.0 / 3.0) * m * d * d * d - F_mu;
      return -minus_F;
    }
    if (const auto* t = std::get_if<Table>(&rep)) {
      // The interpolant is cubic per segment; 3-point Gauss is exact.
      const auto& k = t->knots;
      auto it = std::upper_bound(k.begin(), k.end(), r);
      std::size_t i = it == k.begin() ? 0 : static_cast<std::size_t>(it - k.begin()) - 1;
      if (i + 1 >= k.size()) i = k.size() - 2;
      const double part = boost::math::quadrature::gauss<double, 3>::integrate(
          [&](double s) { return (*t->interp)(s); }, k[i], r);
      return t->cumulative[i] + part;
    }
    const auto& c = std::get<Callable>(rep);
    const double h = 2.0 / (c.knots.size() - 1);
    std::size_t i = static_cast<std::size_t>(std::floor((r + 1.0) / h));
    if (i + 1 >= c.knots.size()) i = c.knots.size() - 2;
    return c.cumulative[i] + integrate_callable(c.fn, c.knots[i], r);
  }

  static double integrate_callable(const std::function<double(double)>& fn,
                                   double a, double b) {
    if (a == b) return 0.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    double err = 0.0;
    // One panel first: on smooth pieces it is already at round-off, and the
    // adaptive path inflates its estimate when the relative tolerance sits
    // below round-off of a tiny integral.
    double v = GK::integrate(fn, a, b, 0, 0.0, &err);
    if (err <= 1e-14) return v;
    v = GK::integrate(fn, a, b, 15, 1e-11, &err);
    if (!(err <= 1e-10)) {
      std::ostringstream msg;
      msg << "F: quadrature error estimate " << err << " on [" << a << ", "
          << b << "]";
      throw NumericError(msg.str(), b);
    }
    return v;
  }
};

ReactionLaw ReactionLaw::double_well(double mu) {
  if (!std::isfinite(mu) || mu <= -1.0 || mu > 0.0) {
    std::ostringstream msg;
    msg << "double_well: mu must lie in (-1, 0], got " << mu;
    throw DomainError(msg.str());
  }
  auto impl = std::make_shared<Impl>();
  impl->rep = Impl::DoubleWell{mu};
  impl->mu = mu;
  // max |f'| on [-1, 1]; f'(s) = 2 + 4 mu s - 6 s² peaks in modulus at s = ±1.
  impl->lipschitz = 4.0 * (1.0 + std::fabs(mu));
  return ReactionLaw(std::move(impl));
}

ReactionLaw ReactionLaw::tabulated(std::vector<double> s, std::vector<double> f) {
  if (s.size() != f.size()) {
    throw DomainError("tabulated: s and f have different lengths");
  }
  if (s.size() < 4) throw DomainError("tabulated: need at least 4 samples");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]) || !std::isfinite(f[i])) {
      throw DomainError("tabulated: non-finite sample");
    }
    if (i > 0 && !(s[i] > s[i - 1])) {
      std::ostringstream msg;
      msg << "tabulated: s must be strictly increasing (row " << i << ")";
      throw DomainError(msg.str());
    }
  }
  if (s.front() != -1.0 || s.back() != 1.0) {
    throw DomainError("tabulated: s must run from -1 to 1");
  }

  Impl::Table table;
  table.knots = s;
  table.interp = std::make_shared<Pchip>(std::move(s), std::move(f));
  const auto& k = table.knots;
  table.cumulative.assign(k.size(), 0.0);
  for (std::size_t i = 1; i < k.size(); ++i) {
    table.cumulative[i] =
        table.cumulative[i - 1] +
        boost::math::quadrature::gauss<double, 3>::integrate(
            [&](double x) { return (*table.interp)(x); }, k[i - 1], k[i]);
  }

  auto impl = std::make_shared<Impl>();
  const auto interp = table.interp;
  const auto knots = table.knots;
  impl->rep = std::move(table);
  auto fn = [&interp](double x) { return (*interp)(x); };
  auto scan = uniform_nodes(kScanPoints);
  scan.insert(scan.end(), knots.begin(), knots.end());
  std::sort(scan.begin(), scan.end());
  scan.erase(std::unique(scan.begin(), scan.end()), scan.end());
  impl->mu = locate_sign_change(fn, scan);
  impl->lipschitz = estimate_lipschitz(fn);
  return ReactionLaw(std::move(impl));
}

ReactionLaw ReactionLaw::tabulated_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("tabulated_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw DomainError("tabulated_csv: empty file " + path.string());
  }
  line.erase(std::remove_if(line.begin(), line.end(),
                            [](unsigned char c) { return std::isspace(c); }),
             line.end());
  if (line != "s,f") {
    throw DomainError("tabulated_csv: expected header `s,f` in " + path.string());
  }
  std::vector<double> s, f;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string a, b;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b)) {
      throw DomainError("tabulated_csv: malformed row " + std::to_string(row));
    }
    try {
      s.push_back(std::stod(a));
      f.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw DomainError("tabulated_csv: non-numeric row " + std::to_string(row));
    }
  }
  return tabulated(std::move(s), std::move(f));
}

ReactionLaw ReactionLaw::custom(std::function<double(double)> fn,
                                std::optional<double> lipschitz) {
  if (!fn) throw DomainError("custom: empty callable");
  if (lipschitz && !(std::isfinite(*lipschitz) && *lipschitz >= 0.0)) {
    throw DomainError("custom: Lipschitz bound must be finite and >= 0");
  }
  Impl::Callable c;
  c.fn = fn;
  c.knots = uniform_nodes(kCustomKnots + 1);
  c.cumulative.assign(c.knots.size(), 0.0);
  for (std::size_t i = 1; i < c.knots.size(); ++i) {
    c.cumulative[i] = c.cumulative[i - 1] +
                      Impl::integrate_callable(c.fn, c.knots[i - 1], c.knots[i]);
  }
  auto impl = std::make_shared<Impl>();
  impl->rep = std::move(c);
  impl->mu = locate_sign_change(fn, uniform_nodes(kScanPoints));
  impl->lipschitz = lipschitz ? *lipschitz : estimate_lipschitz(fn);
  return ReactionLaw(std::move(impl));
}

ReactionLaw::Kind ReactionLaw::kind() const noexcept {
  switch (impl_->rep.index()) {
    case 0: return Kind::DoubleWell;
    case 1: return Kind::Tabulated;
    default: return Kind::Custom;
  }
}

double ReactionLaw::f(double s) const {
  return impl_->f(clamp_to_interval(s, "f"));
}

double ReactionLaw::F(double r) const {
  return impl_->F(clamp_to_interval(r, "F"));
}

double ReactionLaw::mu() const noexcept { return impl_->mu; }
double ReactionLaw::lipschitz() const noexcept { return impl_->lipschitz; }

const ValidationCheck* ValidationReport::first_failure() const {
  for (const auto& c : checks) {
    if (c.required && !c.passed) return &c;
  }
  return nullptr;
}

ValidationReport validate_kpp(const ReactionLaw& law,
                              const ValidationOptions& opts) {
  ValidationReport report;
  const double mu = law.mu();
  const int n = std::max(opts.grid_points, 3);

  std::vector<double> grid = uniform_nodes(n);

  {
    ValidationCheck c;
    c.name = "zeros";
    if (!std::isfinite(mu)) {
      c.passed = false;
      c.detail = "f does not change sign exactly once in (-1, 1)";
    } else {
      std::ostringstream d;
      for (const double s : {-1.0, mu, 1.0}) {
        const double v = law.f(s);
        if (std::fabs(v) > opts.zero_tol) {
          c.passed = false;
          c.witness = s;
          d << "f(" << s << ") = " << v << " != 0";
          break;
        }
      }
      if (c.passed) d << "f(-1) = f(" << mu << ") = f(1) = 0";
      c.detail = d.str();
    }
    report.checks.push_back(c);
  }

  {
    ValidationCheck c;
    c.name = "sign_pattern";
    if (std::isfinite(mu)) {
      for (int i = 1; i + 1 < n; ++i) {
        const double s = grid[i];
        if (s == mu) continue;
        const double v = law.f(s);
        const bool ok = s < mu ? v < 0.0 : v > 0.0;
        if (!ok) {
          c.passed = false;
          c.witness = s;
          std::ostringstream d;
          d << "f(" << s << ") = " << v << (s < mu ? " is not < 0" : " is not > 0");
          c.detail = d.str();
          break;
        }
      }
      if (c.passed) c.detail = "f < 0 on (-1, mu), f > 0 on (mu, 1)";
    } else {
      c.passed = false;
      c.detail = "no interior zero";
    }
    report.checks.push_back(c);
  }

  const double mass = law.F(1.0);
  report.mass = mass;
  const double mass_tol = 1e-10;
  {
    ValidationCheck c;
    c.name = "positive_mass";
    std::ostringstream d;
    d.precision(6);
    if (mass > mass_tol) {
      d << "F(1) = " << mass << " > 0";
    } else if (std::fabs(mass) <= mass_tol && !opts.require_positive_mass) {
      report.stationary = true;
      d << "F(1) = " << mass << " (stationary front, c = 0)";
    } else {
      c.passed = false;
      c.witness = 1.0;
      d << "F(1) = " << mass << " <= 0";
    }
    c.detail = d.str();
    report.checks.push_back(c);
  }

  {
    ValidationCheck c;
    c.name = "tail_mass";
    for (int i = 1; i + 1 < n; ++i) {
      const double r = grid[i];
      const double tail = mass - law.F(r);
      if (!(tail > 0.0)) {
        c.passed = false;
        c.witness = r;
        std::ostringstream d;
        d << "F(1) - F(" << r << ") = " << tail << " <= 0";
        c.detail = d.str();
        break;
      }
    }
    if (c.passed) c.detail = "F(1) - F(r) > 0 on (-1, 1)";
    report.checks.push_back(c);
  }

  {
    ValidationCheck c;
    c.name = "lipschitz";
    double est = 0.0;
    double prev = law.f(grid[0]);
    for (int i = 1; i < n; ++i) {
      const double cur = law.f(grid[i]);
      est = std::max(est, std::fabs(cur - prev) / (grid[i] - grid[i - 1]));
      prev = cur;
    }
    report.lipschitz_estimate = est;
    std::ostringstream d;
    d << "secant estimate " << est << ", declared " << law.lipschitz();
    if (est > law.lipschitz() * (1.0 + 1e-9)) {
      c.passed = false;
      d << " (exceeded)";
    }
    c.detail = d.str();
    report.checks.push_back(c);
  }

  report.passed = report.first_failure() == nullptr;
  return report;
}

}  // namespace kpp
