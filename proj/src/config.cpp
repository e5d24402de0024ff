#include "kpp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "kpp/errors.hpp"

namespace kpp {
namespace {

std::string where(const toml::node& node) {
  const auto& src = node.source();
  if (!src.begin) return {};
  return " (line " + std::to_string(src.begin.line) + ")";
}

[[noreturn]] void bad(const toml::node& node, const std::string& key,
                      const std::string& what) {
  throw ConfigError("config: key '" + key + "'" + where(node) + ": " + what);
}

// One table of the schema. Rejects keys it was not told about.
class Section {
 public:
  Section(const toml::table& table, std::string prefix,
          std::initializer_list<std::string_view> allowed)
      : table_(table), prefix_(std::move(prefix)) {
    for (auto&& [key, node] : table) {
      if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
        bad(node, prefix_ + std::string(key.str()), "unknown key");
      }
    }
  }

  const toml::node* find(std::string_view key) const { return table_.get(key); }
  std::string path(std::string_view key) const { return prefix_ + std::string(key); }

  double number(std::string_view key, double fallback) const {
    const auto* n = find(key);
    if (!n) return fallback;
    if (!n->is_number()) bad(*n, path(key), "expected a number");
    const double v = *n->value<double>();
    if (!std::isfinite(v)) bad(*n, path(key), "must be finite");
    return v;
  }

  long long integer(std::string_view key, long long fallback) const {
    const auto* n = find(key);
    if (!n) return fallback;
    if (!n->is_integer()) bad(*n, path(key), "expected an integer");
    return *n->value<long long>();
  }

  std::string text(std::string_view key, std::string fallback) const {
    const auto* n = find(key);
    if (!n) return fallback;
    if (!n->is_string()) bad(*n, path(key), "expected a string");
    return *n->value<std::string>();
  }

  bool boolean(std::string_view key, bool fallback) const {
    const auto* n = find(key);
    if (!n) return fallback;
    if (!n->is_boolean()) bad(*n, path(key), "expected true or false");
    return *n->value<bool>();
  }

  std::vector<double> numbers(std::string_view key,
                              std::vector<double> fallback) const {
    const auto* n = find(key);
    if (!n) return fallback;
    const auto* arr = n->as_array();
    if (!arr || arr->empty()) bad(*n, path(key), "expected a non-empty array of numbers");
    std::vector<double> out;
    for (auto&& item : *arr) {
      if (!item.is_number()) bad(item, path(key), "array entries must be numbers");
      out.push_back(*item.value<double>());
    }
    return out;
  }

  const toml::table* sub(std::string_view key) const {
    const auto* n = find(key);
    if (!n) return nullptr;
    if (!n->is_table()) bad(*n, path(key), "expected a table");
    return n->as_table();
  }

 private:
  const toml::table& table_;
  std::string prefix_;
};

void require(bool ok, const Section& s, std::string_view key, const char* what) {
  if (ok) return;
  const auto* n = s.find(key);
  if (n) bad(*n, s.path(key), what);
  throw ConfigError("config: key '" + s.path(key) + "': " + what);
}

void read_diffusion(const toml::table& t, DiffusionSpec& d) {
  Section s(t, "diffusion.", {"kind", "p", "terms", "alpha"});
  d.kind = s.text("kind", d.kind);
  if (d.kind == "p_laplacian") {
    d.p = s.number("p", d.p);
    require(d.p > 1.0, s, "p", "p must exceed 1");
    if (s.find("terms")) bad(*s.find("terms"), "diffusion.terms", "only valid with kind = \"sum\"");
  } else if (d.kind == "sum") {
    const auto* n = s.find("terms");
    if (!n) throw ConfigError("config: key 'diffusion.terms': required for kind = \"sum\"");
    const auto* arr = n->as_array();
    if (!arr || arr->empty()) bad(*n, "diffusion.terms", "expected [[weight, p], ...]");
    d.terms.clear();
    for (auto&& item : *arr) {
      const auto* pair = item.as_array();
      if (!pair || pair->size() != 2 || !(*pair)[0].is_number() ||
          !(*pair)[1].is_number()) {
        bad(item, "diffusion.terms", "each term must be [weight, p]");
      }
      const PowerTerm term{*(*pair)[0].value<double>(), *(*pair)[1].value<double>()};
      if (!(term.weight > 0.0) || !(term.p > 1.0)) {
        bad(item, "diffusion.terms", "weights must be > 0 and exponents > 1");
      }
      d.terms.push_back(term);
    }
    if (s.find("p")) bad(*s.find("p"), "diffusion.p", "only valid with kind = \"p_laplacian\"");
  } else {
    require(false, s, "kind", "expected \"p_laplacian\" or \"sum\"");
  }
  if (s.find("alpha")) {
    d.alpha = s.number("alpha", 0.0);
    require(*d.alpha > 0.0, s, "alpha", "alpha must be positive");
  }
}

void read_reaction(const toml::table& t, ReactionSpec& r) {
  Section s(t, "reaction.", {"kind", "mu", "path"});
  r.kind = s.text("kind", r.kind);
  if (r.kind == "double_well") {
    r.mu = s.number("mu", r.mu);
    require(r.mu > -1.0 && r.mu <= 0.0, s, "mu", "mu must lie in (-1, 0]");
    if (s.find("path")) bad(*s.find("path"), "reaction.path", "only valid with kind = \"tabulated\"");
  } else if (r.kind == "tabulated") {
    if (!s.find("path")) throw ConfigError("config: key 'reaction.path': required for kind = \"tabulated\"");
    r.path = s.text("path", "");
    require(!r.path.empty(), s, "path", "path must not be empty");
    if (s.find("mu")) bad(*s.find("mu"), "reaction.mu", "only valid with kind = \"double_well\"");
  } else {
    require(false, s, "kind", "expected \"double_well\" or \"tabulated\"");
  }
}

void read_solver(const toml::table& t, SolverOptions& o) {
  Section s(t, "solver.", {"c_tol", "z_tol", "c_max", "rtol", "atol", "max_nodes"});
  o.c_tol = s.number("c_tol", o.c_tol);
  o.z_tol = s.number("z_tol", o.z_tol);
  o.c_max = s.number("c_max", o.c_max);
  o.integrator.rtol = s.number("rtol", o.integrator.rtol);
  o.integrator.atol = s.number("atol", o.integrator.atol);
  const long long nodes = s.integer("max_nodes", static_cast<long long>(o.integrator.max_nodes));
  require(o.c_tol > 0.0, s, "c_tol", "must be positive");
  require(o.z_tol > 0.0, s, "z_tol", "must be positive");
  require(o.c_max > 0.0, s, "c_max", "must be positive");
  require(o.integrator.rtol > 0.0, s, "rtol", "must be positive");
  require(o.integrator.atol > 0.0, s, "atol", "must be positive");
  require(nodes >= 16, s, "max_nodes", "must be at least 16");
  o.integrator.max_nodes = static_cast<std::size_t>(nodes);
}

void read_profile(const toml::table& t, ProfileSpec& p) {
  Section s(t, "profile.", {"eta", "n_samples"});
  p.eta = s.number("eta", p.eta);
  const long long n = s.integer("n_samples", p.n_samples);
  require(p.eta > 0.0 && p.eta < 0.5, s, "eta", "eta must lie in (0, 0.5)");
  require(n >= 5 && n <= 10'000'000, s, "n_samples", "must lie in [5, 1e7]");
  p.n_samples = static_cast<int>(n);
}

void read_grid(const toml::table& t, GridSpec& g) {
  Section s(t, "grid.", {"x_min", "x_max", "n", "geometry", "N"});
  g.geometry = s.text("geometry", g.geometry);
  require(g.geometry == "line" || g.geometry == "radial", s, "geometry",
          "expected \"line\" or \"radial\"");
  if (g.geometry == "radial") g.x_min = 0.0;
  g.x_min = s.number("x_min", g.x_min);
  g.x_max = s.number("x_max", g.x_max);
  const long long n = s.integer("n", g.n);
  const long long dim = s.integer("N", g.N);
  require(g.x_max > g.x_min, s, "x_max", "must exceed x_min");
  require(n >= 3 && n <= 100'000'000, s, "n", "must lie in [3, 1e8]");
  require(dim >= 1 && dim <= 16, s, "N", "must lie in [1, 16]");
  if (g.geometry == "radial") require(g.x_min == 0.0, s, "x_min", "radial grids start at 0");
  g.n = static_cast<int>(n);
  g.N = static_cast<int>(dim);
}

void read_sim(const toml::table& t, SimSpec& m) {
  Section s(t, "sim.", {"epsilon", "alpha", "t_end", "snapshot_stride",
                        "fit_fraction", "sample_interval", "center"});
  m.epsilon = s.number("epsilon", m.epsilon);
  m.alpha = s.number("alpha", m.alpha);
  m.t_end = s.number("t_end", m.t_end);
  m.snapshot_stride = s.number("snapshot_stride", m.snapshot_stride);
  m.fit_fraction = s.number("fit_fraction", m.fit_fraction);
  m.sample_interval = s.number("sample_interval", m.sample_interval);
  m.center = s.number("center", m.center);
  require(m.epsilon > 0.0, s, "epsilon", "must be positive");
  require(m.alpha > 0.0, s, "alpha", "must be positive");
  require(m.t_end >= 0.0, s, "t_end", "must be non-negative");
  require(m.snapshot_stride >= 0.0, s, "snapshot_stride", "must be non-negative");
  require(m.fit_fraction > 0.0 && m.fit_fraction <= 1.0, s, "fit_fraction",
          "must lie in (0, 1]");
  require(m.sample_interval > 0.0, s, "sample_interval", "must be positive");
}

std::vector<double> positive_list(const Section& s, std::string_view key,
                                  std::vector<double> fallback) {
  auto v = s.numbers(key, std::move(fallback));
  for (double x : v) require(x > 0.0, s, key, "entries must be positive");
  return v;
}

toml::array to_array(const std::vector<double>& v) {
  toml::array a;
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

DiffusionLaw DiffusionSpec::build() const {
  DiffusionLaw law = kind == "sum" ? DiffusionLaw::sum(terms)
                                   : DiffusionLaw::p_laplacian(p);
  if (alpha) law = regularize(law, *alpha);
  return law;
}

ReactionLaw ReactionSpec::build(const std::filesystem::path& base_dir) const {
  if (kind == "tabulated") {
    const auto full = path.is_absolute() ? path : base_dir / path;
    return ReactionLaw::tabulated_csv(full);
  }
  return ReactionLaw::double_well(mu);
}

Grid1D GridSpec::build() const {
  Grid1D g = geometry == "radial" ? Grid1D::radial(x_max, n, N)
                                  : Grid1D::line(x_min, x_max, n);
  g.validate();
  return g;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: parse error at line " << e.source().begin.line << ", column "
        << e.source().begin.column << ": " << e.description();
    throw ConfigError(msg.str());
  }

  RunConfig cfg;
  cfg.base_dir = base_dir;
  Section top(root, "", {"diffusion", "reaction", "solver", "profile", "grid",
                         "sim", "sweep", "regularization", "output",
                         "deterministic"});
  if (const auto* t = top.sub("diffusion")) read_diffusion(*t, cfg.diffusion);
  if (const auto* t = top.sub("reaction")) read_reaction(*t, cfg.reaction);
  if (const auto* t = top.sub("solver")) read_solver(*t, cfg.solver);
  if (const auto* t = top.sub("profile")) read_profile(*t, cfg.profile);
  if (const auto* t = top.sub("grid")) read_grid(*t, cfg.grid);
  if (const auto* t = top.sub("sim")) read_sim(*t, cfg.sim);
  if (const auto* t = top.sub("sweep")) {
    Section s(*t, "sweep.", {"epsilons"});
    cfg.sweep_epsilons = positive_list(s, "epsilons", cfg.sweep_epsilons);
  }
  if (const auto* t = top.sub("regularization")) {
    Section s(*t, "regularization.", {"alphas"});
    cfg.regularization_alphas = positive_list(s, "alphas", cfg.regularization_alphas);
  }
  cfg.output = top.text("output", cfg.output.string());
  cfg.deterministic = top.boolean("deterministic", cfg.deterministic);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto dir = path.parent_path();
  return parse_config(buf.str(), dir.empty() ? std::filesystem::path(".") : dir);
}

std::string to_toml(const RunConfig& c) {
  toml::table diffusion{{"kind", c.diffusion.kind}};
  if (c.diffusion.kind == "sum") {
    toml::array terms;
    for (const auto& t : c.diffusion.terms) terms.push_back(toml::array{t.weight, t.p});
    diffusion.insert("terms", std::move(terms));
  } else {
    diffusion.insert("p", c.diffusion.p);
  }
  if (c.diffusion.alpha) diffusion.insert("alpha", *c.diffusion.alpha);

  toml::table reaction{{"kind", c.reaction.kind}};
  if (c.reaction.kind == "tabulated") {
    reaction.insert("path", c.reaction.path.generic_string());
  } else {
    reaction.insert("mu", c.reaction.mu);
  }

  const auto& s = c.solver;
  toml::table root{
      {"output", c.output.generic_string()},
      {"deterministic", c.deterministic},
      {"diffusion", std::move(diffusion)},
      {"reaction", std::move(reaction)},
      {"solver",
       toml::table{{"c_tol", s.c_tol},
                   {"z_tol", s.z_tol},
                   {"c_max", s.c_max},
                   {"rtol", s.integrator.rtol},
                   {"atol", s.integrator.atol},
                   {"max_nodes", static_cast<int64_t>(s.integrator.max_nodes)}}},
      {"profile", toml::table{{"eta", c.profile.eta},
                              {"n_samples", c.profile.n_samples}}},
      {"grid", toml::table{{"x_min", c.grid.x_min},
                           {"x_max", c.grid.x_max},
                           {"n", c.grid.n},
                           {"geometry", c.grid.geometry},
                           {"N", c.grid.N}}},
      {"sim", toml::table{{"epsilon", c.sim.epsilon},
                          {"alpha", c.sim.alpha},
                          {"t_end", c.sim.t_end},
                          {"snapshot_stride", c.sim.snapshot_stride},
                          {"fit_fraction", c.sim.fit_fraction},
                          {"sample_interval", c.sim.sample_interval},
                          {"center", c.sim.center}}},
      {"sweep", toml::table{{"epsilons", to_array(c.sweep_epsilons)}}},
      {"regularization", toml::table{{"alphas", to_array(c.regularization_alphas)}}},
  };
  std::ostringstream out;
  out << root << "\n";
  return out.str();
}

}  // namespace kpp
