#include "nsk/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "nsk/error.hpp"
#include "nsk/spectral.hpp"

namespace nsk {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

// Reads keys from one table and remembers which ones were consumed, so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const toml::table* t, std::string path) : t_(t), path_(std::move(path)) {}

  bool present() const { return t_ != nullptr; }

  Section sub(const std::string& key) {
    seen_.insert(key);
    if (!t_) return {nullptr, qualify(key)};
    const auto* node = t_->get(key);
    if (!node) return {nullptr, qualify(key)};
    if (!node->is_table()) fail(qualify(key) + " must be a table");
    return {node->as_table(), qualify(key)};
  }

  void get(const std::string& key, double& out) {
    if (const auto* n = node(key)) {
      if (auto v = n->value_exact<double>()) out = *v;
      else if (auto i = n->value_exact<std::int64_t>()) out = static_cast<double>(*i);
      else fail(qualify(key) + " must be a number");
    }
  }
  void get(const std::string& key, std::optional<double>& out) {
    if (node(key)) {
      double v = 0.0;
      get(key, v);
      out = v;
    }
  }
  void get(const std::string& key, int& out) {
    if (const auto* n = node(key)) {
      auto v = n->value_exact<std::int64_t>();
      if (!v) fail(qualify(key) + " must be an integer");
      if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max())
        fail(qualify(key) + " out of range");
      out = static_cast<int>(*v);
    }
  }
  void get(const std::string& key, std::optional<int>& out) {
    if (node(key)) {
      int v = 0;
      get(key, v);
      out = v;
    }
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const auto* n = node(key)) {
      auto v = n->value_exact<std::int64_t>();
      if (!v || *v < 0) fail(qualify(key) + " must be a non-negative integer");
      out = static_cast<std::uint64_t>(*v);
    }
  }
  void get(const std::string& key, bool& out) {
    if (const auto* n = node(key)) {
      auto v = n->value_exact<bool>();
      if (!v) fail(qualify(key) + " must be a boolean");
      out = *v;
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const auto* n = node(key)) {
      auto v = n->value_exact<std::string>();
      if (!v) fail(qualify(key) + " must be a string");
      out = *v;
    }
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (const auto* n = node(key)) {
      const auto* arr = n->as_array();
      if (!arr) fail(qualify(key) + " must be an array");
      out.clear();
      for (const auto& e : *arr) {
        if (auto v = e.value_exact<double>()) out.push_back(*v);
        else if (auto i = e.value_exact<std::int64_t>()) out.push_back(static_cast<double>(*i));
        else fail(qualify(key) + " must hold numbers");
      }
    }
  }
  void get(const std::string& key, std::array<int, 3>& out) {
    if (const auto* n = node(key)) {
      const auto* arr = n->as_array();
      if (!arr || arr->size() < 1 || arr->size() > 3) fail(qualify(key) + " must hold 1 to 3 integers");
      // fewer entries fill the trailing (used) axes
      out = {0, 0, 0};
      const std::size_t off = 3 - arr->size();
      for (std::size_t i = 0; i < arr->size(); ++i) {
        auto v = (*arr)[i].value_exact<std::int64_t>();
        if (!v) fail(qualify(key) + " must hold integers");
        out[off + i] = static_cast<int>(*v);
      }
    }
  }

  void finish() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_)
      if (!seen_.count(std::string(k.str()))) fail("unknown key " + qualify(std::string(k.str())));
  }

 private:
  const toml::node* node(const std::string& key) {
    seen_.insert(key);
    return t_ ? t_->get(key) : nullptr;
  }
  std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const toml::table* t_;
  std::string path_;
  std::set<std::string> seen_;
};

Profile parse_profile(const std::string& s) {
  if (s == "gaussian") return Profile::gaussian;
  if (s == "mode") return Profile::mode;
  if (s == "random") return Profile::random;
  if (s == "file") return Profile::file;
  fail("initial.profile must be gaussian, mode, random or file (got '" + s + "')");
}

Scheme parse_scheme(const std::string& s) {
  if (s == "etd1") return Scheme::etd1;
  if (s == "etd_rk2") return Scheme::etd_rk2;
  fail("stepper.scheme must be etd1 or etd_rk2 (got '" + s + "')");
}

std::string pressure_tag(PressureModel::Kind k) {
  switch (k) {
    case PressureModel::Kind::critical_quadratic: return "critical_quadratic";
    case PressureModel::Kind::van_der_waals: return "van_der_waals";
    case PressureModel::Kind::custom: return "custom";
  }
  return "";
}

void read_pressure(Section sec, PressureModel& p) {
  std::string model = pressure_tag(p.kind);
  sec.get("model", model);
  std::optional<double> theta, rho_max;
  double c = p.c, a = p.a, b = p.b;
  std::vector<double> coeffs = p.coefficients;
  sec.get("c", c);
  sec.get("a", a);
  sec.get("b", b);
  sec.get("theta", theta);
  sec.get("coefficients", coeffs);
  sec.get("rho_max", rho_max);
  double rho_min = p.rho_min;
  bool allow = p.allow_noncritical;
  sec.get("rho_min", rho_min);
  sec.get("allow_noncritical", allow);
  sec.finish();

  if (model == "critical_quadratic") {
    p = critical_quadratic(c);
  } else if (model == "van_der_waals") {
    if (!(b >= 0.0 && b < 1.0)) fail("params.pressure.b must lie in [0, 1)");
    p = theta ? van_der_waals(a, b, *theta) : van_der_waals(a, b);
  } else if (model == "custom") {
    p = custom_polynomial(coeffs);
  } else {
    fail("params.pressure.model must be critical_quadratic, van_der_waals or custom");
  }
  p.rho_min = rho_min;
  if (rho_max) p.rho_max = *rho_max;
  p.allow_noncritical = allow;
}

}  // namespace

std::string to_string(Profile p) {
  switch (p) {
    case Profile::gaussian: return "gaussian";
    case Profile::mode: return "mode";
    case Profile::random: return "random";
    case Profile::file: return "file";
  }
  return "";
}

std::string to_string(Scheme s) { return s == Scheme::etd1 ? "etd1" : "etd_rk2"; }

ExperimentConfig parse_config(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    fail(os.str());
  }

  ExperimentConfig c;
  Section top(&root, "");
  top.get("seed", c.seed);

  {
    auto s = top.sub("grid");
    s.get("dim", c.grid.dim);
    s.get("modes", c.grid.modes);
    s.get("length", c.grid.length);
    s.finish();
  }
  {
    auto s = top.sub("params");
    s.get("nu", c.params.nu);
    s.get("nu_tilde", c.params.nu_tilde);
    s.get("kappa", c.params.kappa);
    read_pressure(s.sub("pressure"), c.params.pressure);
    s.finish();
  }
  {
    auto s = top.sub("cutoff");
    s.get("r1", c.r1);
    s.get("r_inf", c.r_inf);
    s.finish();
  }
  {
    auto s = top.sub("stepper");
    std::string scheme = to_string(c.stepper.scheme);
    s.get("scheme", scheme);
    c.stepper.scheme = parse_scheme(scheme);
    s.get("dt", c.stepper.dt);
    s.get("t_end", c.stepper.t_end);
    s.get("adapt", c.stepper.adapt);
    s.get("target_error", c.stepper.target_error);
    s.get("dt_min", c.stepper.dt_min);
    s.get("dt_max", c.stepper.dt_max);
    s.get("amplitude_guard", c.stepper.amplitude_guard);
    s.get("nonlinear", c.stepper.nonlinear);
    s.get("sample_every", c.stepper.sample_every);
    s.get("blowup_factor", c.stepper.blowup_factor);
    s.finish();
  }
  {
    auto s = top.sub("initial");
    std::string profile = to_string(c.initial.profile);
    s.get("profile", profile);
    c.initial.profile = parse_profile(profile);
    s.get("amplitude", c.initial.amplitude);
    s.get("width", c.initial.width);
    s.get("derivative_form", c.initial.derivative_form);
    s.get("mode", c.initial.mode);
    s.get("file", c.initial.file);
    s.get("energy", c.initial.energy);
    s.finish();
  }
  {
    auto s = top.sub("analysis");
    s.get("s", c.analysis.s);
    s.get("kappa1", c.analysis.kappa1);
    s.get("C2", c.analysis.C2);
    s.finish();
  }
  {
    auto s = top.sub("picard");
    s.get("horizon", c.picard.horizon);
    s.get("intervals", c.picard.intervals);
    s.get("k_max", c.picard.k_max);
    s.get("stop_below", c.picard.stop_below);
    s.get("nonlinear", c.picard.nonlinear);
    s.finish();
  }
  {
    auto s = top.sub("linear_decay");
    s.get("t_min", c.linear_decay.t_min);
    s.get("t_max", c.linear_decay.t_max);
    s.get("samples", c.linear_decay.samples);
    s.get("fit_t_a", c.linear_decay.fit_t_a);
    s.get("fit_t_b", c.linear_decay.fit_t_b);
    s.get("tolerance", c.linear_decay.tolerance);
    s.finish();
  }
  {
    auto s = top.sub("validate");
    auto& v = c.validate;
    s.get("grid_modes", v.grid_modes);
    s.get("grid_length", v.grid_length);
    s.get("samples", v.samples);
    s.get("semigroup_tol", v.semigroup_tol);
    s.get("composition_tol", v.composition_tol);
    s.get("continuity_tol", v.continuity_tol);
    s.get("korteweg_tol", v.korteweg_tol);
    s.get("oracle_tol", v.oracle_tol);
    s.get("projection_tol", v.projection_tol);
    s.get("k12_margin", v.k12_margin);
    s.get("energy_samples", v.energy_samples);
    s.finish();
  }
  {
    auto s = top.sub("output");
    std::string dir = c.output_dir.string();
    s.get("dir", dir);
    c.output_dir = dir;
    s.finish();
  }
  top.finish();

  c.picard.amplitude_guard = c.stepper.amplitude_guard;
  c.picard.C2 = c.analysis.C2;
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  ExperimentConfig c = parse_config(os.str());
  // a relative data file is resolved against the config location
  if (c.initial.profile == Profile::file && std::filesystem::path(c.initial.file).is_relative())
    c.initial.file = (path.parent_path() / c.initial.file).string();
  return c;
}

void validate(const ExperimentConfig& c) {
  try {
    make_grid(c.grid.dim, c.grid.modes, c.grid.length);
    validate(c.params, c.grid.dim);
    validate(c.stepper);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    fail(e.what());
  }
  const double band = 3.14159265358979323846 * c.grid.modes / c.grid.length;
  if (!(c.r1 > 0.0 && c.r1 < c.r_inf))
    fail("cutoff radii must satisfy 0 < r1 < r_inf");
  if (c.r_inf > band) fail("cutoff r_inf exceeds the grid band pi N / L");

  const auto& in = c.initial;
  if (!(in.amplitude >= 0.0) || !std::isfinite(in.amplitude)) fail("initial.amplitude must be >= 0");
  if (!(in.width > 0.0)) fail("initial.width must be positive");
  if (in.profile == Profile::file && in.file.empty()) fail("initial.file is required for profile = file");
  if (in.energy && !(*in.energy >= 0.0)) fail("initial.energy must be >= 0");

  if (c.analysis.s && *c.analysis.s < 1) fail("analysis.s must be at least 1");
  if (c.analysis.kappa1 && !(*c.analysis.kappa1 > 0.0)) fail("analysis.kappa1 must be positive");
  if (!(c.analysis.C2 > 0.0)) fail("analysis.C2 must be positive");

  const auto& p = c.picard;
  if (!(p.horizon > 0.0) || p.intervals < 1 || p.k_max < 1 || !(p.stop_below >= 0.0))
    fail("picard needs horizon > 0, intervals >= 1, k_max >= 1, stop_below >= 0");

  const auto& d = c.linear_decay;
  if (!(d.t_min > 0.0 && d.t_max > d.t_min) || d.samples < 2)
    fail("linear_decay needs 0 < t_min < t_max and samples >= 2");
  if (!(d.fit_t_a >= 1.0 && d.fit_t_b > d.fit_t_a)) fail("linear_decay fit window needs 1 <= fit_t_a < fit_t_b");
  if (!(d.tolerance >= 0.0)) fail("linear_decay.tolerance must be >= 0");

  const auto& v = c.validate;
  if (v.grid_modes < 8 || v.grid_modes % 2 != 0 || !(v.grid_length > 0.0) || v.samples < 1 ||
      v.energy_samples < 1)
    fail("validate grid and sample counts out of range");
  for (double t : {v.semigroup_tol, v.composition_tol, v.continuity_tol, v.korteweg_tol, v.oracle_tol,
                   v.projection_tol, v.k12_margin})
    if (!(t >= 0.0)) fail("validate tolerances must be >= 0");
}

namespace {

toml::table to_table(const ExperimentConfig& c) {
  toml::table pressure{{"model", pressure_tag(c.params.pressure.kind)},
                       {"rho_min", c.params.pressure.rho_min},
                       {"allow_noncritical", c.params.pressure.allow_noncritical}};
  // JSON has no infinity; an unbounded rho_max is simply left out
  if (std::isfinite(c.params.pressure.rho_max)) pressure.insert("rho_max", c.params.pressure.rho_max);
  const auto& pm = c.params.pressure;
  switch (pm.kind) {
    case PressureModel::Kind::critical_quadratic:
      pressure.insert("c", pm.c);
      break;
    case PressureModel::Kind::van_der_waals:
      pressure.insert("a", pm.a);
      pressure.insert("b", pm.b);
      pressure.insert("theta", pm.theta);
      break;
    case PressureModel::Kind::custom: {
      toml::array arr;
      for (double v : pm.coefficients) arr.push_back(v);
      pressure.insert("coefficients", arr);
      break;
    }
  }

  toml::table initial{{"profile", to_string(c.initial.profile)},
                      {"amplitude", c.initial.amplitude},
                      {"width", c.initial.width},
                      {"derivative_form", c.initial.derivative_form},
                      {"mode", toml::array{c.initial.mode[0], c.initial.mode[1], c.initial.mode[2]}}};
  if (!c.initial.file.empty()) initial.insert("file", c.initial.file);
  if (c.initial.energy) initial.insert("energy", *c.initial.energy);

  toml::table analysis{{"C2", c.analysis.C2}};
  if (c.analysis.s) analysis.insert("s", *c.analysis.s);
  if (c.analysis.kappa1) analysis.insert("kappa1", *c.analysis.kappa1);

  const auto& st = c.stepper;
  const auto& v = c.validate;
  return toml::table{
      {"seed", static_cast<std::int64_t>(c.seed)},
      {"grid", toml::table{{"dim", c.grid.dim}, {"modes", c.grid.modes}, {"length", c.grid.length}}},
      {"params", toml::table{{"nu", c.params.nu},
                             {"nu_tilde", c.params.nu_tilde},
                             {"kappa", c.params.kappa},
                             {"pressure", pressure}}},
      {"cutoff", toml::table{{"r1", c.r1}, {"r_inf", c.r_inf}}},
      {"stepper", toml::table{{"scheme", to_string(st.scheme)},
                              {"dt", st.dt},
                              {"t_end", st.t_end},
                              {"adapt", st.adapt},
                              {"target_error", st.target_error},
                              {"dt_min", st.dt_min},
                              {"dt_max", st.dt_max},
                              {"amplitude_guard", st.amplitude_guard},
                              {"nonlinear", st.nonlinear},
                              {"sample_every", st.sample_every},
                              {"blowup_factor", st.blowup_factor}}},
      {"initial", initial},
      {"analysis", analysis},
      {"picard", toml::table{{"horizon", c.picard.horizon},
                             {"intervals", c.picard.intervals},
                             {"k_max", c.picard.k_max},
                             {"stop_below", c.picard.stop_below},
                             {"nonlinear", c.picard.nonlinear}}},
      {"linear_decay", toml::table{{"t_min", c.linear_decay.t_min},
                                   {"t_max", c.linear_decay.t_max},
                                   {"samples", c.linear_decay.samples},
                                   {"fit_t_a", c.linear_decay.fit_t_a},
                                   {"fit_t_b", c.linear_decay.fit_t_b},
                                   {"tolerance", c.linear_decay.tolerance}}},
      {"validate", toml::table{{"grid_modes", v.grid_modes},
                               {"grid_length", v.grid_length},
                               {"samples", v.samples},
                               {"semigroup_tol", v.semigroup_tol},
                               {"composition_tol", v.composition_tol},
                               {"continuity_tol", v.continuity_tol},
                               {"korteweg_tol", v.korteweg_tol},
                               {"oracle_tol", v.oracle_tol},
                               {"projection_tol", v.projection_tol},
                               {"k12_margin", v.k12_margin},
                               {"energy_samples", v.energy_samples}}},
      {"output", toml::table{{"dir", c.output_dir.string()}}},
  };
}

}  // namespace

std::string to_toml(const ExperimentConfig& c) {
  std::ostringstream os;
  os << to_table(c);
  return os.str();
}

std::string to_json_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << toml::json_formatter{to_table(c)};
  return os.str();
}

}  // namespace nsk
