// Scenario configuration: validation and the key-value text format.
//
//   # comment
//   name = "fig2"
//   n_th = [0, 20]
//   convergence = true
//
// Values are numbers, "strings", true/false, or [lists] of numbers or
// strings. Every key must be known; repeated keys are errors.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

#include "omx/experiments.hpp"

namespace omx {

std::string to_string(ModelKind m) {
  return m == ModelKind::single ? "single" : "two_cavity";
}

std::string to_string(Equation e) { return e == Equation::dsme ? "dsme" : "sme"; }

std::vector<double> SweepGrid::values() const {
  if (!(step > 0.0) || !(stop >= start)) {
    throw ConfigError("sweep grid needs step > 0 and stop >= start");
  }
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) v.push_back(start + i * step);
  return v;
}

bool ScenarioConfig::has(Equation e) const {
  return std::find(equations.begin(), equations.end(), e) != equations.end();
}

namespace {

template <class T>
const T& per_nth(const std::vector<T>& v, std::size_t i, const char* what) {
  if (v.size() == 1) return v[0];
  if (i >= v.size()) {
    throw ConfigError(std::string(what) + " has no entry for n_th index " +
                      std::to_string(i));
  }
  return v[i];
}

}  // namespace

int ScenarioConfig::mechanical_dim(std::size_t i,
                                   std::optional<double> beta0) const {
  const int fixed = per_nth(n_m, i, "n_m");
  if (fixed > 0) return fixed;
  const double nth = n_th.at(i);
  const double b = std::abs(beta0.value_or(single.beta0()));
  const double b1 = std::abs(two.beta1());
  const double b2 = std::abs(two.beta2());
  auto displacement = [&](int n1, int n2) {
    return model == ModelKind::single ? n1 * b : n1 * b1 + n2 * b2;
  };
  double shift = 0.0;
  int k_max = 0;
  if (is_sweep() || !initial_state) {
    // Steady states sit at the equilibrium displacement of each sector.
    shift = displacement(n_c - 1, n_c2 - 1);
  } else {
    // Evolution from an undisplaced state swings out to twice the
    // equilibrium displacement.
    const auto& st = *initial_state;
    if (st.kind == "cavity_bell") {
      shift = 2.0 * std::max(displacement(1, 0), displacement(0, 1));
    } else if (st.kind == "cavity_superposition") {
      for (int n : st.args) shift = std::max(shift, 2.0 * displacement(n, 0));
    } else {
      const std::size_t cavities = model == ModelKind::single ? 1 : 2;
      const int n1 = st.args.size() > 0 ? st.args[0] : 0;
      const int n2 = cavities > 1 && st.args.size() > 1 ? st.args[1] : 0;
      shift = 2.0 * displacement(n1, n2);
      if (st.args.size() > cavities) k_max = std::max(0, st.args[cavities]);
    }
  }
  return std::max(2, recommended_mechanical_dim(shift, nth, k_max));
}

double ScenarioConfig::horizon(std::size_t i) const {
  return per_nth(t_end, i, "t_end");
}

void ScenarioConfig::validate() const {
  if (name.empty()) throw ConfigError("name must not be empty");
  if (equations.empty()) throw ConfigError("at least one equation required");
  if (n_th.empty()) throw ConfigError("n_th must list at least one value");
  for (double v : n_th) {
    if (!(v >= 0.0)) throw ConfigError("n_th values must be >= 0");
  }
  if (n_c < 2 || n_c2 < 2) throw ConfigError("cavity truncations must be >= 2");
  if (n_m.empty()) throw ConfigError("n_m must not be empty");
  if (n_m.size() != 1 && n_m.size() != n_th.size()) {
    throw ConfigError("n_m must have one entry or one per n_th value");
  }
  for (int v : n_m) {
    if (v != 0 && v < 2) throw ConfigError("n_m entries must be 0 or >= 2");
  }
  // Parameter-level checks report as configuration errors here.
  auto as_config = [](auto&& check) {
    try {
      check();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  };
  if (model == ModelKind::single) {
    as_config([&] { single.validate(); });
  } else {
    as_config([&] { two.validate(); });
    if (drive) throw ConfigError("drive is only supported for the single-cavity model");
    if (sweep) throw ConfigError("sweeps are only supported for the single-cavity model");
  }
  if (drive) as_config([&] { drive->validate(single); });
  if (detuning_at_polaron_shift && !drive) {
    throw ConfigError("drive_detuning = \"polaron\" needs drive_E0");
  }
  if (outputs.empty()) throw ConfigError("outputs must list at least one observable");
  if (convergence_levels < 2) throw ConfigError("convergence_levels must be >= 2");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
  if (envelope_min_separation < 0.0) {
    throw ConfigError("envelope_min_separation must be >= 0");
  }
  as_config([&] { solver.validate(); });
  if (sweep) {
    if (sweep->parameter != "beta0") {
      throw ConfigError("only beta0 sweeps are supported");
    }
    as_config([&] { sweep->values(); });
  } else {
    if (!initial_state) throw ConfigError("time evolution needs initial_state");
    if (t_end.empty() || (t_end.size() != 1 && t_end.size() != n_th.size())) {
      throw ConfigError("t_end must have one entry or one per n_th value");
    }
    for (double t : t_end) {
      if (!(t > 0.0)) throw ConfigError("t_end must be positive");
    }
    if (!(dt_out > 0.0)) throw ConfigError("dt_out must be positive");
    const auto& k = initial_state->kind;
    if (k != "cavity_superposition" && k != "fock" && k != "cavity_bell") {
      throw ConfigError("unknown initial_state '" + k + "'");
    }
    if (k == "cavity_bell" && model != ModelKind::two_cavity) {
      throw ConfigError("cavity_bell needs the two_cavity model");
    }
    if (k == "cavity_superposition" && initial_state->args.size() != 2) {
      throw ConfigError("cavity_superposition takes two photon numbers");
    }
  }
  for (std::size_t i = 1; i < expected_peaks.size(); ++i) {
    if (!(expected_peaks[i] > expected_peaks[i - 1])) {
      throw ConfigError("expected_peaks must increase strictly");
    }
  }
}

namespace {

using ListItem = std::variant<double, std::string>;
using Value = std::variant<double, bool, std::string, std::vector<ListItem>>;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& tok, int line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("line " + std::to_string(line) + ": bad number '" + tok +
                      "'");
  }
  return v;
}

ListItem parse_item(const std::string& raw, int line) {
  const std::string tok = trim(raw);
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    return tok.substr(1, tok.size() - 2);
  }
  return parse_number(tok, line);
}

Value parse_value(const std::string& raw, int line) {
  const std::string tok = trim(raw);
  if (tok.empty()) {
    throw ConfigError("line " + std::to_string(line) + ": missing value");
  }
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (tok.front() == '[') {
    if (tok.back() != ']') {
      throw ConfigError("line " + std::to_string(line) + ": unterminated list");
    }
    std::vector<ListItem> items;
    const std::string body = trim(tok.substr(1, tok.size() - 2));
    if (body.empty()) return items;
    std::stringstream ss(body);
    std::string part;
    while (std::getline(ss, part, ',')) items.push_back(parse_item(part, line));
    return items;
  }
  const ListItem item = parse_item(tok, line);
  if (std::holds_alternative<std::string>(item)) return std::get<std::string>(item);
  return std::get<double>(item);
}

// Strips a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

struct Reader {
  std::string key;
  const Value& v;

  double number() const {
    if (auto p = std::get_if<double>(&v)) return *p;
    throw ConfigError(key + ": expected a number");
  }
  int integer() const {
    const double d = number();
    if (d != std::floor(d) || std::abs(d) > 1e9) {
      throw ConfigError(key + ": expected an integer");
    }
    return static_cast<int>(d);
  }
  bool boolean() const {
    if (auto p = std::get_if<bool>(&v)) return *p;
    throw ConfigError(key + ": expected true or false");
  }
  std::string string() const {
    if (auto p = std::get_if<std::string>(&v)) return *p;
    throw ConfigError(key + ": expected a quoted string");
  }
  std::vector<double> numbers() const {
    if (auto p = std::get_if<double>(&v)) return {*p};
    auto list = std::get_if<std::vector<ListItem>>(&v);
    if (!list) throw ConfigError(key + ": expected a list of numbers");
    std::vector<double> out;
    for (const ListItem& it : *list) {
      auto d = std::get_if<double>(&it);
      if (!d) throw ConfigError(key + ": expected a list of numbers");
      out.push_back(*d);
    }
    return out;
  }
  std::vector<int> integers() const {
    std::vector<int> out;
    for (double d : numbers()) {
      if (d != std::floor(d)) throw ConfigError(key + ": expected integers");
      out.push_back(static_cast<int>(d));
    }
    return out;
  }
  std::vector<std::string> strings() const {
    if (auto p = std::get_if<std::string>(&v)) return {*p};
    auto list = std::get_if<std::vector<ListItem>>(&v);
    if (!list) throw ConfigError(key + ": expected a list of strings");
    std::vector<std::string> out;
    for (const ListItem& it : *list) {
      auto s = std::get_if<std::string>(&it);
      if (!s) throw ConfigError(key + ": expected a list of strings");
      out.push_back(*s);
    }
    return out;
  }
};

using Setter = std::function<void(ScenarioConfig&, const Reader&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"name", [](auto& c, auto& r) { c.name = r.string(); }},
      {"model",
       [](auto& c, auto& r) {
         const std::string m = r.string();
         if (m == "single") c.model = ModelKind::single;
         else if (m == "two_cavity") c.model = ModelKind::two_cavity;
         else throw ConfigError("model: expected \"single\" or \"two_cavity\"");
       }},
      {"equation",
       [](auto& c, auto& r) {
         const std::string e = r.string();
         if (e == "dsme") c.equations = {Equation::dsme};
         else if (e == "sme") c.equations = {Equation::sme};
         else if (e == "both") c.equations = {Equation::dsme, Equation::sme};
         else throw ConfigError("equation: expected dsme, sme or both");
       }},
      {"omega_c", [](auto& c, auto& r) { c.single.omega_c = r.number(); }},
      {"omega_m",
       [](auto& c, auto& r) { c.single.omega_m = c.two.omega_m = r.number(); }},
      {"g0", [](auto& c, auto& r) { c.single.g0 = r.number(); }},
      {"kappa", [](auto& c, auto& r) { c.single.kappa = r.number(); }},
      {"gamma_m",
       [](auto& c, auto& r) { c.single.gamma_m = c.two.gamma_m = r.number(); }},
      {"omega_c1", [](auto& c, auto& r) { c.two.omega_c1 = r.number(); }},
      {"omega_c2", [](auto& c, auto& r) { c.two.omega_c2 = r.number(); }},
      {"g1", [](auto& c, auto& r) { c.two.g1 = r.number(); }},
      {"g2", [](auto& c, auto& r) { c.two.g2 = r.number(); }},
      {"kappa1", [](auto& c, auto& r) { c.two.kappa1 = r.number(); }},
      {"kappa2", [](auto& c, auto& r) { c.two.kappa2 = r.number(); }},
      {"n_th", [](auto& c, auto& r) { c.n_th = r.numbers(); }},
      {"drive_E0",
       [](auto& c, auto& r) {
         if (!c.drive) c.drive = DriveParams{};
         c.drive->E0 = r.number();
       }},
      {"drive_detuning",
       [](auto& c, auto& r) {
         if (!c.drive) c.drive = DriveParams{};
         if (std::holds_alternative<std::string>(r.v)) {
           if (r.string() != "polaron") {
             throw ConfigError("drive_detuning: expected a number or \"polaron\"");
           }
           c.detuning_at_polaron_shift = true;
         } else {
           c.drive->Delta0 = r.number();
           c.detuning_at_polaron_shift = false;
         }
       }},
      {"initial_state",
       [](auto& c, auto& r) {
         if (!c.initial_state) c.initial_state = InitialState{};
         c.initial_state->kind = r.string();
       }},
      {"initial_args",
       [](auto& c, auto& r) {
         if (!c.initial_state) c.initial_state = InitialState{};
         c.initial_state->args = r.integers();
       }},
      {"n_c", [](auto& c, auto& r) { c.n_c = r.integer(); }},
      {"n_c2", [](auto& c, auto& r) { c.n_c2 = r.integer(); }},
      {"n_m", [](auto& c, auto& r) { c.n_m = r.integers(); }},
      {"t_end", [](auto& c, auto& r) { c.t_end = r.numbers(); }},
      {"dt_out", [](auto& c, auto& r) { c.dt_out = r.number(); }},
      {"sweep",
       [](auto& c, auto& r) {
         if (!c.sweep) c.sweep = SweepGrid{};
         c.sweep->parameter = r.string();
       }},
      {"sweep_start",
       [](auto& c, auto& r) {
         if (!c.sweep) c.sweep = SweepGrid{};
         c.sweep->start = r.number();
       }},
      {"sweep_stop",
       [](auto& c, auto& r) {
         if (!c.sweep) c.sweep = SweepGrid{};
         c.sweep->stop = r.number();
       }},
      {"sweep_step",
       [](auto& c, auto& r) {
         if (!c.sweep) c.sweep = SweepGrid{};
         c.sweep->step = r.number();
       }},
      {"outputs", [](auto& c, auto& r) { c.outputs = r.strings(); }},
      {"rel_tol", [](auto& c, auto& r) { c.solver.rel_tol = r.number(); }},
      {"abs_tol", [](auto& c, auto& r) { c.solver.abs_tol = r.number(); }},
      {"max_step", [](auto& c, auto& r) { c.solver.max_step = r.number(); }},
      {"hermitize_every",
       [](auto& c, auto& r) { c.solver.hermitize_every = r.integer(); }},
      {"trace_renorm_tol",
       [](auto& c, auto& r) { c.solver.trace_renorm_tol = r.number(); }},
      {"check_every",
       [](auto& c, auto& r) { c.solver.check_every = r.integer(); }},
      {"convergence", [](auto& c, auto& r) { c.convergence = r.boolean(); }},
      {"convergence_tol",
       [](auto& c, auto& r) { c.convergence_tol = r.number(); }},
      {"convergence_levels",
       [](auto& c, auto& r) { c.convergence_levels = r.integer(); }},
      {"envelope_min_separation",
       [](auto& c, auto& r) { c.envelope_min_separation = r.number(); }},
      {"expected_peaks",
       [](auto& c, auto& r) { c.expected_peaks = r.numbers(); }},
      {"expect_dsme_equals_sme",
       [](auto& c, auto& r) { c.expect_dsme_equals_sme = r.boolean(); }},
  };
  return table;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T, class F>
std::string list(const std::vector<T>& v, F f) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += f(v[i]);
  }
  return s + "]";
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  cfg.n_m = {0};
  std::map<std::string, int> seen;
  std::stringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                        key + "'");
    }
    if (seen.count(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                        key + "' (first on line " + std::to_string(seen[key]) +
                        ")");
    }
    seen[key] = line_no;
    const Value v = parse_value(line.substr(eq + 1), line_no);
    it->second(cfg, Reader{key, v});
  }
  cfg.validate();
  return cfg;
}

void apply_setting(ScenarioConfig& cfg, const std::string& key,
                   const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  const Value v = parse_value(value, 0);
  if (key != "n_th") {
    it->second(cfg, Reader{key, v});
    return;
  }
  const std::vector<double> old = cfg.n_th;
  it->second(cfg, Reader{key, v});
  auto nearest = [&](double x) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < old.size(); ++i) {
      if (std::abs(old[i] - x) < std::abs(old[best] - x)) best = i;
    }
    return best;
  };
  const bool per_entry_t = cfg.t_end.size() == old.size() && old.size() > 1;
  std::vector<double> t_end;
  std::vector<int> n_m;
  for (double x : cfg.n_th) {
    const std::size_t j = nearest(x);
    if (per_entry_t) t_end.push_back(cfg.t_end[j]);
    // A fixed truncation only carries over to the same temperature.
    if (cfg.n_m.empty()) continue;
    const int m = cfg.n_m[cfg.n_m.size() == 1 ? 0 : std::min(j, cfg.n_m.size() - 1)];
    n_m.push_back(old[j] == x ? m : 0);
  }
  if (per_entry_t) cfg.t_end = t_end;
  if (!n_m.empty()) cfg.n_m = n_m;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_config(const ScenarioConfig& c) {
  std::ostringstream os;
  auto num = [](double v) { return fmt(v); };
  auto integer = [](int v) { return std::to_string(v); };
  os << "name = " << quote(c.name) << '\n';
  os << "model = " << quote(to_string(c.model)) << '\n';
  os << "equation = "
     << quote(c.equations.size() == 2 ? "both" : to_string(c.equations[0]))
     << '\n';
  os << "omega_m = " << fmt(c.single.omega_m) << '\n';
  os << "gamma_m = " << fmt(c.single.gamma_m) << '\n';
  if (c.model == ModelKind::single) {
    os << "omega_c = " << fmt(c.single.omega_c) << '\n';
    os << "g0 = " << fmt(c.single.g0) << '\n';
    os << "kappa = " << fmt(c.single.kappa) << '\n';
  } else {
    os << "omega_c1 = " << fmt(c.two.omega_c1) << '\n';
    os << "omega_c2 = " << fmt(c.two.omega_c2) << '\n';
    os << "g1 = " << fmt(c.two.g1) << '\n';
    os << "g2 = " << fmt(c.two.g2) << '\n';
    os << "kappa1 = " << fmt(c.two.kappa1) << '\n';
    os << "kappa2 = " << fmt(c.two.kappa2) << '\n';
    os << "n_c2 = " << c.n_c2 << '\n';
  }
  os << "n_th = " << list(c.n_th, num) << '\n';
  if (c.drive) {
    os << "drive_E0 = " << fmt(c.drive->E0) << '\n';
    os << "drive_detuning = "
       << (c.detuning_at_polaron_shift ? quote("polaron") : fmt(c.drive->Delta0))
       << '\n';
  }
  if (c.initial_state) {
    os << "initial_state = " << quote(c.initial_state->kind) << '\n';
    if (!c.initial_state->args.empty()) {
      os << "initial_args = " << list(c.initial_state->args, integer) << '\n';
    }
  }
  os << "n_c = " << c.n_c << '\n';
  os << "n_m = " << list(c.n_m, integer) << '\n';
  if (c.sweep) {
    os << "sweep = " << quote(c.sweep->parameter) << '\n';
    os << "sweep_start = " << fmt(c.sweep->start) << '\n';
    os << "sweep_stop = " << fmt(c.sweep->stop) << '\n';
    os << "sweep_step = " << fmt(c.sweep->step) << '\n';
  } else {
    os << "t_end = " << list(c.t_end, num) << '\n';
    os << "dt_out = " << fmt(c.dt_out) << '\n';
  }
  os << "outputs = " << list(c.outputs, quote) << '\n';
  os << "rel_tol = " << fmt(c.solver.rel_tol) << '\n';
  os << "abs_tol = " << fmt(c.solver.abs_tol) << '\n';
  os << "max_step = " << fmt(c.solver.max_step) << '\n';
  os << "hermitize_every = " << c.solver.hermitize_every << '\n';
  os << "trace_renorm_tol = " << fmt(c.solver.trace_renorm_tol) << '\n';
  os << "check_every = " << c.solver.check_every << '\n';
  os << "convergence = " << (c.convergence ? "true" : "false") << '\n';
  os << "convergence_tol = " << fmt(c.convergence_tol) << '\n';
  os << "convergence_levels = " << c.convergence_levels << '\n';
  os << "envelope_min_separation = " << fmt(c.envelope_min_separation) << '\n';
  if (!c.expected_peaks.empty()) {
    os << "expected_peaks = " << list(c.expected_peaks, num) << '\n';
  }
  os << "expect_dsme_equals_sme = "
     << (c.expect_dsme_equals_sme ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace omx
