#pragma once

// Run configuration: a flat key = value file. Values may be arithmetic
// expressions over numbers, `pi` and `trev` (pi / B of the first molecule).

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chiral/error.hpp"
#include "chiral/molecule.hpp"
#include "chiral/propagator.hpp"
#include "chiral/pulsetrain.hpp"
#include "chiral/units.hpp"

namespace chiral {

namespace detail {

inline std::string trim(std::string s) {
  auto blank = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && blank(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && blank(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

inline std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Recursive-descent evaluator for + - * / ( ) with named constants.
class Expression {
public:
  Expression(const std::string &text, const std::map<std::string, double> &names) : s_(text), names_(names) {}

  double evaluate() {
    const double v = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + s_.substr(pos_) + "'");
    return v;
  }

private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string &why) const {
    throw ConfigError("cannot evaluate '" + s_ + "': " + why);
  }

  double sum() {
    double v = product();
    for (;;) {
      skip();
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
        const char op = s_[pos_++];
        const double r = product();
        v = op == '+' ? v + r : v - r;
      } else {
        return v;
      }
    }
  }

  double product() {
    double v = unary();
    for (;;) {
      skip();
      if (pos_ < s_.size() && (s_[pos_] == '*' || s_[pos_] == '/')) {
        const char op = s_[pos_++];
        const double r = unary();
        v = op == '*' ? v * r : v / r;
      } else {
        return v;
      }
    }
  }

  double unary() {
    skip();
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
      const char op = s_[pos_++];
      const double v = unary();
      return op == '-' ? -v : v;
    }
    return primary();
  }

  double primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      const double v = sum();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("missing ')'");
      ++pos_;
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) ++end;
      const std::string name = s_.substr(pos_, end - pos_);
      const auto it = names_.find(name);
      if (it == names_.end()) fail("unknown name '" + name + "'");
      pos_ = end;
      return it->second;
    }
    const char *begin = s_.c_str() + pos_;
    char *end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  std::string s_;
  const std::map<std::string, double> &names_;
  std::size_t pos_ = 0;
};

} // namespace detail

enum class TrainKind { equal, bessel };

inline const char *to_string(TrainKind k) { return k == TrainKind::equal ? "equal" : "bessel"; }

/// Every recognized key with its default text.
inline const std::map<std::string, std::string> &config_defaults() {
  static const std::map<std::string, std::string> d = {
      {"molecule", "14N2"},
      {"b_cm", ""},
      {"d_cm", ""},
      {"delta_alpha_a3", ""},
      {"spin_even", ""},
      {"spin_odd", ""},
      {"lambda_cm", ""},
      {"gamma_cm", ""},
      {"train", "equal"},
      {"pulses", "8"},
      {"bessel_a", "2"},
      {"bessel_range", "auto"},
      {"p_total", "5"},
      {"sigma", "0.03"},
      {"shape", "gaussian"},
      {"engine", "sudden"},
      {"temperature", "8"},
      {"tau_min", "0.5"},
      {"tau_max", "9"},
      {"tau_step", "trev/400"},
      {"tau_values", ""},
      {"delta_min", "0"},
      {"delta_max", "pi"},
      {"delta_step", "pi/100"},
      {"delta_values", ""},
      {"levels", "0,1,2,3,4,5,6,7,8"},
      {"heatmaps", ""},
      {"workers", "0"},
      {"truncation", "auto"},
      {"truncation_threshold", "1e-6"},
      {"lines_m_min", "0"},
      {"lines_m_max", "8"},
  };
  return d;
}

/// Resolved run configuration. `entries` holds the text of every key
/// (defaults included) and reproduces the run when fed back in.
struct RunConfig {
  std::map<std::string, std::string> entries;

  std::vector<MoleculeSpec> molecules;
  TrainKind train = TrainKind::equal;
  int pulses = 8;
  double bessel_a = 2.0;
  int bessel_range = 0; // 0: automatic
  double p_total = 5.0;
  double sigma = 0.03;
  PulseShape shape = PulseShape::gaussian;
  Engine engine = Engine::sudden;
  double temperature = 8.0;
  std::vector<double> taus;
  std::vector<double> deltas;
  std::vector<int> levels;
  std::vector<std::string> heatmaps;
  int workers = 0;    // 0: hardware concurrency
  int truncation = 0; // 0: automatic
  double truncation_threshold = default_truncation_threshold;
  int lines_m_min = 0;
  int lines_m_max = 8;

  /// Pulse train for one grid point.
  TrainSpec make_train(double tau, double delta) const {
    if (train == TrainKind::equal) return equal_train(pulses, tau, delta, p_total, sigma, shape);
    const int k = bessel_range > 0 ? bessel_range : bessel_default_range(bessel_a);
    return bessel_train(bessel_a, tau, delta, p_total, k, shape == PulseShape::gaussian ? sigma : 0.0, shape);
  }
};

namespace detail {

inline double eval_number(const std::string &key, const std::string &text, const std::map<std::string, double> &names) {
  if (trim(text).empty()) throw ConfigError("key '" + key + "' needs a value");
  try {
    return Expression(text, names).evaluate();
  } catch (const ConfigError &e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

inline int eval_int(const std::string &key, const std::string &text, const std::map<std::string, double> &names) {
  const double v = eval_number(key, text, names);
  if (std::round(v) != v || std::abs(v) > 1e9) throw ConfigError("key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

inline std::vector<double> axis_values(const std::string &name, const std::map<std::string, std::string> &e,
                                       const std::map<std::string, double> &names) {
  const std::string listed = trim(e.at(name + "_values"));
  std::vector<double> out;
  if (!listed.empty()) {
    for (const auto &item : split_list(listed)) out.push_back(eval_number(name + "_values", item, names));
    return out;
  }
  const double lo = eval_number(name + "_min", e.at(name + "_min"), names);
  const double hi = eval_number(name + "_max", e.at(name + "_max"), names);
  const double step = eval_number(name + "_step", e.at(name + "_step"), names);
  if (!(step > 0)) throw ConfigError("key '" + name + "_step' must be positive");
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError(name + " range must be finite");
  if (hi < lo) return out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step * (1.0 + 1e-12) + 1e-9)) + 1;
  if (count > 10'000'000) throw ConfigError(name + " axis has too many points");
  for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

inline MoleculeSpec resolve_molecule(const std::string &name, const std::map<std::string, std::string> &e,
                                     const std::map<std::string, double> &names) {
  MoleculeSpec m = presets::by_name(name);
  auto set = [&](const char *key, auto apply) {
    const std::string v = trim(e.at(key));
    if (!v.empty()) apply(eval_number(key, v, names));
  };
  set("b_cm", [&](double v) { m.b = units::from_wavenumber(v); });
  set("d_cm", [&](double v) { m.d = units::from_wavenumber(v); });
  set("delta_alpha_a3", [&](double v) { m.delta_alpha = v * units::si_per_cubic_angstrom; });
  set("spin_even", [&](double v) { m.spin_weight_even = v; });
  set("spin_odd", [&](double v) { m.spin_weight_odd = v; });
  auto fine = [&](const char *key, double FineStructure::*field) {
    const std::string v = trim(e.at(key));
    if (v.empty()) return;
    if (!m.is_case_b()) throw ConfigError(std::string("key '") + key + "' applies to case (b) species only");
    (*m.fine_structure).*field = units::from_wavenumber(eval_number(key, v, names));
  };
  fine("lambda_cm", &FineStructure::lambda);
  fine("gamma_cm", &FineStructure::gamma);
  m.validate();
  return m;
}

} // namespace detail

/// Builds a configuration from explicit entries layered over the defaults.
inline RunConfig make_config(const std::map<std::string, std::string> &given) {
  RunConfig c;
  c.entries = config_defaults();
  for (const auto &[k, v] : given) {
    if (!c.entries.count(k)) throw ConfigError("unknown configuration key '" + k + "'");
    c.entries[k] = detail::trim(v);
  }
  const auto &e = c.entries;

  std::map<std::string, double> names{{"pi", units::pi}};
  const auto molecule_names = detail::split_list(e.at("molecule"));
  if (molecule_names.empty()) throw ConfigError("key 'molecule' is empty");
  for (const auto &n : molecule_names) c.molecules.push_back(detail::resolve_molecule(n, e, names));
  names["trev"] = units::pi / c.molecules.front().b;

  const std::string train = e.at("train");
  if (train == "equal")
    c.train = TrainKind::equal;
  else if (train == "bessel")
    c.train = TrainKind::bessel;
  else
    throw ConfigError("key 'train' must be equal or bessel");

  c.pulses = detail::eval_int("pulses", e.at("pulses"), names);
  if (c.pulses < 1) throw ConfigError("key 'pulses' must be >= 1");
  c.bessel_a = detail::eval_number("bessel_a", e.at("bessel_a"), names);
  c.bessel_range = e.at("bessel_range") == "auto" ? 0 : detail::eval_int("bessel_range", e.at("bessel_range"), names);
  if (c.bessel_range < 0) throw ConfigError("key 'bessel_range' must be >= 0");
  c.p_total = detail::eval_number("p_total", e.at("p_total"), names);
  if (!(c.p_total >= 0)) throw ConfigError("key 'p_total' must be >= 0");
  c.sigma = detail::eval_number("sigma", e.at("sigma"), names);

  const std::string shape = e.at("shape");
  if (shape == "gaussian")
    c.shape = PulseShape::gaussian;
  else if (shape == "delta")
    c.shape = PulseShape::delta;
  else
    throw ConfigError("key 'shape' must be gaussian or delta");
  if (c.shape == PulseShape::gaussian && !(c.sigma > 0)) throw ConfigError("gaussian pulses need sigma > 0");

  const std::string engine = e.at("engine");
  if (engine == "sudden")
    c.engine = Engine::sudden;
  else if (engine == "ode")
    c.engine = Engine::ode;
  else
    throw ConfigError("key 'engine' must be sudden or ode");
  if (c.engine == Engine::ode) {
    if (c.shape != PulseShape::gaussian) throw ConfigError("engine=ode needs shape=gaussian");
    for (const auto &m : c.molecules)
      if (m.is_case_b()) throw ConfigError("engine=ode is not available for " + m.name);
  }

  c.temperature = detail::eval_number("temperature", e.at("temperature"), names);
  if (!(c.temperature >= 0)) throw ConfigError("key 'temperature' must be >= 0");

  c.taus = detail::axis_values("tau", e, names);
  c.deltas = detail::axis_values("delta", e, names);
  for (double t : c.taus)
    if (!(t > 0)) throw ConfigError("pulse train period tau must be positive");

  for (const auto &item : detail::split_list(e.at("levels"))) {
    const int l = detail::eval_int("levels", item, names);
    if (l < 0) throw ConfigError("key 'levels' must list non-negative levels");
    c.levels.push_back(l);
  }
  if (c.levels.empty()) throw ConfigError("key 'levels' is empty");

  for (const auto &h : detail::split_list(e.at("heatmaps"))) {
    if (h != "Q" && h != "eps" && h != "Jz" && h != "E_abs")
      throw ConfigError("key 'heatmaps' accepts Q, eps, Jz, E_abs");
    c.heatmaps.push_back(h);
  }

  c.workers = detail::eval_int("workers", e.at("workers"), names);
  if (c.workers < 0) throw ConfigError("key 'workers' must be >= 0");
  c.truncation = e.at("truncation") == "auto" ? 0 : detail::eval_int("truncation", e.at("truncation"), names);
  if (c.truncation < 0) throw ConfigError("key 'truncation' must be >= 0 or auto");
  c.truncation_threshold = detail::eval_number("truncation_threshold", e.at("truncation_threshold"), names);
  c.lines_m_min = detail::eval_int("lines_m_min", e.at("lines_m_min"), names);
  c.lines_m_max = detail::eval_int("lines_m_max", e.at("lines_m_max"), names);
  if (c.lines_m_max < c.lines_m_min) throw ConfigError("lines_m_max must be >= lines_m_min");
  return c;
}

/// Parses `key = value` lines; `#` starts a comment.
inline std::map<std::string, std::string> parse_config_text(const std::string &text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    out[key] = detail::trim(line.substr(eq + 1));
  }
  return out;
}

inline std::map<std::string, std::string> read_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Applies a `key=value` override.
inline void apply_override(std::map<std::string, std::string> &entries, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = detail::trim(assignment.substr(0, eq));
  if (!config_defaults().count(key)) throw ConfigError("unknown configuration key '" + key + "'");
  entries[key] = detail::trim(assignment.substr(eq + 1));
}

} // namespace chiral
