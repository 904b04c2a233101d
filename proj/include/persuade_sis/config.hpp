#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "persuade_sis/model.hpp"
#include "persuade_sis/simulate.hpp"

namespace persuade_sis {

/// Malformed or unknown configuration input.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"sne",     "static-sweep", "simulate", "optimize",
                                              "compare", "grid-mui",     "check"};
  return kinds;
}

/**
 * One experiment run. Serialized as an INI file with sections
 * [experiment] [model] [smith] [initial] [sne] [sweep] [simulate] [optimize]
 * [grid]; every key is optional and defaults to the values below.
 */
struct ExperimentConfig {
  std::string kind = "sne";
  std::string out_dir = "out";

  ModelParams model{};
  SmithConfig smith{};
  PopulationState initial{0.01, 0.5, 0.5};

  double mu_s = 0.548;  // sne, simulate

  struct Sweep {
    double mu_min = 0.01;
    double mu_max = 0.96;
    double step = 0.005;
    friend bool operator==(const Sweep&, const Sweep&) = default;
  } sweep;

  struct Simulate {
    double horizon = 23.0;
    double step = 1e-3;
    std::size_t output_every = 100;
    friend bool operator==(const Simulate&, const Simulate&) = default;
  } simulate;

  struct Optimize {
    double horizon = 23.0;
    std::size_t n_intervals = 46;
    double cost_weight = 0.0;  // c in y + c (1 - mu_s)^2; 0 means plain y
    double step = 1e-3;
    std::size_t max_iter = 500;
    double fd_delta = 1e-5;
    double credibility_margin = 0.25;
    std::size_t output_every = 100;
    friend bool operator==(const Optimize&, const Optimize&) = default;
  } optimize;

  struct Grid {
    double step = 0.02;
    double lo = 0.01;
    double hi = 1.0;
    double t_max = 500.0;
    double dt = 1e-2;
    double tol = 1e-8;
    friend bool operator==(const Grid&, const Grid&) = default;
  } grid;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  void validate() const {
    bool known = false;
    for (const auto& k : experiment_kinds()) known = known || k == kind;
    if (!known) throw ConfigError("unknown experiment kind '" + kind + "'");
    model.validate();
    smith.validate();
    if (!initial.in_bounds()) throw DomainError("initial state outside [0,1]^3");
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  }
}

inline std::size_t parse_count(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v < 0) throw std::invalid_argument("bad count");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + text + "'");
  }
}

/// "section.key" -> accessor pair over an ExperimentConfig.
struct Field {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

inline const std::map<std::string, Field>& config_fields() {
  static const std::map<std::string, Field> fields = [] {
    std::map<std::string, Field> f;
    auto real = [&f](const std::string& name, auto member) {
      f[name] = Field{
          [member](const ExperimentConfig& c) { return format_double(member(c)); },
          [member, name](ExperimentConfig& c, const std::string& v) {
            member(c) = parse_double(name, v);
          }};
    };
    auto count = [&f](const std::string& name, auto member) {
      f[name] = Field{
          [member](const ExperimentConfig& c) {
            return std::to_string(member(c));
          },
          [member, name](ExperimentConfig& c, const std::string& v) {
            member(c) = parse_count(name, v);
          }};
    };
    f["experiment.kind"] = Field{[](const ExperimentConfig& c) { return c.kind; },
                                 [](ExperimentConfig& c, const std::string& v) { c.kind = v; }};
    f["experiment.out_dir"] = Field{[](const ExperimentConfig& c) { return c.out_dir; },
                                    [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; }};

    real("model.alpha", [](auto& c) -> auto& { return c.model.alpha; });
    real("model.gamma", [](auto& c) -> auto& { return c.model.gamma; });
    real("model.beta_p", [](auto& c) -> auto& { return c.model.beta_p; });
    real("model.beta_u", [](auto& c) -> auto& { return c.model.beta_u; });
    real("model.c_p", [](auto& c) -> auto& { return c.model.c_p; });
    real("model.c_u", [](auto& c) -> auto& { return c.model.c_u; });
    real("model.loss", [](auto& c) -> auto& { return c.model.loss; });
    real("model.mu_i", [](auto& c) -> auto& { return c.model.mu_i; });
    real("smith.sigma", [](auto& c) -> auto& { return c.smith.sigma; });
    real("initial.y", [](auto& c) -> auto& { return c.initial.y; });
    real("initial.z_sbar", [](auto& c) -> auto& { return c.initial.z_sbar; });
    real("initial.z_ibar", [](auto& c) -> auto& { return c.initial.z_ibar; });
    real("sne.mu_s", [](auto& c) -> auto& { return c.mu_s; });
    real("sweep.mu_min", [](auto& c) -> auto& { return c.sweep.mu_min; });
    real("sweep.mu_max", [](auto& c) -> auto& { return c.sweep.mu_max; });
    real("sweep.step", [](auto& c) -> auto& { return c.sweep.step; });
    real("simulate.horizon", [](auto& c) -> auto& { return c.simulate.horizon; });
    real("simulate.step", [](auto& c) -> auto& { return c.simulate.step; });
    count("simulate.output_every",
          [](auto& c) -> auto& { return c.simulate.output_every; });
    real("optimize.horizon", [](auto& c) -> auto& { return c.optimize.horizon; });
    count("optimize.n_intervals",
          [](auto& c) -> auto& { return c.optimize.n_intervals; });
    real("optimize.cost_weight",
         [](auto& c) -> auto& { return c.optimize.cost_weight; });
    real("optimize.step", [](auto& c) -> auto& { return c.optimize.step; });
    count("optimize.max_iter", [](auto& c) -> auto& { return c.optimize.max_iter; });
    real("optimize.fd_delta", [](auto& c) -> auto& { return c.optimize.fd_delta; });
    real("optimize.credibility_margin",
         [](auto& c) -> auto& { return c.optimize.credibility_margin; });
    count("optimize.output_every",
          [](auto& c) -> auto& { return c.optimize.output_every; });
    real("grid.step", [](auto& c) -> auto& { return c.grid.step; });
    real("grid.lo", [](auto& c) -> auto& { return c.grid.lo; });
    real("grid.hi", [](auto& c) -> auto& { return c.grid.hi; });
    real("grid.t_max", [](auto& c) -> auto& { return c.grid.t_max; });
    real("grid.dt", [](auto& c) -> auto& { return c.grid.dt; });
    real("grid.tol", [](auto& c) -> auto& { return c.grid.tol; });
    return f;
  }();
  return fields;
}

}  // namespace detail

/// Applies one "section.key=value" override.
inline void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const auto& fields = detail::config_fields();
  const auto it = fields.find(key);
  if (it == fields.end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second.set(cfg, assignment.substr(eq + 1));
}

/// Parses INI text on top of `base`. Unknown sections or keys are errors.
inline ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty())
      throw ConfigError("top-level key '" + section + "' must live inside a [section]");
    for (const auto& [key, value] : body) apply_override(base, section + "." + key + "=" + value.data());
  }
  return base;
}

/// Canonical INI text; parse_config(dump_config(c)) == c.
inline std::string dump_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string current;
  for (const auto& [name, field] : detail::config_fields()) {
    const auto dot = name.find('.');
    const std::string section = name.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << name.substr(dot + 1) << " = " << field.get(cfg) << '\n';
  }
  return out.str();
}

/// FNV-1a over the canonical dump; identifies a parameter set in summaries.
inline std::string params_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : dump_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Named presets for the published experiments.
inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "fig1-left") {
    c.kind = "static-sweep";
  } else if (name == "fig1-right") {
    c.kind = "static-sweep";
    c.model.beta_u = 0.9;
    c.model.beta_p = 0.7;
    c.model.c_p = 19.0;
    c.model.c_u = 20.0;
  } else if (name == "fig2") {
    c.kind = "compare";
    c.model.c_p = 20.0;
    c.model.c_u = 25.0;
  } else if (name == "fig3") {
    c.kind = "optimize";
    c.model.c_p = 20.0;
    c.model.c_u = 25.0;
    c.optimize.cost_weight = 0.8;
  } else if (name == "fig4") {
    c.kind = "grid-mui";
    c.grid.step = 0.005;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig1-left", "fig1-right", "fig2", "fig3", "fig4"};
  return names;
}

}  // namespace persuade_sis
