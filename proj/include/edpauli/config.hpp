#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "edpauli/field.hpp"
#include "edpauli/params.hpp"

namespace edpauli {

// ---------------------------------------------------------------------------
// Minimal strict TOML subset: [tables], key = value with strings, numbers,
// booleans and flat arrays, full-line or trailing # comments.

namespace minitoml {

struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Value {
  enum class Kind { boolean, integer, real, string, array };
  Kind kind = Kind::string;
  bool b = false;
  long long i = 0;
  double r = 0.0;
  std::string s;
  std::vector<Value> items;
  int line = 0;

  bool is_number() const { return kind == Kind::integer || kind == Kind::real; }
  double as_real() const {
    if (kind == Kind::integer) return static_cast<double>(i);
    if (kind == Kind::real) return r;
    throw parse_error("value is not a number (line " + std::to_string(line) + ")");
  }
};

using Table = std::map<std::string, Value>;

struct Document {
  Table root;
  std::map<std::string, Table> sections;
};

namespace detail {

inline std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

/// Removes a trailing comment that is not inside a string literal.
inline std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

inline Value parse_scalar(const std::string& tok, int line) {
  Value v;
  v.line = line;
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    v.kind = Value::Kind::string;
    std::string out;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
      if (tok[i] == '\\' && i + 2 < tok.size()) {
        ++i;
        switch (tok[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: throw parse_error("unknown escape (line " + std::to_string(line) + ")");
        }
      } else {
        out += tok[i];
      }
    }
    v.s = out;
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.kind = Value::Kind::boolean;
    v.b = (tok == "true");
    return v;
  }
  // number: integer when it has no '.', 'e' or 'E'
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
    throw parse_error("cannot parse value '" + tok + "' (line " + std::to_string(line) + ")");
  if (tok.find_first_of(".eE") == std::string::npos) {
    v.kind = Value::Kind::integer;
    v.i = std::strtoll(tok.c_str(), nullptr, 10);
    v.r = d;
  } else {
    v.kind = Value::Kind::real;
    v.r = d;
  }
  return v;
}

inline Value parse_value(const std::string& raw, int line) {
  const std::string tok = strip(raw);
  if (tok.empty()) throw parse_error("missing value (line " + std::to_string(line) + ")");
  if (tok.front() == '[') {
    if (tok.back() != ']')
      throw parse_error("unterminated array (line " + std::to_string(line) + ")");
    Value v;
    v.kind = Value::Kind::array;
    v.line = line;
    const std::string body = tok.substr(1, tok.size() - 2);
    std::string cur;
    bool in_str = false;
    int depth = 0;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (!in_str && c == '[') ++depth;
      if (!in_str && c == ']') --depth;
      if (c == ',' && !in_str && depth == 0) {
        if (!strip(cur).empty()) v.items.push_back(parse_scalar(strip(cur), line));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!strip(cur).empty()) v.items.push_back(parse_scalar(strip(cur), line));
    return v;
  }
  return parse_scalar(tok, line);
}

}  // namespace detail

inline Document parse(const std::string& text) {
  Document doc;
  Table* current = &doc.root;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = detail::strip(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw parse_error("malformed table header (line " + std::to_string(lineno) + ")");
      const std::string name = detail::strip(line.substr(1, line.size() - 2));
      if (name.empty())
        throw parse_error("empty table name (line " + std::to_string(lineno) + ")");
      current = &doc.sections[name];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw parse_error("expected key = value (line " + std::to_string(lineno) + ")");
    const std::string key = detail::strip(line.substr(0, eq));
    if (key.empty()) throw parse_error("empty key (line " + std::to_string(lineno) + ")");
    if (current->count(key))
      throw parse_error("duplicate key '" + key + "' (line " + std::to_string(lineno) + ")");
    (*current)[key] = detail::parse_value(line.substr(eq + 1), lineno);
  }
  return doc;
}

}  // namespace minitoml

// ---------------------------------------------------------------------------
// Scenario configuration.

enum class ScenarioId { free_packet, larmor, stern_gerlach, rotation_demo, custom };

inline std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::free_packet: return "free_packet";
    case ScenarioId::larmor: return "larmor";
    case ScenarioId::stern_gerlach: return "stern_gerlach";
    case ScenarioId::rotation_demo: return "rotation_demo";
    case ScenarioId::custom: return "custom";
  }
  return "?";
}

struct GridConfig {
  int dim = 1;
  std::vector<int> points{512};
  std::vector<double> extent{25.6};
};

struct GaugeConfig {
  double a0 = 0.0;                      // uniform scalar potential
  std::vector<double> a;                // uniform covector, one entry per axis
  std::array<double, 3> b{0.0, 0.0, 0.0};  // uniform magnetic field
  double b_z_gradient = 0.0;            // B = (0, 0, b' * z), z = last axis
};

struct InitialStateConfig {
  std::vector<double> center;           // defaults to the box center
  double width = 1.0;                   // initial position standard deviation
  std::vector<double> momentum;         // uniform phase gradient p
  std::array<cplx, 2> spinor{cplx(1.0, 0.0), cplx(0.0, 0.0)};
};

struct SamplerConfig {
  int walkers = 0;
  std::uint64_t seed = 1;
  int stride = 1;
  bool k_labels = false;
};

struct OutputConfig {
  std::string directory = "out";
  int stride = 1;
  bool snapshots = false;
};

struct ScenarioConfig {
  ScenarioId id = ScenarioId::free_packet;
  int steps = 1000;
  GridConfig grid;
  EdParams params;
  GaugeConfig gauge;
  InitialStateConfig initial;
  SamplerConfig sampler;
  OutputConfig output;
};

struct ConfigResult {
  std::optional<ScenarioConfig> config;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty() && config.has_value(); }
};

namespace config_detail {

inline const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> k = {
      {"", {"scenario", "steps"}},
      {"grid", {"dim", "points", "extent"}},
      {"params", {"mass", "hbar", "eta", "beta", "dt"}},
      {"gauge", {"a0", "a", "b", "b_z_gradient"}},
      {"initial_state", {"center", "width", "momentum", "spinor"}},
      {"sampler", {"walkers", "seed", "stride", "k_labels"}},
      {"output", {"directory", "stride", "snapshots"}},
  };
  return k;
}

inline void check_unknown(const minitoml::Document& doc, std::vector<std::string>& errors) {
  const auto& known = known_keys();
  for (const auto& [key, val] : doc.root) {
    const auto& top = known.at("");
    if (std::find(top.begin(), top.end(), key) == top.end())
      errors.push_back("unknown key '" + key + "' (line " + std::to_string(val.line) + ")");
  }
  for (const auto& [section, table] : doc.sections) {
    auto it = known.find(section);
    if (it == known.end()) {
      errors.push_back("unknown section [" + section + "]");
      continue;
    }
    for (const auto& [key, val] : table) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        errors.push_back("unknown key '" + section + "." + key + "' (line " +
                         std::to_string(val.line) + ")");
    }
  }
}

inline double get_real(const minitoml::Table& t, const std::string& key, double fallback,
                       std::vector<std::string>& errors, const std::string& where) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (!it->second.is_number()) {
    errors.push_back(where + "." + key + ": expected a number");
    return fallback;
  }
  return it->second.as_real();
}

inline long long get_int(const minitoml::Table& t, const std::string& key, long long fallback,
                         std::vector<std::string>& errors, const std::string& where) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (it->second.kind != minitoml::Value::Kind::integer) {
    errors.push_back(where + "." + key + ": expected an integer");
    return fallback;
  }
  return it->second.i;
}

inline bool get_bool(const minitoml::Table& t, const std::string& key, bool fallback,
                     std::vector<std::string>& errors, const std::string& where) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (it->second.kind != minitoml::Value::Kind::boolean) {
    errors.push_back(where + "." + key + ": expected true/false");
    return fallback;
  }
  return it->second.b;
}

inline std::vector<double> get_real_array(const minitoml::Table& t, const std::string& key,
                                          const std::vector<double>& fallback,
                                          std::vector<std::string>& errors,
                                          const std::string& where) {
  auto it = t.find(key);
  if (it == t.end()) return fallback;
  if (it->second.kind != minitoml::Value::Kind::array) {
    if (it->second.is_number()) return {it->second.as_real()};
    errors.push_back(where + "." + key + ": expected an array of numbers");
    return fallback;
  }
  std::vector<double> out;
  for (const auto& v : it->second.items) {
    if (!v.is_number()) {
      errors.push_back(where + "." + key + ": expected an array of numbers");
      return fallback;
    }
    out.push_back(v.as_real());
  }
  return out;
}

}  // namespace config_detail

/// Parses and validates a scenario configuration. Unknown keys are errors
/// (strict mode); every validation problem is reported, not just the first.
inline ConfigResult load_scenario_config(const std::string& toml_text) {
  ConfigResult result;
  minitoml::Document doc;
  try {
    doc = minitoml::parse(toml_text);
  } catch (const minitoml::parse_error& e) {
    result.errors.push_back(e.what());
    return result;
  }

  auto& errors = result.errors;
  config_detail::check_unknown(doc, errors);

  ScenarioConfig cfg;

  // scenario id
  auto sc = doc.root.find("scenario");
  if (sc == doc.root.end()) {
    errors.push_back("missing required key 'scenario'");
  } else if (sc->second.kind != minitoml::Value::Kind::string) {
    errors.push_back("scenario: expected a string");
  } else {
    const std::string& name = sc->second.s;
    if (name == "free_packet") cfg.id = ScenarioId::free_packet;
    else if (name == "larmor") cfg.id = ScenarioId::larmor;
    else if (name == "stern_gerlach") cfg.id = ScenarioId::stern_gerlach;
    else if (name == "rotation_demo") cfg.id = ScenarioId::rotation_demo;
    else if (name == "custom") cfg.id = ScenarioId::custom;
    else errors.push_back("scenario: unknown id '" + name + "'");
  }

  static const minitoml::Table empty;
  auto section = [&](const char* name) -> const minitoml::Table& {
    auto it = doc.sections.find(name);
    return it == doc.sections.end() ? empty : it->second;
  };

  // scenario-dependent grid defaults; larmor isolates spin precession on a
  // 4-cell line.
  if (cfg.id == ScenarioId::larmor) {
    cfg.grid.points = {4};
    cfg.grid.extent = {4.0};
    cfg.steps = 1300;
  }

  // [grid]
  {
    const auto& t = section("grid");
    const int dim = static_cast<int>(config_detail::get_int(t, "dim", cfg.grid.dim, errors, "grid"));
    std::vector<double> def_pts(cfg.grid.points.begin(), cfg.grid.points.end());
    const auto pts = config_detail::get_real_array(t, "points", def_pts, errors, "grid");
    const auto ext = config_detail::get_real_array(t, "extent", cfg.grid.extent, errors, "grid");
    cfg.grid.dim = dim;
    cfg.grid.points.assign(pts.size(), 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cfg.grid.points[i] = static_cast<int>(pts[i]);
      if (pts[i] != std::floor(pts[i])) errors.push_back("grid.points: entries must be integers");
    }
    cfg.grid.extent = ext;
    if (dim < 1 || dim > 3) errors.push_back("grid.dim: must be 1, 2 or 3");
    else {
      if (cfg.grid.points.size() != static_cast<std::size_t>(dim))
        errors.push_back("grid.points: need exactly dim entries");
      if (cfg.grid.extent.size() != static_cast<std::size_t>(dim))
        errors.push_back("grid.extent: need exactly dim entries");
    }
    for (int p : cfg.grid.points)
      if (p < 2) errors.push_back("grid.points: each axis needs at least 2 points");
    for (double e : cfg.grid.extent)
      if (!(e > 0.0)) errors.push_back("grid.extent: entries must be positive");
  }

  // [params]
  {
    const auto& t = section("params");
    cfg.params.mass = config_detail::get_real(t, "mass", 1.0, errors, "params");
    cfg.params.hbar = config_detail::get_real(t, "hbar", 1.0, errors, "params");
    cfg.params.eta = config_detail::get_real(t, "eta", cfg.params.hbar, errors, "params");
    cfg.params.beta = config_detail::get_real(t, "beta", 1.0, errors, "params");
    cfg.params.dt = config_detail::get_real(t, "dt", 1e-3, errors, "params");
    if (!(cfg.params.mass > 0.0)) errors.push_back("params.mass: must be > 0");
    if (!(cfg.params.hbar > 0.0)) errors.push_back("params.hbar: must be > 0");
    if (!(cfg.params.eta > 0.0)) errors.push_back("params.eta: must be > 0");
    if (!(cfg.params.dt > 0.0)) errors.push_back("params.dt: must be > 0");
  }

  // steps
  cfg.steps = static_cast<int>(config_detail::get_int(doc.root, "steps", cfg.steps, errors, ""));
  if (cfg.steps < 0) errors.push_back("steps: must be >= 0");

  // [gauge]
  {
    const auto& t = section("gauge");
    cfg.gauge.a0 = config_detail::get_real(t, "a0", 0.0, errors, "gauge");
    cfg.gauge.a = config_detail::get_real_array(t, "a", {}, errors, "gauge");
    const auto b = config_detail::get_real_array(t, "b", {0.0, 0.0, 0.0}, errors, "gauge");
    if (b.size() != 3) errors.push_back("gauge.b: need exactly 3 entries");
    else cfg.gauge.b = {b[0], b[1], b[2]};
    cfg.gauge.b_z_gradient = config_detail::get_real(t, "b_z_gradient", 0.0, errors, "gauge");
    if (!cfg.gauge.a.empty() && cfg.grid.dim >= 1 &&
        cfg.gauge.a.size() != static_cast<std::size_t>(cfg.grid.dim))
      errors.push_back("gauge.a: need exactly dim entries");
  }

  // [initial_state]
  {
    const auto& t = section("initial_state");
    cfg.initial.center =
        config_detail::get_real_array(t, "center", std::vector<double>(cfg.grid.dim, 0.0), errors,
                                      "initial_state");
    cfg.initial.width = config_detail::get_real(t, "width", 1.0, errors, "initial_state");
    cfg.initial.momentum =
        config_detail::get_real_array(t, "momentum", std::vector<double>(cfg.grid.dim, 0.0),
                                      errors, "initial_state");
    const auto sp = config_detail::get_real_array(t, "spinor", {1.0, 0.0}, errors, "initial_state");
    if (sp.size() == 2) {
      cfg.initial.spinor = {cplx(sp[0], 0.0), cplx(sp[1], 0.0)};
    } else if (sp.size() == 4) {
      cfg.initial.spinor = {cplx(sp[0], sp[1]), cplx(sp[2], sp[3])};
    } else {
      errors.push_back("initial_state.spinor: need 2 entries (c+, c-) or 4 (re+, im+, re-, im-)");
    }
    // normalized on load
    const double nrm = std::sqrt(std::norm(cfg.initial.spinor[0]) + std::norm(cfg.initial.spinor[1]));
    if (nrm > 0.0) {
      cfg.initial.spinor[0] /= nrm;
      cfg.initial.spinor[1] /= nrm;
    } else {
      errors.push_back("initial_state.spinor: must be nonzero");
    }
    if (!(cfg.initial.width > 0.0)) errors.push_back("initial_state.width: must be > 0");
    if (cfg.initial.center.size() != static_cast<std::size_t>(cfg.grid.dim))
      errors.push_back("initial_state.center: need exactly dim entries");
    if (cfg.initial.momentum.size() != static_cast<std::size_t>(cfg.grid.dim))
      errors.push_back("initial_state.momentum: need exactly dim entries");
  }

  // [sampler]
  {
    const auto& t = section("sampler");
    cfg.sampler.walkers =
        static_cast<int>(config_detail::get_int(t, "walkers", 0, errors, "sampler"));
    cfg.sampler.seed =
        static_cast<std::uint64_t>(config_detail::get_int(t, "seed", 1, errors, "sampler"));
    cfg.sampler.stride = static_cast<int>(config_detail::get_int(t, "stride", 1, errors, "sampler"));
    cfg.sampler.k_labels = config_detail::get_bool(t, "k_labels", false, errors, "sampler");
    if (cfg.sampler.walkers < 0) errors.push_back("sampler.walkers: must be >= 0");
    if (cfg.sampler.stride < 1) errors.push_back("sampler.stride: must be >= 1");
  }

  // [output]
  {
    const auto& t = section("output");
    auto it = t.find("directory");
    if (it != t.end()) {
      if (it->second.kind != minitoml::Value::Kind::string)
        errors.push_back("output.directory: expected a string");
      else
        cfg.output.directory = it->second.s;
    }
    cfg.output.stride = static_cast<int>(config_detail::get_int(t, "stride", 1, errors, "output"));
    cfg.output.snapshots = config_detail::get_bool(t, "snapshots", false, errors, "output");
    if (cfg.output.stride < 1) errors.push_back("output.stride: must be >= 1");
  }

  // scenario-specific requirements
  if (cfg.id == ScenarioId::larmor) {
    const double bnorm = std::sqrt(cfg.gauge.b[0] * cfg.gauge.b[0] +
                                   cfg.gauge.b[1] * cfg.gauge.b[1] +
                                   cfg.gauge.b[2] * cfg.gauge.b[2]);
    if (!(bnorm > 0.0)) errors.push_back("larmor: gauge.b must be a nonzero uniform field");
    if (cfg.params.beta == 0.0) errors.push_back("larmor: params.beta must be nonzero");
  }
  if (cfg.id == ScenarioId::stern_gerlach) {
    if (cfg.gauge.b_z_gradient == 0.0)
      errors.push_back("stern_gerlach: gauge.b_z_gradient must be nonzero");
    if (cfg.params.beta == 0.0) errors.push_back("stern_gerlach: params.beta must be nonzero");
  }

  // stability guard: a warning, not an error
  if (errors.empty()) {
    Grid g(cfg.grid.points, cfg.grid.extent);
    if (!cfg.params.stability_ok(g)) {
      std::ostringstream os;
      os << "stability guard: m h^2 / (hbar dt) = " << cfg.params.stability_ratio(g)
         << " <= 1 on the coarsest axis; the implicit step stays stable but accuracy degrades";
      result.warnings.push_back(os.str());
    }
  }

  if (errors.empty()) result.config = cfg;
  return result;
}

}  // namespace edpauli
