#include "photopair/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "photopair/atoms.hpp"
#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

namespace photopair::runner {

namespace {

using constants::pi;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

const char* kPresetCommon = R"(
component.w1.omega = 4.554
component.w1.polarization = left
component.w2.omega = 17.324
component.w2.polarization = linear-z
component.w3.omega = 5.167
component.w3.polarization = left
component.w4.omega = 16.701
component.w4.polarization = linear-z
pathway.a.steps = w1,w2
pathway.a.intermediate = 4s5p
pathway.b.steps = w3,w4
pathway.b.intermediate = 4s6p
)";

const std::map<std::string, std::string>& preset_texts() {
  static const std::map<std::string, std::string> presets = {
      {"fig2", std::string(kPresetCommon) + R"(
scan.variable = relative_phase
scan.control = w3
scan.lo = 0
scan.hi = 6.283185307179586
scan.points = 64
scan.theta_lo = 0
scan.theta_hi = 3.141592653589793
scan.theta_points = 64
)"},
      {"fig3b", std::string(kPresetCommon) + R"(
scan.variable = relative_phase
scan.control = w3
scan.lo = 0
scan.hi = 6.283185307179586
scan.points = 64
scan.theta_lo = 0
scan.theta_hi = 3.141592653589793
scan.theta_points = 2
)"},
      {"fig3d", R"(
component.w0.omega = 21.868
component.w0.polarization = left
component.w3.omega = 5.167
component.w3.polarization = left
component.w4.omega = 16.701
component.w4.polarization = linear-z
pathway.a.steps = w0
pathway.b.steps = w3,w4
pathway.b.intermediate = 4s6p
scan.variable = relative_phase
scan.control = w3
scan.lo = 0
scan.hi = 6.283185307179586
scan.points = 64
scan.theta_lo = 0
scan.theta_hi = 3.141592653589793
scan.theta_points = 2
)"},
      {"fig4", std::string(kPresetCommon) + R"(
scan.variable = pump_probe_delay
scan.lo = 50
scan.hi = 80
scan.points = 128
scan.theta_lo = 0
scan.theta_hi = 3.141592653589793
scan.theta_points = 9
)"},
  };
  return presets;
}

const std::vector<std::regex>& schema() {
  static const std::vector<std::regex> keys = {
      std::regex(R"(preset)"),
      std::regex(R"(component\.[A-Za-z0-9_]+\.(omega|amplitude|polarization|phase|center_time|fwhm))"),
      std::regex(R"(pathway\.[A-Za-z0-9_]+\.(steps|intermediate))"),
      std::regex(R"(scan\.(variable|lo|hi|points|control|theta_lo|theta_hi|theta_points))"),
      std::regex(R"(detector1\.(phi|analyzer))"),
      std::regex(R"(detector2\.(theta|phi|analyzer))"),
      std::regex(R"(collision\.(target|offset|incident))"),
      std::regex(R"(cascade\.(middle|lower|window))"),
      std::regex(R"(grid\.(energy_center|energy_halfwidth|energy_points))"),
      std::regex(R"(quadrature\.(final_theta|final_phi|incident_theta|incident_phi))"),
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  int line(const std::string& key) const {
    auto it = raw_.lines.find(key);
    return it == raw_.lines.end() ? 0 : it->second;
  }
  bool has(const std::string& key) const { return raw_.values.count(key) != 0; }
  const std::string& str(const std::string& key) const { return raw_.values.at(key); }
  std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  double number(const std::string& key) const {
    const std::string& v = str(key);
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
      throw ConfigError(key + ": expected a number, got '" + v + "'", line(key));
    }
    return out;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key) const {
    const std::string& v = str(key);
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
      throw ConfigError(key + ": expected an integer, got '" + v + "'", line(key));
    }
    return out;
  }
  int integer(const std::string& key, int fallback) const { return has(key) ? integer(key) : fallback; }

  Eigen::Vector3d vector(const std::string& key, const Eigen::Vector3d& fallback) const {
    if (!has(key)) return fallback;
    const auto parts = split(str(key), ',');
    if (parts.size() != 3) throw ConfigError(key + ": expected three comma-separated numbers", line(key));
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) {
      const auto& s = parts[static_cast<std::size_t>(i)];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v(i));
      if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": malformed vector", line(key));
    }
    return v;
  }

 private:
  const RawConfig& raw_;
};

// Sorted unique middle segments of keys "<section>.<name>.<field>".
std::vector<std::string> names_in(const RawConfig& raw, const std::string& section) {
  std::set<std::string> names;
  const std::string prefix = section + ".";
  for (const auto& [k, v] : raw.values) {
    if (k.rfind(prefix, 0) != 0) continue;
    const auto rest = k.substr(prefix.size());
    names.insert(rest.substr(0, rest.find('.')));
  }
  return {names.begin(), names.end()};
}

ScanVariable scan_variable_from(const std::string& s, int line) {
  if (s == "relative_phase") return ScanVariable::RelativePhase;
  if (s == "pump_probe_delay") return ScanVariable::PumpProbeDelay;
  if (s == "detector1_theta") return ScanVariable::Detector1Theta;
  throw ConfigError("scan.variable: expected relative_phase, pump_probe_delay or detector1_theta, got '" + s + "'",
                    line);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  if (n > 1) v.back() = hi;
  return v;
}

bool analyzer_known(const std::string& a) {
  return a == "sigma" || a == "sigma_prime" || a == "unresolved" || a == "x" || a == "y" || a == "z";
}

}  // namespace

RawConfig parse_config(std::istream& in) {
  RawConfig raw;
  std::string text;
  int n = 0;
  while (std::getline(in, text)) {
    ++n;
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.erase(hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", n);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", n);
    if (value.empty()) throw ConfigError(key + ": empty value", n);
    if (raw.values.count(key)) throw ConfigError("duplicate key '" + key + "'", n);
    raw.values[key] = value;
    raw.lines[key] = n;
  }
  return raw;
}

RawConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : preset_texts()) names.push_back(k);
  return names;
}

RawConfig preset_config(const std::string& name) {
  auto it = preset_texts().find(name);
  if (it == preset_texts().end()) throw ConfigError("unknown preset '" + name + "'");
  RawConfig raw = parse_config_string(it->second);
  for (auto& [k, line] : raw.lines) line = 0;
  return raw;
}

std::string to_string(ScanVariable v) {
  switch (v) {
    case ScanVariable::RelativePhase:
      return "relative_phase";
    case ScanVariable::PumpProbeDelay:
      return "pump_probe_delay";
    case ScanVariable::Detector1Theta:
      return "detector1_theta";
  }
  return "?";
}

std::vector<double> ScanSpec::values() const { return linspace(lo, hi, points); }

std::vector<double> ScanSpec::thetas() const {
  if (variable == ScanVariable::Detector1Theta) return values();
  return linspace(theta_lo, theta_hi, theta_points);
}

cascade::DetectorSpec DetectorConfig::spec(double energy) const {
  cascade::DetectorSpec d;
  d.direction = {theta, phi};
  d.energy = energy;
  if (analyzer == "sigma") {
    d.analyzer = cascade::Analyzer::Sigma;
  } else if (analyzer == "sigma_prime") {
    d.analyzer = cascade::Analyzer::SigmaPrime;
  } else if (analyzer == "unresolved") {
    d.analyzer = cascade::Analyzer::Unresolved;
  } else {
    d.analyzer = cascade::Analyzer::Custom;
    d.custom = Eigen::Vector3cd::Zero();
    d.custom(analyzer == "x" ? 0 : analyzer == "y" ? 1 : 2) = 1.0;
  }
  return d;
}

std::pair<int, int> parse_level_label(const std::string& label) {
  static const std::string letters = "spdfghik";
  if (label.size() < 2) throw ConfigError("malformed level label '" + label + "'");
  int n = 0;
  auto [p, ec] = std::from_chars(label.data(), label.data() + label.size() - 1, n);
  const auto l = letters.find(label.back());
  if (ec != std::errc() || p != label.data() + label.size() - 1 || l == std::string::npos ||
      static_cast<int>(l) >= n || n < 1) {
    throw ConfigError("malformed level label '" + label + "'");
  }
  return {n, static_cast<int>(l)};
}

cascade::CascadeScheme Scenario::cascade_scheme() const {
  const auto [nm, lm] = parse_level_label(cascade_middle);
  const auto [nl, ll] = parse_level_label(cascade_lower);
  auto s = cascade::CascadeScheme::hydrogen(target.n, target.l, nm, lm, nl, ll);
  s.window = cascade_window;
  return s;
}

std::vector<ionization::PathwaySpec> Scenario::pathway_specs() const {
  std::vector<ionization::PathwaySpec> out;
  for (const auto& p : pathways) {
    ionization::PathwaySpec spec;
    spec.name = p.name;
    for (const auto& s : p.steps) spec.steps.push_back(field.component(s));
    spec.intermediate = p.intermediate;
    out.push_back(std::move(spec));
  }
  return out;
}

Scenario resolve(const RawConfig& user) {
  RawConfig raw;
  std::string preset;
  if (auto it = user.values.find("preset"); it != user.values.end()) {
    preset = it->second;
    try {
      raw = preset_config(preset);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), user.lines.at("preset"));
    }
  }
  for (const auto& [k, v] : user.values) {
    if (k == "preset") continue;
    raw.values[k] = v;
    raw.lines[k] = user.lines.count(k) ? user.lines.at(k) : 0;
  }

  for (const auto& [k, v] : raw.values) {
    const bool known = std::any_of(schema().begin(), schema().end(), [&](const auto& re) { return std::regex_match(k, re); });
    if (!known) throw ConfigError("unknown key '" + k + "'", raw.lines[k]);
  }

  const Reader r(raw);
  const auto component_labels = names_in(raw, "component");
  const auto pathway_names = names_in(raw, "pathway");

  std::vector<std::string> missing;
  if (component_labels.empty()) missing.push_back("component.<label>.omega");
  if (pathway_names.empty()) missing.push_back("pathway.<name>.steps");
  for (const char* k : {"scan.variable", "scan.lo", "scan.hi", "scan.points"})
    if (!r.has(k)) missing.push_back(k);
  for (const auto& c : component_labels)
    for (const char* f : {"omega", "polarization"})
      if (!r.has("component." + c + "." + f)) missing.push_back("component." + c + "." + f);
  for (const auto& p : pathway_names)
    if (!r.has("pathway." + p + ".steps")) missing.push_back("pathway." + p + ".steps");
  if (r.has("scan.variable") && r.str("scan.variable") == "relative_phase" && !r.has("scan.control")) {
    missing.push_back("scan.control");
  }
  if (!missing.empty()) {
    std::string msg = "missing required keys:";
    for (const auto& m : missing) msg += " " + m;
    throw ConfigError(msg);
  }

  Scenario s;
  s.preset = preset;

  std::vector<field::FrequencyComponent> comps;
  double max_fwhm_sigma = 0.0;
  for (const auto& c : component_labels) {
    const std::string base = "component." + c + ".";
    field::FrequencyComponent fc;
    fc.label = c;
    fc.omega = r.number(base + "omega");
    fc.amplitude = r.number(base + "amplitude", 1.0);
    try {
      fc.polarization = field::polarization_from_string(r.str(base + "polarization"));
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), r.line(base + "polarization"));
    }
    fc.phase = r.number(base + "phase", 0.0);
    fc.center_time = r.number(base + "center_time", 0.0);
    fc.fwhm = r.number(base + "fwhm", field::presets::pulse_fwhm);
    try {
      fc.validate();
    } catch (const std::exception& e) {
      throw ConfigError(c + ": " + e.what(), r.line(base + "omega"));
    }
    max_fwhm_sigma = std::max(max_fwhm_sigma, fc.spectral_sigma());
    comps.push_back(fc);
  }
  s.field = field::FieldSpec(comps);

  const auto atom = atoms::calcium_model();
  for (const auto& p : pathway_names) {
    const std::string base = "pathway." + p + ".";
    PathwayConfig pc;
    pc.name = p;
    pc.steps = split(r.str(base + "steps"), ',');
    for (const auto& st : pc.steps)
      if (!s.field.contains(st)) throw ConfigError(base + "steps: unknown component '" + st + "'", r.line(base + "steps"));
    if (r.has(base + "intermediate")) pc.intermediate = r.str(base + "intermediate");
    s.pathways.push_back(pc);
  }
  {
    const auto specs = s.pathway_specs();
    for (std::size_t i = 0; i < specs.size(); ++i) {
      try {
        specs[i].validate(atom);
      } catch (const std::exception& e) {
        throw ConfigError(e.what(), r.line("pathway." + specs[i].name + ".steps"));
      }
    }
  }

  auto& sc = s.scan;
  sc.variable = scan_variable_from(r.str("scan.variable"), r.line("scan.variable"));
  sc.lo = r.number("scan.lo");
  sc.hi = r.number("scan.hi");
  sc.points = r.integer("scan.points");
  if (sc.points < 2) throw ConfigError("scan.points must be at least 2", r.line("scan.points"));
  if (!(sc.lo < sc.hi)) throw ConfigError("scan.lo must be below scan.hi", std::max(r.line("scan.lo"), r.line("scan.hi")));
  sc.control = r.str("scan.control", "");
  if (!sc.control.empty() && !s.field.contains(sc.control)) {
    throw ConfigError("scan.control: unknown component '" + sc.control + "'", r.line("scan.control"));
  }
  sc.theta_lo = r.number("scan.theta_lo", 0.0);
  sc.theta_hi = r.number("scan.theta_hi", pi);
  sc.theta_points = r.integer("scan.theta_points", 64);
  if (sc.theta_points < 2) throw ConfigError("scan.theta_points must be at least 2", r.line("scan.theta_points"));
  if (!(sc.theta_lo < sc.theta_hi)) throw ConfigError("scan.theta_lo must be below scan.theta_hi",
                                                      std::max(r.line("scan.theta_lo"), r.line("scan.theta_hi")));

  s.detector1.phi = r.number("detector1.phi", pi / 2.0);
  s.detector1.analyzer = r.str("detector1.analyzer", "sigma_prime");
  s.detector2.theta = r.number("detector2.theta", pi / 2.0);
  s.detector2.phi = r.number("detector2.phi", -pi / 2.0);
  s.detector2.analyzer = r.str("detector2.analyzer", "z");
  for (const char* k : {"detector1.analyzer", "detector2.analyzer"}) {
    const auto& a = k[8] == '1' ? s.detector1.analyzer : s.detector2.analyzer;
    if (!analyzer_known(a)) {
      throw ConfigError(std::string(k) + ": expected sigma, sigma_prime, unresolved, x, y or z", r.line(k));
    }
  }

  try {
    const auto [n, l] = parse_level_label(r.str("collision.target", "4d"));
    s.target = collision::TargetManifold::hydrogen(n, l);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("collision.target: ") + e.what(), r.line("collision.target"));
  }
  s.geometry.target_offset = r.vector("collision.offset", Eigen::Vector3d::Zero());
  s.geometry.incident_direction = r.vector("collision.incident", Eigen::Vector3d::UnitZ());
  try {
    s.geometry.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), std::max(r.line("collision.offset"), r.line("collision.incident")));
  }

  s.cascade_middle = r.str("cascade.middle", "3p");
  s.cascade_lower = r.str("cascade.lower", "1s");
  s.cascade_window = r.number("cascade.window", 0.05);
  try {
    (void)s.cascade_scheme();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cascade: ") + e.what(), r.line("cascade.middle"));
  }

  s.energy_center = r.number("grid.energy_center", ionization::kReferencePhotoelectronEnergy);
  s.energy_halfwidth = r.number("grid.energy_halfwidth", 3.0 * max_fwhm_sigma);
  s.energy_points = r.integer("grid.energy_points", 64);
  if (!(s.energy_halfwidth > 0.0) || s.energy_points < 2) {
    throw ConfigError("grid: energy_halfwidth must be positive and energy_points at least 2",
                      std::max(r.line("grid.energy_halfwidth"), r.line("grid.energy_points")));
  }

  s.quadrature.final_theta = r.integer("quadrature.final_theta", 32);
  s.quadrature.final_phi = r.integer("quadrature.final_phi", 64);
  s.quadrature.incident_theta = r.integer("quadrature.incident_theta", 32);
  s.quadrature.incident_phi = r.integer("quadrature.incident_phi", 64);
  const std::pair<const char*, int> sizes[] = {{"quadrature.final_theta", s.quadrature.final_theta},
                                               {"quadrature.final_phi", s.quadrature.final_phi},
                                               {"quadrature.incident_theta", s.quadrature.incident_theta},
                                               {"quadrature.incident_phi", s.quadrature.incident_phi}};
  for (const auto& [key, q] : sizes) {
    if (q < 2 || q > 512) throw ConfigError(std::string(key) + ": must lie in [2, 512]", r.line(key));
  }
  return s;
}

Scenario load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return resolve(parse_config(in));
}

Scenario load_config_string(const std::string& text) { return resolve(parse_config_string(text)); }

std::vector<std::pair<std::string, std::string>> resolved_entries(const Scenario& s) {
  std::map<std::string, std::string> m;
  for (const auto& c : s.field.components()) {
    const std::string b = "component." + c.label + ".";
    m[b + "omega"] = fmt(c.omega);
    m[b + "amplitude"] = fmt(c.amplitude);
    m[b + "polarization"] = field::to_string(c.polarization);
    m[b + "phase"] = fmt(c.phase);
    m[b + "center_time"] = fmt(c.center_time);
    m[b + "fwhm"] = fmt(c.fwhm);
  }
  for (const auto& p : s.pathways) {
    std::string steps;
    for (const auto& st : p.steps) steps += (steps.empty() ? "" : ",") + st;
    m["pathway." + p.name + ".steps"] = steps;
    if (p.intermediate) m["pathway." + p.name + ".intermediate"] = *p.intermediate;
  }
  m["scan.variable"] = to_string(s.scan.variable);
  m["scan.lo"] = fmt(s.scan.lo);
  m["scan.hi"] = fmt(s.scan.hi);
  m["scan.points"] = std::to_string(s.scan.points);
  if (!s.scan.control.empty()) m["scan.control"] = s.scan.control;
  m["scan.theta_lo"] = fmt(s.scan.theta_lo);
  m["scan.theta_hi"] = fmt(s.scan.theta_hi);
  m["scan.theta_points"] = std::to_string(s.scan.theta_points);
  m["detector1.phi"] = fmt(s.detector1.phi);
  m["detector1.analyzer"] = s.detector1.analyzer;
  m["detector2.theta"] = fmt(s.detector2.theta);
  m["detector2.phi"] = fmt(s.detector2.phi);
  m["detector2.analyzer"] = s.detector2.analyzer;
  m["collision.target"] = s.target.label;
  const auto& o = s.geometry.target_offset;
  const auto& d = s.geometry.incident_direction;
  m["collision.offset"] = fmt(o.x()) + "," + fmt(o.y()) + "," + fmt(o.z());
  m["collision.incident"] = fmt(d.x()) + "," + fmt(d.y()) + "," + fmt(d.z());
  m["cascade.middle"] = s.cascade_middle;
  m["cascade.lower"] = s.cascade_lower;
  m["cascade.window"] = fmt(s.cascade_window);
  m["grid.energy_center"] = fmt(s.energy_center);
  m["grid.energy_halfwidth"] = fmt(s.energy_halfwidth);
  m["grid.energy_points"] = std::to_string(s.energy_points);
  m["quadrature.final_theta"] = std::to_string(s.quadrature.final_theta);
  m["quadrature.final_phi"] = std::to_string(s.quadrature.final_phi);
  m["quadrature.incident_theta"] = std::to_string(s.quadrature.incident_theta);
  m["quadrature.incident_phi"] = std::to_string(s.quadrature.incident_phi);
  return {m.begin(), m.end()};
}

std::string dump(const Scenario& s) {
  std::string out;
  for (const auto& [k, v] : resolved_entries(s)) out += k + " = " + v + "\n";
  return out;
}

std::string normalize(const std::string& text) { return dump(load_config_string(text)); }

}  // namespace photopair::runner
