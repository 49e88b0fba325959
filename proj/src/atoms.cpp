#include "photopair/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

namespace photopair::atoms {

namespace {

constexpr const char* kOrbitalLetters = "spdfghik";

std::string orbital_label(int n, int l) {
  std::string s = std::to_string(n);
  s += (l >= 0 && l < 8) ? kOrbitalLetters[l] : '?';
  return s;
}

void require_dipole(int l1, int l2) {
  if (std::abs(l1 - l2) != 1) {
    throw SelectionRuleError("E1 radial element requires dl = +-1, got l=" + std::to_string(l1) + " -> l'=" +
                             std::to_string(l2));
  }
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace

double hydrogen_energy(int n) {
  if (n < 1) throw std::invalid_argument("hydrogen_energy requires n >= 1");
  return -constants::rydberg_eV / (static_cast<double>(n) * n);
}

BoundState hydrogen_level(int n, int l, int m) {
  if (n < 1 || l < 0 || l >= n || std::abs(m) > l) {
    throw std::invalid_argument("invalid hydrogen level n=" + std::to_string(n) + " l=" + std::to_string(l) +
                                " m=" + std::to_string(m));
  }
  return {orbital_label(n, l), n, l, m, hydrogen_energy(n) - hydrogen_energy(1)};
}

double hydrogen_radial(int n, int l, double r) {
  if (n < 1 || l < 0 || l >= n) throw std::invalid_argument("hydrogen_radial: need 0 <= l < n");
  const double x = 2.0 * r / n;
  const double log_norm = 0.5 * (3.0 * std::log(2.0 / n) + log_factorial(n - l - 1) - std::log(2.0 * n) -
                                 log_factorial(n + l));
  const auto k = static_cast<unsigned>(n - l - 1);
  const auto alpha = static_cast<unsigned>(2 * l + 1);
  return std::exp(log_norm - 0.5 * x) * std::pow(x, l) * std::assoc_laguerre(k, alpha, x);
}

double hydrogen_radial_dipole(int n1, int l1, int n2, int l2) {
  require_dipole(l1, l2);
  if (l1 >= n1 || l2 >= n2 || l1 < 0 || l2 < 0) throw std::invalid_argument("hydrogen_radial_dipole: need 0 <= l < n");

  static std::mutex mutex;
  static std::map<std::tuple<int, int, int, int>, double> cache;
  // Symmetric, so key on the ordered pair.
  auto key = std::make_tuple(n1, l1, n2, l2);
  if (std::make_pair(n2, l2) < std::make_pair(n1, l1)) key = std::make_tuple(n2, l2, n1, l1);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  auto integrand = [&](double r) { return hydrogen_radial(n1, l1, r) * hydrogen_radial(n2, l2, r) * r * r * r; };
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  const double value = gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::numeric_limits<double>::infinity(),
                                                            20, 1e-14, &error);
  if (error > 1e-9 * std::max(1.0, std::abs(value))) {
    throw NumericError("radial dipole quadrature did not converge (error estimate " + std::to_string(error) + ")");
  }
  std::lock_guard lock(mutex);
  cache.emplace(key, value);
  return value;
}

double einstein_A_rate(double omega_eV, double radial_au, int l_upper, int l_lower) {
  require_dipole(l_upper, l_lower);
  if (!(omega_eV > 0.0)) throw std::invalid_argument("einstein_A_rate requires a positive transition energy");
  const double w = omega_eV / constants::hartree_eV;
  const double c = constants::fine_structure_inv;
  const double angular = static_cast<double>(std::max(l_upper, l_lower)) / (2.0 * l_upper + 1.0);
  const double rate_au = 4.0 * w * w * w / (3.0 * c * c * c) * angular * radial_au * radial_au;
  return rate_au / constants::atomic_time_fs;
}

double einstein_A(const BoundState& upper, const BoundState& lower) {
  require_dipole(upper.l, lower.l);
  const double omega = hydrogen_energy(upper.n) - hydrogen_energy(lower.n);
  if (!(omega > 0.0)) throw std::invalid_argument("einstein_A: upper level must lie above lower level");
  return einstein_A_rate(omega, hydrogen_radial_dipole(upper.n, upper.l, lower.n, lower.l), upper.l, lower.l);
}

void RadialMatrixElementTable::set_bound(int n1, int l1, int n2, int l2, double value) {
  require_dipole(l1, l2);
  bound_[{n1, l1, n2, l2}] = value;
  bound_[{n2, l2, n1, l1}] = value;
}

void RadialMatrixElementTable::set_continuum(double eps, int l, int n2, int l2, double value) {
  require_dipole(l, l2);
  auto& points = continuum_[{l, n2, l2}];
  auto it = std::lower_bound(points.begin(), points.end(), eps, [](const auto& p, double e) { return p.first < e; });
  if (it != points.end() && it->first == eps) {
    it->second = value;
  } else {
    points.insert(it, {eps, value});
  }
}

std::optional<double> RadialMatrixElementTable::bound(int n1, int l1, int n2, int l2) const {
  require_dipole(l1, l2);
  if (auto it = bound_.find({n1, l1, n2, l2}); it != bound_.end()) return it->second;
  return std::nullopt;
}

std::optional<double> RadialMatrixElementTable::continuum(double eps, int l, int n2, int l2) const {
  require_dipole(l, l2);
  auto it = continuum_.find({l, n2, l2});
  if (it == continuum_.end() || it->second.empty()) return std::nullopt;
  const auto& p = it->second;
  if (eps <= p.front().first) return p.front().second;
  if (eps >= p.back().first) return p.back().second;
  auto hi = std::lower_bound(p.begin(), p.end(), eps, [](const auto& q, double e) { return q.first < e; });
  auto lo = hi - 1;
  const double t = (eps - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

std::size_t RadialMatrixElementTable::size() const noexcept {
  std::size_t n = bound_.size() / 2;
  for (const auto& [key, points] : continuum_) n += points.size();
  return n;
}

RadialMatrixElementTable RadialMatrixElementTable::parse(std::istream& in) {
  RadialMatrixElementTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != 5) {
      throw ConfigError("radial table entry needs 5 columns, found " + std::to_string(tokens.size()), line_no);
    }
    try {
      const bool bound_entry = tokens[0].find_first_not_of("+-0123456789") == std::string::npos;
      const int l1 = std::stoi(tokens[1]);
      const int n2 = std::stoi(tokens[2]);
      const int l2 = std::stoi(tokens[3]);
      const double value = std::stod(tokens[4]);
      if (bound_entry) {
        table.set_bound(std::stoi(tokens[0]), l1, n2, l2, value);
      } else {
        table.set_continuum(std::stod(tokens[0]), l1, n2, l2, value);
      }
    } catch (const SelectionRuleError& e) {
      throw ConfigError(e.what(), line_no);
    } catch (const std::logic_error& e) {
      throw ConfigError("malformed number in radial table entry", line_no);
    }
  }
  return table;
}

RadialMatrixElementTable RadialMatrixElementTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open radial table '" + path + "'");
  return parse(in);
}

void AtomModel::validate() const {
  if (!(ionization_potential > 0.0)) throw std::invalid_argument(name + ": ionization potential must be > 0");
  double previous = ground.energy;
  for (const auto& s : intermediates) {
    if (std::abs(s.m) > s.l) throw std::invalid_argument(name + ": state " + s.label + " has |m| > l");
    if (!(s.energy > previous)) throw std::invalid_argument(name + ": level energies must be strictly increasing");
    previous = s.energy;
  }
  if (!(ionization_potential > previous)) {
    throw std::invalid_argument(name + ": bound levels must lie below the ionization potential");
  }
}

double AtomModel::phase_for(int l) const {
  auto it = continuum_phase.find(l);
  return it == continuum_phase.end() ? 0.0 : it->second;
}

const BoundState& AtomModel::intermediate(const std::string& label) const {
  auto it = std::find_if(intermediates.begin(), intermediates.end(), [&](const auto& s) { return s.label == label; });
  if (it == intermediates.end()) throw std::invalid_argument(name + ": no intermediate state '" + label + "'");
  return *it;
}

double AtomModel::bound_radial(const BoundState& a, const BoundState& b) const {
  if (auto v = radial_table.bound(a.n, a.l, b.n, b.l)) return *v;
  if (hydrogenic) return hydrogen_radial_dipole(a.n, a.l, b.n, b.l);
  throw std::invalid_argument(name + ": no radial element for " + a.label + " <-> " + b.label);
}

double AtomModel::continuum_radial(double eps, int l, const BoundState& bound) const {
  if (auto v = radial_table.continuum(eps, l, bound.n, bound.l)) return *v;
  return default_continuum_radial;
}

AtomModel calcium_model() {
  AtomModel ca;
  ca.name = "calcium";
  ca.ground = {"4s2", 4, 0, 0, 0.0};
  ca.intermediates = {{"4s5p", 5, 1, 0, 4.554}, {"4s6p", 6, 1, 0, 5.167}};
  ca.ionization_potential = 6.113;
  ca.radial_table.set_bound(4, 0, 5, 1, 1.0);
  ca.radial_table.set_bound(4, 0, 6, 1, 1.0);
  return ca;
}

AtomModel hydrogen_model(int n_max) {
  if (n_max < 1) throw std::invalid_argument("hydrogen_model requires n_max >= 1");
  AtomModel h;
  h.name = "hydrogen";
  h.ground = hydrogen_level(1, 0);
  h.ionization_potential = constants::rydberg_eV;
  h.hydrogenic = true;
  // One representative state per n; energies within a label set must increase.
  for (int n = 2; n <= n_max; ++n) h.intermediates.push_back(hydrogen_level(n, 0));
  return h;
}

}  // namespace photopair::atoms
