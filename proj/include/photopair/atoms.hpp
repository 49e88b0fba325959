#pragma once

// Atomic structure for the source atom (single-active-electron calcium model)
// and the target atom (hydrogen). Radial dipole integrals come from a pluggable
// table, falling back to analytic hydrogenic functions where the model allows.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace photopair::atoms {

struct BoundState {
  std::string label;
  int n = 1;
  int l = 0;
  int m = 0;
  double energy = 0.0;  // eV above the atom's ground state
};

/// Absolute hydrogen level energy -Ry/n^2 in eV. Throws std::invalid_argument for n < 1.
double hydrogen_energy(int n);

/// Hydrogen level n l m with its energy measured from 1s, e.g. label "4d".
BoundState hydrogen_level(int n, int l, int m = 0);

/// Normalized hydrogenic radial function R_nl(r), r in bohr.
double hydrogen_radial(int n, int l, double r);

/// int R_{n1 l1} r R_{n2 l2} r^2 dr (atomic units) by adaptive quadrature.
/// Throws SelectionRuleError unless |l1 - l2| == 1.
double hydrogen_radial_dipole(int n1, int l1, int n2, int l2);

/// E1 spontaneous emission rate (1/fs) summed over final sublevels, for a
/// transition energy omega (eV) and radial integral (a.u.).
double einstein_A_rate(double omega_eV, double radial_au, int l_upper, int l_lower);

/// E1 rate (1/fs) between hydrogen levels. Throws SelectionRuleError if forbidden.
double einstein_A(const BoundState& upper, const BoundState& lower);

/// Radial dipole integrals keyed by (n1 l1, n2 l2) for bound pairs and by
/// (eps, l, n2 l2) for continuum-bound pairs. Only dl = +-1 entries are accepted.
class RadialMatrixElementTable {
 public:
  void set_bound(int n1, int l1, int n2, int l2, double value);
  void set_continuum(double eps, int l, int n2, int l2, double value);

  /// Symmetric in the two states.
  std::optional<double> bound(int n1, int l1, int n2, int l2) const;
  /// Linear interpolation in eps between tabulated points, constant beyond them.
  std::optional<double> continuum(double eps, int l, int n2, int l2) const;

  std::size_t size() const noexcept;

  /// Plain-text format: `n1 l1 n2 l2 value` or `eps l n2 l2 value` per line,
  /// `#` starts a comment. An integer first column marks a bound entry.
  static RadialMatrixElementTable parse(std::istream& in);
  static RadialMatrixElementTable load(const std::string& path);

 private:
  std::map<std::tuple<int, int, int, int>, double> bound_;
  std::map<std::tuple<int, int, int>, std::vector<std::pair<double, double>>> continuum_;
};

struct AtomModel {
  std::string name;
  BoundState ground;
  std::vector<BoundState> intermediates;
  double ionization_potential = 0.0;    // eV
  std::map<int, double> continuum_phase;  // per-l phase (rad); missing l -> 0
  RadialMatrixElementTable radial_table;
  double default_continuum_radial = 1.0;  // magnitude used when the table has no entry
  bool hydrogenic = false;                // allow analytic bound-bound fallback

  void validate() const;
  double phase_for(int l) const;
  const BoundState& intermediate(const std::string& label) const;

  /// Radial integral between two bound states: table first, hydrogenic fallback.
  double bound_radial(const BoundState& a, const BoundState& b) const;
  /// Radial integral from a bound state to the continuum partial wave (eps, l).
  double continuum_radial(double eps, int l, const BoundState& bound) const;
};

/// Calcium-like source atom: 4s ground, 4s5p/4s6p 1P intermediates at 4.554 and
/// 5.167 eV, ionization potential 6.113 eV, unit radial elements.
AtomModel calcium_model();

/// Hydrogen target: 1s ground and bound levels up to n_max.
AtomModel hydrogen_model(int n_max = 4);

}  // namespace photopair::atoms
