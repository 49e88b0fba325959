#pragma once

// Validation propagator: iterates the time-dependent coefficient equations of
// an emitter chain coupled to a small discrete photon-mode grid, order by order
// in the coupling, in the interaction picture with rotating-wave couplings.
// Each cascade step owns its own channel of modes, so occupations are at most
// one per mode and the photon number equals the chain depth.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "photopair/cascade.hpp"

namespace photopair::oracle {

using cplx = std::complex<double>;

/// The 12 vertices of a regular icosahedron (unit vectors).
std::vector<Eigen::Vector3d> icosahedron_directions();

/// Directions x {sigma, sigma'} x energies, direction-major.
std::vector<cascade::PhotonMode> mode_grid(std::span<const Eigen::Vector3d> directions, std::span<const double> energies);

/// {center - detuning, center, center + detuning}.
std::vector<double> channel_energies(double center, double detuning);

struct TruncatedSystem {
  std::vector<cascade::CascadeLevel> levels;           // chain, decreasing energy
  std::vector<double> radial;                          // levels.size() - 1 radial integrals
  std::vector<std::vector<cascade::PhotonMode>> modes;  // one channel per step
  double coupling = 1e-4;                              // fs^-1 per unit emission amplitude (a.u.)
  double window = 0.05;                                // eV, channel acceptance
  Eigen::MatrixXcd initial_rho;                        // over sublevels of levels.front()
  std::size_t max_basis = 100000;

  std::size_t steps() const { return levels.size() - 1; }
  double transition_energy(std::size_t step) const { return levels[step].energy - levels[step + 1].energy; }
  int dim(std::size_t sector) const { return 2 * levels[sector].l + 1; }
  std::size_t sector_size(std::size_t sector) const;
  std::size_t basis_size() const;
  /// Throws invalid_argument for inconsistent input, BasisSizeError above max_basis.
  void validate() const;

  /// Hydrogen 4d -> 3p -> 1s on `directions` x 2 polarizations x 3 energies per channel.
  static TruncatedSystem hydrogen_cascade(const Eigen::MatrixXcd& rho, std::span<const Eigen::Vector3d> directions,
                                          double coupling = 1e-4, double detuning = 0.01);
  static TruncatedSystem hydrogen_cascade(const Eigen::MatrixXcd& rho, double coupling = 1e-4,
                                          double detuning = 0.01);
};

struct History {
  TruncatedSystem system;
  int order = 0;
  std::vector<double> times;
  Eigen::MatrixXd sector_population;  // times x sectors, weighted over mixture components
  std::vector<double> weights;        // mixture weights (eigenvalues of initial_rho)
  std::vector<Eigen::VectorXcd> coefficients;  // final coefficients per component
  std::vector<std::size_t> offsets;   // sector start indices

  /// First recorded time at which the sector population exceeds `threshold`, or -1.
  double first_crossing(std::size_t sector, double threshold) const;
  double norm() const;
};

/// Largest interaction-picture Bohr frequency (fs^-1) among coupled modes.
double max_bohr_frequency(const TruncatedSystem& system);

/// Sum_{j<=order} S^(j)(t_final) with S^(j)(t) = -i int_0^t V_I(t') S^(j-1)(t') dt'
/// (trapezoid rule). Throws StabilityError when dt > 0.1 / max_bohr_frequency.
History propagate(const TruncatedSystem& system, int order, double t_final, double dt);

/// Joint occupation of mode1 (first channel) and mode2 (second channel),
/// summed over final sublevels; normalized over the two-photon sector unless
/// `normalized` is false. Throws invalid_argument when a mode is not in the grid.
double extract_coincidence(const History& history, const cascade::PhotonMode& mode1, const cascade::PhotonMode& mode2,
                           bool normalized = true);

/// Max |p_oracle - p_cascade| / max(p_cascade) over the on-resonance mode pairs,
/// both patterns normalized to unit sum over that slice.
double cascade_deviation(const History& history, const cascade::CascadeScheme& scheme);

}  // namespace photopair::oracle
