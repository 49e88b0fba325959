#pragma once

// Perturbative multiphoton ionization of the source atom. Each pathway is a
// sequence of one or two absorbed photons; the photoelectron wave packet is the
// coherent sum of pathway amplitudes a(eps, l, m) on a shared energy grid.

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "photopair/angular.hpp"
#include "photopair/atoms.hpp"
#include "photopair/field.hpp"

namespace photopair::ionization {

using cplx = std::complex<double>;
using angular::AngularQuantumNumbers;

struct PathwaySpec {
  std::string name;
  std::vector<field::FrequencyComponent> steps;  // absorbed photons in time order
  std::optional<std::string> intermediate;        // resonant state label, two-photon paths only

  /// Photon count mod 2.
  int parity() const noexcept { return static_cast<int>(steps.size() % 2); }

  /// Structural checks against the atom: step count, intermediate presence and
  /// E1 reachability. Throws std::invalid_argument / SelectionRuleError.
  void validate(const atoms::AtomModel& atom) const;
};

/// Uniform photoelectron energy grid (eV).
class EnergyGrid {
 public:
  EnergyGrid() = default;
  EnergyGrid(double lo, double hi, int points);

  /// `points` values spanning center +- halfwidth.
  static EnergyGrid centered(double center, double halfwidth, int points);

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double step() const noexcept { return step_; }
  /// Trapezoid weights.
  double weight(std::size_t i) const;

  friend bool operator==(const EnergyGrid&, const EnergyGrid&) = default;

 private:
  std::vector<double> points_;
  double step_ = 0.0;
};

/// 64 points spanning +-3 spectral widths of the pulses around 15.755 eV.
EnergyGrid default_energy_grid(const field::FrequencyComponent& pulse);
inline constexpr double kReferencePhotoelectronEnergy = 15.755;  // eV

/// All (l, m) with l <= l_max, ordered by l then m.
std::vector<AngularQuantumNumbers> channels_up_to(int l_max);

class PhotoelectronWavePacket {
 public:
  PhotoelectronWavePacket() = default;
  PhotoelectronWavePacket(EnergyGrid grid, std::vector<AngularQuantumNumbers> channels);

  const EnergyGrid& grid() const noexcept { return grid_; }
  const std::vector<AngularQuantumNumbers>& channels() const noexcept { return channels_; }
  std::optional<std::size_t> channel_index(int l, int m) const;

  /// amplitudes(i, c): energy point i, channel c.
  const Eigen::MatrixXcd& amplitudes() const noexcept { return amplitudes_; }
  Eigen::MatrixXcd& amplitudes() noexcept { return amplitudes_; }

  cplx amplitude(std::size_t energy_index, int l, int m) const;

  /// sum_i w_i sum_c |a_ic|^2
  double norm_squared() const;

  /// Channels whose peak magnitude exceeds `relative_tolerance` times the largest.
  std::vector<AngularQuantumNumbers> support(double relative_tolerance = 1e-12) const;

  /// Coherent sum. Throws std::invalid_argument when grids or channel lists differ.
  PhotoelectronWavePacket& operator+=(const PhotoelectronWavePacket& other);
  PhotoelectronWavePacket& operator*=(cplx factor);

  /// Active rotation of every energy slice's partial waves: a_l -> D^l a_l.
  PhotoelectronWavePacket rotated(double alpha, double beta, double gamma) const;

 private:
  EnergyGrid grid_;
  std::vector<AngularQuantumNumbers> channels_;
  Eigen::MatrixXcd amplitudes_;
};

/// First-order amplitude for a one-step pathway from the ground state.
/// Zero for closed channels (eps <= 0) and dipole-forbidden (l, m).
cplx one_photon_amplitude(const atoms::AtomModel& atom, const PathwaySpec& pathway, double epsilon, int l, int m);

/// Second-order resonant amplitude through the pathway's intermediate state,
/// evaluated in on-resonance pole-free form as the product of the spectral
/// amplitudes at the intermediate energy and at eps + IP - E_intermediate.
cplx two_photon_amplitude(const atoms::AtomModel& atom, const PathwaySpec& pathway, double epsilon, int l, int m);

/// Dispatches on the number of steps.
cplx pathway_amplitude(const atoms::AtomModel& atom, const PathwaySpec& pathway, double epsilon, int l, int m);

/// One pathway sampled on a grid over the given channels.
PhotoelectronWavePacket pathway_wavepacket(const atoms::AtomModel& atom, const PathwaySpec& pathway,
                                           const EnergyGrid& grid, const std::vector<AngularQuantumNumbers>& channels);

/// Coherent sum of already-sampled packets; all must share grid and channels.
PhotoelectronWavePacket combine_pathways(std::span<const PhotoelectronWavePacket> packets);

/// Samples every pathway on `grid` over all channels reachable by the longest pathway and sums them.
PhotoelectronWavePacket combine_pathways(const atoms::AtomModel& atom, std::span<const PathwaySpec> pathways,
                                         const EnergyGrid& grid);

/// Delays every step after the first (the probe photons) by tau (fs).
std::vector<PathwaySpec> apply_pump_probe_delay(std::span<const PathwaySpec> pathways, double tau);

/// Energy-integrated photoelectron angular distribution
/// sum_i w_i | sum_c a_ic Y_c(direction) |^2.
double momentum_distribution(const PhotoelectronWavePacket& packet, const angular::Direction& direction);

}  // namespace photopair::ionization
