#pragma once

// First Born excitation of the hydrogen target by the photoelectron wave
// packet. The packet is resynthesized from plane waves over all incident
// directions, so every partial wave drives the target coherently; the scattered
// electron is traced out over all final directions at fixed energy loss.

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "photopair/angular.hpp"
#include "photopair/ionization.hpp"

namespace photopair::collision {

using cplx = std::complex<double>;

struct CollisionGeometry {
  Eigen::Vector3d target_offset = Eigen::Vector3d::Zero();        // r_0B in bohr
  Eigen::Vector3d incident_direction = Eigen::Vector3d::UnitZ();  // source z axis mapped here

  void validate() const;
};

/// Excited manifold n l of hydrogen reached from 1s.
struct TargetManifold {
  std::string label = "4d";
  int n = 4;
  int l = 2;
  double excitation_energy = 0.0;  // eV above 1s

  static TargetManifold hydrogen(int n, int l);
};

/// Hermitian sublevel density matrix over m = -l..l (index m + l), normalized to
/// unit trace. `yield` keeps the trace before normalization, i.e. the relative
/// excitation probability.
class SublevelDensityMatrix {
 public:
  SublevelDensityMatrix() = default;
  SublevelDensityMatrix(std::string manifold, int l, Eigen::MatrixXcd rho, double yield);

  /// Normalizes `unnormalized` to unit trace; throws EmptyResultError for zero trace.
  static SublevelDensityMatrix from_unnormalized(std::string manifold, int l, const Eigen::MatrixXcd& unnormalized);

  const std::string& manifold() const noexcept { return manifold_; }
  int l() const noexcept { return l_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }
  double yield() const noexcept { return yield_; }
  cplx operator()(int m, int mp) const { return rho_(m + l_, mp + l_); }

  double trace() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;

  /// D rho D^dagger for the active rotation Rz(alpha) Ry(beta) Rz(gamma).
  SublevelDensityMatrix rotated(double alpha, double beta, double gamma) const;

 private:
  std::string manifold_;
  int l_ = 0;
  Eigen::MatrixXcd rho_;
  double yield_ = 0.0;
};

/// Radial part of the form factor, int R_nl(r) j_l(q r) R_10(r) r^2 dr (a.u.).
/// Throws NumericError when the adaptive quadrature misses its tolerance.
double born_radial_integral(int n, int l, double q);

/// <n l m | exp(i q.r) | 1s> for all m (index m + l), q in a.u.
std::vector<cplx> born_form_factors(const Eigen::Vector3d& q, const TargetManifold& target);
cplx born_form_factor(const Eigen::Vector3d& q, const TargetManifold& target, int m);

struct CollisionQuadrature {
  int final_theta = 32;
  int final_phi = 64;
  int incident_theta = 32;
  int incident_phi = 64;
};

/// Precomputed bilinear map from wave-packet amplitudes to the unnormalized
/// density matrix, for one energy grid, channel list, target and geometry.
/// Reusable across packets that differ only in their amplitudes.
class CollisionKernel {
 public:
  enum class Route {
    Auto,     // azimuthal-symmetry shortcut when the target sits at the origin
    General,  // full final-direction grid with the propagation phase
  };

  CollisionKernel(ionization::EnergyGrid grid, std::vector<angular::AngularQuantumNumbers> channels,
                  TargetManifold target, CollisionGeometry geometry, CollisionQuadrature quadrature = {},
                  Route route = Route::Auto, int threads = 1);

  const ionization::EnergyGrid& grid() const noexcept { return grid_; }
  const std::vector<angular::AngularQuantumNumbers>& channels() const noexcept { return channels_; }
  const TargetManifold& target() const noexcept { return target_; }
  bool any_open() const noexcept;

  /// rho(m, m') before trace normalization.
  Eigen::MatrixXcd unnormalized(const ionization::PhotoelectronWavePacket& packet) const;
  SublevelDensityMatrix density_matrix(const ionization::PhotoelectronWavePacket& packet) const;

 private:
  ionization::EnergyGrid grid_;
  std::vector<angular::AngularQuantumNumbers> channels_;
  TargetManifold target_;
  CollisionGeometry geometry_;
  CollisionQuadrature quadrature_;
  Route route_;
  std::vector<Eigen::MatrixXcd> gram_;  // per energy, (channel, m) x (channel, m'); empty when closed
};

/// Convenience wrapper building a kernel for one packet.
SublevelDensityMatrix excited_density_matrix(const ionization::PhotoelectronWavePacket& packet,
                                             const CollisionGeometry& geometry, const TargetManifold& target,
                                             const CollisionQuadrature& quadrature = {});

}  // namespace photopair::collision
