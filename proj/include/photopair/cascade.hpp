#pragma once

// Two-step E1 radiative cascade upper -> middle -> lower of the target atom and
// the coincidence probability of detecting both photons. Intermediate sublevels
// are summed coherently since the detectors do not resolve them; line-shape
// factors are absorbed into the normalization (modes sit on resonance).

#include <complex>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "photopair/angular.hpp"
#include "photopair/atoms.hpp"
#include "photopair/collision.hpp"

namespace photopair::cascade {

using cplx = std::complex<double>;

/// A single photon mode. `polarization` selects e_sigma (1) or e_sigma' (2).
struct PhotonMode {
  angular::Direction direction;
  int polarization = 1;
  double energy = 0.0;  // eV
  int occupation = 0;   // only used by the truncated propagator
};

/// Coupling amplitude A_0 in density-of-states form: |A_0 e*.d|^2 is the
/// emission rate per unit solid angle (atomic units), so the angular integral
/// reproduces the Einstein coefficient.
double mode_coupling(double omega_eV);

/// e_sigma = k x e0 / |k x e0|,  e_sigma' = k x e_sigma / |k x e_sigma|.
/// Throws SingularGeometryError when k is parallel to e0.
std::pair<Eigen::Vector3d, Eigen::Vector3d> emission_polarization_basis(const Eigen::Vector3d& direction,
                                                                        const Eigen::Vector3d& reference_e0);

/// Same with e0 = z, falling back to x along the z axis.
std::pair<Eigen::Vector3d, Eigen::Vector3d> polarization_basis(const Eigen::Vector3d& direction);

/// Polarization vector of a mode (real, transverse).
Eigen::Vector3d polarization_vector(const PhotonMode& mode);

/// Cartesian matrix element <lower l m | r | upper l m> for a unit radial integral.
Eigen::Vector3cd dipole_vector(int l_lower, int m_lower, int l_upper, int m_upper);

/// Emission amplitude A_0(w) e*_sigma . <lower| r |upper>. Zero when the E1
/// selection rules fail; ChannelError when the mode energy lies more than
/// `window` eV from the transition energy.
cplx e1_amplitude(const atoms::BoundState& upper, const atoms::BoundState& lower, const PhotonMode& mode,
                  double radial, double window = 0.05);
/// Hydrogen levels, radial integral computed.
cplx e1_amplitude(const atoms::BoundState& upper, const atoms::BoundState& lower, const PhotonMode& mode);

struct CascadeLevel {
  std::string label;
  int l = 0;
  double energy = 0.0;  // eV
};

/// upper -> middle -> lower with the two radial integrals.
struct CascadeScheme {
  CascadeLevel upper;
  CascadeLevel middle;
  CascadeLevel lower;
  double radial_upper_middle = 1.0;
  double radial_middle_lower = 1.0;
  double window = 0.05;  // eV, detector energy acceptance

  double first_photon_energy() const { return upper.energy - middle.energy; }
  double second_photon_energy() const { return middle.energy - lower.energy; }
  void validate() const;

  /// Hydrogen 4d -> 3p -> 1s.
  static CascadeScheme hydrogen_4d_3p_1s();
  static CascadeScheme hydrogen(int n_upper, int l_upper, int n_middle, int l_middle, int n_lower, int l_lower);
};

enum class Analyzer {
  Sigma,       // e_sigma
  SigmaPrime,  // e_sigma'
  Unresolved,  // both transverse polarizations summed
  Custom,      // explicit transverse vector
};

struct DetectorSpec {
  angular::Direction direction;
  Analyzer analyzer = Analyzer::Unresolved;
  Eigen::Vector3cd custom = Eigen::Vector3cd::Zero();  // used by Analyzer::Custom
  double energy = 0.0;                                 // eV, selects the cascade step

  /// M_ij = sum over analyzed vectors of conj(e_i) e_j.
  Eigen::Matrix3cd analyzer_matrix() const;

  static DetectorSpec from_mode(const PhotonMode& mode);
};

/// Bilinear kernel W with  P = sum_{m,m'} rho(m,m') W(m,m'), normalized so the
/// polarization-summed probability integrated over both detector spheres
/// equals tr(rho). Throws ChannelError when a detector energy misses its step.
Eigen::MatrixXcd coincidence_kernel(const CascadeScheme& scheme, const DetectorSpec& first, const DetectorSpec& second);

double coincidence_probability(const Eigen::MatrixXcd& rho, const CascadeScheme& scheme, const DetectorSpec& first,
                               const DetectorSpec& second);
double coincidence_probability(const collision::SublevelDensityMatrix& rho, const CascadeScheme& scheme,
                               const DetectorSpec& first, const DetectorSpec& second);
double coincidence_probability(const collision::SublevelDensityMatrix& rho, const CascadeScheme& scheme,
                               const PhotonMode& first, const PhotonMode& second);

/// Detector layout of the coincidence scheme: detector 2 fixed at
/// (theta, phi) = (pi/2, -pi/2) analyzing the z component on the lower step,
/// detector 1 in the phi = pi/2 plane at polar angle `theta1` analyzing e_sigma'.
std::pair<DetectorSpec, DetectorSpec> default_detectors(const CascadeScheme& scheme, double theta1);

}  // namespace photopair::cascade
