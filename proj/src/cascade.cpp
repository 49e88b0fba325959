#include "photopair/cascade.hpp"

#include <cmath>
#include <stdexcept>

#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

namespace photopair::cascade {

namespace {

using constants::pi;

constexpr double kSingularTolerance = 1e-12;

// Emission rate integrated over the sphere and summed over polarizations and
// final sublevels, per unit A_0^2: (8 pi / 3) R^2 l_> / (2 l_upper + 1).
double integrated_strength(int l_upper, int l_lower, double radial) {
  return 8.0 * pi / 3.0 * radial * radial * std::max(l_upper, l_lower) / (2.0 * l_upper + 1.0);
}

void check_channel(double energy, double expected, double window, const char* step) {
  if (std::abs(energy - expected) > window) {
    throw ChannelError(std::string("photon energy ") + std::to_string(energy) + " eV does not match the " + step +
                       " cascade step at " + std::to_string(expected) + " eV");
  }
}

}  // namespace

double mode_coupling(double omega_eV) {
  if (!(omega_eV > 0.0)) throw std::invalid_argument("mode_coupling requires a positive photon energy");
  const double w = omega_eV / constants::hartree_eV;
  const double c = constants::fine_structure_inv;
  return std::sqrt(w * w * w / (2.0 * pi * c * c * c));
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> emission_polarization_basis(const Eigen::Vector3d& direction,
                                                                        const Eigen::Vector3d& reference_e0) {
  const Eigen::Vector3d k = direction.normalized();
  const Eigen::Vector3d a = k.cross(reference_e0);
  if (a.norm() < kSingularTolerance) {
    throw SingularGeometryError("emission direction is parallel to the polarization reference axis");
  }
  const Eigen::Vector3d e_sigma = a.normalized();
  const Eigen::Vector3d e_sigma_prime = k.cross(e_sigma).normalized();
  return {e_sigma, e_sigma_prime};
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> polarization_basis(const Eigen::Vector3d& direction) {
  try {
    return emission_polarization_basis(direction, Eigen::Vector3d::UnitZ());
  } catch (const SingularGeometryError&) {
    return emission_polarization_basis(direction, Eigen::Vector3d::UnitX());
  }
}

Eigen::Vector3d polarization_vector(const PhotonMode& mode) {
  if (mode.polarization != 1 && mode.polarization != 2) {
    throw std::invalid_argument("photon polarization index must be 1 or 2");
  }
  const auto [s, sp] = polarization_basis(mode.direction.cartesian());
  return mode.polarization == 1 ? s : sp;
}

Eigen::Vector3cd dipole_vector(int l_lower, int m_lower, int l_upper, int m_upper) {
  Eigen::Vector3cd d = Eigen::Vector3cd::Zero();
  for (int q = -1; q <= 1; ++q) {
    const double c = angular::dipole_angular(l_lower, m_lower, q, l_upper, m_upper);
    if (c != 0.0) d += c * angular::spherical_unit_vector(q).conjugate();
  }
  return d;
}

cplx e1_amplitude(const atoms::BoundState& upper, const atoms::BoundState& lower, const PhotonMode& mode,
                  double radial, double window) {
  check_channel(mode.energy, upper.energy - lower.energy, window, (upper.label + "->" + lower.label).c_str());
  if (std::abs(upper.l - lower.l) != 1 || std::abs(upper.m - lower.m) > 1) return 0.0;
  const Eigen::Vector3d e = polarization_vector(mode);
  const Eigen::Vector3cd d = radial * dipole_vector(lower.l, lower.m, upper.l, upper.m);
  return mode_coupling(mode.energy) * e.cast<cplx>().dot(d);  // dot() conjugates e
}

cplx e1_amplitude(const atoms::BoundState& upper, const atoms::BoundState& lower, const PhotonMode& mode) {
  if (std::abs(upper.l - lower.l) != 1) {
    check_channel(mode.energy, upper.energy - lower.energy, 0.05, (upper.label + "->" + lower.label).c_str());
    return 0.0;
  }
  return e1_amplitude(upper, lower, mode, atoms::hydrogen_radial_dipole(upper.n, upper.l, lower.n, lower.l));
}

void CascadeScheme::validate() const {
  if (std::abs(upper.l - middle.l) != 1 || std::abs(middle.l - lower.l) != 1) {
    throw SelectionRuleError("cascade " + upper.label + "->" + middle.label + "->" + lower.label +
                             " is not an E1 chain");
  }
  if (!(upper.energy > middle.energy && middle.energy > lower.energy)) {
    throw std::invalid_argument("cascade levels must be ordered upper > middle > lower in energy");
  }
  if (!(window > 0.0)) throw std::invalid_argument("cascade detector window must be positive");
}

CascadeScheme CascadeScheme::hydrogen(int n_upper, int l_upper, int n_middle, int l_middle, int n_lower, int l_lower) {
  const auto u = atoms::hydrogen_level(n_upper, l_upper);
  const auto m = atoms::hydrogen_level(n_middle, l_middle);
  const auto w = atoms::hydrogen_level(n_lower, l_lower);
  CascadeScheme s;
  s.upper = {u.label, u.l, u.energy};
  s.middle = {m.label, m.l, m.energy};
  s.lower = {w.label, w.l, w.energy};
  s.radial_upper_middle = atoms::hydrogen_radial_dipole(n_upper, l_upper, n_middle, l_middle);
  s.radial_middle_lower = atoms::hydrogen_radial_dipole(n_middle, l_middle, n_lower, l_lower);
  s.validate();
  return s;
}

CascadeScheme CascadeScheme::hydrogen_4d_3p_1s() { return hydrogen(4, 2, 3, 1, 1, 0); }

Eigen::Matrix3cd DetectorSpec::analyzer_matrix() const {
  const Eigen::Vector3d k = direction.cartesian();
  auto outer = [](const Eigen::Vector3cd& e) -> Eigen::Matrix3cd { return e.conjugate() * e.transpose(); };
  switch (analyzer) {
    case Analyzer::Sigma:
      return outer(polarization_basis(k).first.cast<cplx>());
    case Analyzer::SigmaPrime:
      return outer(polarization_basis(k).second.cast<cplx>());
    case Analyzer::Unresolved:
      return (Eigen::Matrix3d::Identity() - k * k.transpose()).cast<cplx>();
    case Analyzer::Custom: {
      const double n = custom.norm();
      if (!(n > 0.0)) throw std::invalid_argument("custom analyzer vector must be non-zero");
      const Eigen::Vector3cd e = custom / n;
      if (std::abs(e.dot(k.cast<cplx>())) > 1e-9) {
        throw std::invalid_argument("custom analyzer vector must be transverse to the detector direction");
      }
      return outer(e);
    }
  }
  throw std::invalid_argument("unknown analyzer");
}

DetectorSpec DetectorSpec::from_mode(const PhotonMode& mode) {
  DetectorSpec d;
  d.direction = mode.direction;
  d.energy = mode.energy;
  if (mode.polarization == 1) {
    d.analyzer = Analyzer::Sigma;
  } else if (mode.polarization == 2) {
    d.analyzer = Analyzer::SigmaPrime;
  } else {
    throw std::invalid_argument("photon polarization index must be 1 or 2");
  }
  return d;
}

Eigen::MatrixXcd coincidence_kernel(const CascadeScheme& scheme, const DetectorSpec& first, const DetectorSpec& second) {
  scheme.validate();
  check_channel(first.energy, scheme.first_photon_energy(), scheme.window, "first");
  check_channel(second.energy, scheme.second_photon_energy(), scheme.window, "second");

  const int lu = scheme.upper.l, lm = scheme.middle.l, ll = scheme.lower.l;
  const double w1 = scheme.first_photon_energy();
  const double w2 = scheme.second_photon_energy();
  const double coupling = mode_coupling(w1) * mode_coupling(w2);
  const double norm = mode_coupling(w1) * mode_coupling(w1) *
                      integrated_strength(lu, lm, scheme.radial_upper_middle) * mode_coupling(w2) *
                      mode_coupling(w2) * integrated_strength(lm, ll, scheme.radial_middle_lower);

  const Eigen::Matrix3cd m1 = first.analyzer_matrix();
  const Eigen::Matrix3cd m2 = second.analyzer_matrix();

  const int dim = 2 * lu + 1;
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(dim, dim);
  for (int mlow = -ll; mlow <= ll; ++mlow) {
    // T_m^{ij} = sum_m1 d1_i(m -> m1) d2_j(m1 -> mlow)
    std::vector<Eigen::Matrix3cd> t(static_cast<std::size_t>(dim), Eigen::Matrix3cd::Zero());
    for (int m = -lu; m <= lu; ++m) {
      for (int mid = -lm; mid <= lm; ++mid) {
        const Eigen::Vector3cd d1 = scheme.radial_upper_middle * dipole_vector(lm, mid, lu, m);
        const Eigen::Vector3cd d2 = scheme.radial_middle_lower * dipole_vector(ll, mlow, lm, mid);
        t[static_cast<std::size_t>(m + lu)] += coupling * d1 * d2.transpose();
      }
    }
    // W(m,m') += sum T_m^{ij} conj(T_m'^{i'j'}) M1_{ii'} M2_{jj'}
    for (int m = 0; m < dim; ++m) {
      for (int mp = 0; mp < dim; ++mp) {
        const Eigen::Matrix3cd& a = t[static_cast<std::size_t>(m)];
        const Eigen::Matrix3cd b = t[static_cast<std::size_t>(mp)].conjugate();
        // sum_{i i' j j'} a_ij b_i'j' M1_ii' M2_jj' = tr(a^T M1 b M2^T)
        w(m, mp) += (a.transpose() * m1 * b * m2.transpose()).trace();
      }
    }
  }
  return w / norm;
}

double coincidence_probability(const Eigen::MatrixXcd& rho, const CascadeScheme& scheme, const DetectorSpec& first,
                               const DetectorSpec& second) {
  const Eigen::MatrixXcd w = coincidence_kernel(scheme, first, second);
  if (rho.rows() != w.rows() || rho.cols() != w.cols()) {
    throw std::invalid_argument("density matrix dimension does not match the cascade upper level");
  }
  return rho.cwiseProduct(w).sum().real();
}

double coincidence_probability(const collision::SublevelDensityMatrix& rho, const CascadeScheme& scheme,
                               const DetectorSpec& first, const DetectorSpec& second) {
  return coincidence_probability(rho.matrix(), scheme, first, second);
}

double coincidence_probability(const collision::SublevelDensityMatrix& rho, const CascadeScheme& scheme,
                               const PhotonMode& first, const PhotonMode& second) {
  return coincidence_probability(rho.matrix(), scheme, DetectorSpec::from_mode(first), DetectorSpec::from_mode(second));
}

std::pair<DetectorSpec, DetectorSpec> default_detectors(const CascadeScheme& scheme, double theta1) {
  DetectorSpec d1;
  d1.direction = {theta1, pi / 2.0};
  d1.analyzer = Analyzer::SigmaPrime;
  d1.energy = scheme.first_photon_energy();

  DetectorSpec d2;
  d2.direction = {pi / 2.0, -pi / 2.0};
  d2.analyzer = Analyzer::Custom;
  d2.custom = Eigen::Vector3cd(0.0, 0.0, 1.0);
  d2.energy = scheme.second_photon_energy();
  return {d1, d2};
}

}  // namespace photopair::cascade
