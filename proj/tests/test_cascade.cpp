#include "doctest.h"

#include <cmath>
#include <random>

#include "photopair/cascade.hpp"
#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

using namespace photopair;
using namespace photopair::cascade;
using angular::Direction;
using constants::pi;

namespace {

const CascadeScheme kScheme = CascadeScheme::hydrogen_4d_3p_1s();

Direction random_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), p(0.0, 2 * pi);
  return {std::acos(u(rng)), p(rng)};
}

Eigen::MatrixXcd random_rho(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
  Eigen::MatrixXcd rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Any orthonormal transverse pair, independent of the module's construction.
std::pair<Eigen::Vector3d, Eigen::Vector3d> my_basis(const Eigen::Vector3d& k) {
  const Eigen::Vector3d helper = std::abs(k.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d a = (helper - helper.dot(k) * k).normalized();
  return {a, k.cross(a)};
}

DetectorSpec detector(const Direction& d, Analyzer a, double energy) {
  DetectorSpec s;
  s.direction = d;
  s.analyzer = a;
  s.energy = energy;
  return s;
}

DetectorSpec custom_detector(const Direction& d, const Eigen::Vector3cd& e, double energy) {
  DetectorSpec s = detector(d, Analyzer::Custom, energy);
  s.custom = e;
  return s;
}

Eigen::Vector3cd random_transverse(std::mt19937_64& rng, const Eigen::Vector3d& k) {
  std::normal_distribution<double> g;
  const auto [a, b] = my_basis(k);
  return cplx(g(rng), g(rng)) * a.cast<cplx>() + cplx(g(rng), g(rng)) * b.cast<cplx>();
}

}  // namespace

TEST_CASE("emission polarization basis") {
  const auto [s, sp] = emission_polarization_basis(Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ());
  CHECK((s - Eigen::Vector3d(0, -1, 0)).norm() < 1e-15);
  CHECK((sp - Eigen::Vector3d(0, 0, -1)).norm() < 1e-15);
  CHECK_THROWS_AS(emission_polarization_basis(Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ()),
                  SingularGeometryError);
  CHECK_THROWS_AS(emission_polarization_basis(-Eigen::Vector3d::UnitZ(), Eigen::Vector3d::UnitZ()),
                  SingularGeometryError);

  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d k = random_direction(rng).cartesian();
    const Eigen::Vector3d e0 = random_direction(rng).cartesian();
    const auto [a, b] = emission_polarization_basis(k, e0);
    worst = std::max({worst, std::abs(a.dot(k)), std::abs(b.dot(k)), std::abs(a.dot(b)), std::abs(a.norm() - 1),
                      std::abs(b.norm() - 1)});
  }
  CHECK(worst < 1e-14);

  // fallback reference along the pole
  const auto [fs, fsp] = polarization_basis(Eigen::Vector3d::UnitZ());
  CHECK((fs - Eigen::Vector3d(0, 1, 0)).norm() < 1e-15);
  CHECK((fsp - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("mode coupling reproduces the Einstein coefficient") {
  const double w = 10.2;
  const double c = constants::fine_structure_inv;
  const double wa = w / constants::hartree_eV;
  CHECK(mode_coupling(w) * mode_coupling(w) == doctest::Approx(wa * wa * wa / (2 * pi * c * c * c)).epsilon(1e-14));
  CHECK_THROWS(mode_coupling(0.0));

  // sum over polarizations and lower sublevels, integrated over the sphere
  const auto up = atoms::hydrogen_level(2, 1, 1);
  const double e = up.energy;
  const angular::SphereQuadrature quad(8, 16);
  double rate = 0.0;
  for (const auto& n : quad.nodes())
    for (int pol : {1, 2}) {
      const PhotonMode mode{n.direction, pol, e, 0};
      rate += n.weight * std::norm(e1_amplitude(up, atoms::hydrogen_level(1, 0, 0), mode));
    }
  const double expected = atoms::einstein_A(atoms::hydrogen_level(2, 1), atoms::hydrogen_level(1, 0)) *
                          constants::atomic_time_fs;
  CHECK(rate == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("e1 amplitude selection rules") {
  std::mt19937_64 rng(2);
  const auto upper = atoms::hydrogen_level(4, 2, 2);
  const auto lower = atoms::hydrogen_level(3, 1, 0);
  for (int i = 0; i < 100; ++i) {
    const PhotonMode mode{random_direction(rng), 1 + i % 2, kScheme.first_photon_energy(), 0};
    CHECK(e1_amplitude(upper, lower, mode) == cplx(0.0));
  }
  PhotonMode off{{1.0, 0.0}, 1, 2.0, 0};
  CHECK_THROWS_AS(e1_amplitude(upper, lower, off), ChannelError);
  PhotonMode ok{{1.0, 0.0}, 1, kScheme.first_photon_energy() + 0.04, 0};
  CHECK_NOTHROW(e1_amplitude(upper, lower, ok));
  const auto d3 = atoms::hydrogen_level(3, 2), s1 = atoms::hydrogen_level(1, 0);
  CHECK(e1_amplitude(d3, s1, PhotonMode{{1.0, 0.0}, 1, d3.energy - s1.energy, 0}) == cplx(0.0));
  PhotonMode bad_pol{{1.0, 0.0}, 3, kScheme.first_photon_energy(), 0};
  CHECK_THROWS_AS(e1_amplitude(upper, atoms::hydrogen_level(3, 1, 1), bad_pol), std::invalid_argument);
}

TEST_CASE("z analyzer at -y picks the pi component") {
  const Direction minus_y{pi / 2, -pi / 2};
  const double e2 = kScheme.second_photon_energy();
  const PhotonMode pi_mode{minus_y, 2, e2, 0};     // e_sigma' = -z here
  const PhotonMode sigma_mode{minus_y, 1, e2, 0};  // e_sigma = -x
  CHECK((polarization_vector(pi_mode) - Eigen::Vector3d(0, 0, -1)).norm() < 1e-15);
  const auto s = atoms::hydrogen_level(1, 0, 0);
  for (int m = -1; m <= 1; ++m) {
    const auto p = atoms::hydrogen_level(3, 1, m);
    const cplx a_pi = e1_amplitude(p, s, pi_mode);
    const cplx a_sigma = e1_amplitude(p, s, sigma_mode);
    if (m == 0) {
      CHECK(std::abs(a_pi) > 0.0);
      CHECK(std::abs(a_sigma) < 1e-18);
    } else {
      CHECK(std::abs(a_pi) < 1e-18);
      CHECK(std::abs(a_sigma) > 0.0);
    }
  }
  // linear in the radial integral
  const auto p0 = atoms::hydrogen_level(3, 1, 0);
  CHECK(e1_amplitude(p0, s, pi_mode, 2.5).real() == doctest::Approx(2.5 * e1_amplitude(p0, s, pi_mode, 1.0).real()).epsilon(1e-15));
  CHECK(e1_amplitude(p0, s, pi_mode, 0.0) == cplx(0.0));
}

TEST_CASE("normalization over both detector spheres") {
  const angular::SphereQuadrature quad(6, 12);  // exact for the quadratic angular dependence
  auto integrate = [&](const Eigen::MatrixXcd& rho) {
    double total = 0.0;
    for (const auto& a : quad.nodes()) {
      const auto d1 = detector(a.direction, Analyzer::Unresolved, kScheme.first_photon_energy());
      for (const auto& b : quad.nodes()) {
        const auto d2 = detector(b.direction, Analyzer::Unresolved, kScheme.second_photon_energy());
        total += a.weight * b.weight * coincidence_probability(rho, kScheme, d1, d2);
      }
    }
    return total;
  };
  Eigen::MatrixXcd pure = Eigen::MatrixXcd::Zero(5, 5);
  pure(2, 2) = 1.0;
  CHECK(integrate(pure) == doctest::Approx(1.0).epsilon(1e-12));
  std::mt19937_64 rng(3);
  CHECK(integrate(random_rho(rng, 5)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("0-1-0 cascade gives 1 + cos^2 against a brute-force sum") {
  CascadeScheme toy;
  toy.upper = {"s'", 0, 10.0};
  toy.middle = {"p", 1, 6.0};
  toy.lower = {"s", 0, 0.0};
  toy.radial_upper_middle = 1.3;
  toy.radial_middle_lower = 0.7;
  const Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(1, 1);

  // Cartesian p states: amplitude ~ sum_i conj(e1)_i conj(e2)_i, summed over transverse pairs
  auto brute = [](const Eigen::Vector3d& k1, const Eigen::Vector3d& k2) {
    const auto [a1, b1] = my_basis(k1);
    const auto [a2, b2] = my_basis(k2);
    double s = 0.0;
    for (const auto& e1 : {a1, b1})
      for (const auto& e2 : {a2, b2}) s += std::pow(e1.dot(e2), 2);
    return s;
  };
  std::mt19937_64 rng(4);
  const Direction ref1{0.4, 0.2}, ref2{0.4 + pi / 2, 0.2};
  const double p_ref = coincidence_probability(rho, toy, detector(ref1, Analyzer::Unresolved, 4.0),
                                               detector(ref2, Analyzer::Unresolved, 6.0));
  for (int i = 0; i < 50; ++i) {
    const Direction d1 = random_direction(rng), d2 = random_direction(rng);
    const double c12 = d1.cartesian().dot(d2.cartesian());
    const double p = coincidence_probability(rho, toy, detector(d1, Analyzer::Unresolved, 4.0),
                                             detector(d2, Analyzer::Unresolved, 6.0));
    CHECK(p / p_ref == doctest::Approx(1.0 + c12 * c12).epsilon(1e-12));
    CHECK(brute(d1.cartesian(), d2.cartesian()) == doctest::Approx(1.0 + c12 * c12).epsilon(1e-12));
    // resolved polarizations summed explicitly
    double resolved = 0.0;
    for (auto a1 : {Analyzer::Sigma, Analyzer::SigmaPrime})
      for (auto a2 : {Analyzer::Sigma, Analyzer::SigmaPrime})
        resolved += coincidence_probability(rho, toy, detector(d1, a1, 4.0), detector(d2, a2, 6.0));
    CHECK(resolved == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("positivity, reality and linearity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double most_negative = 0.0, worst_imag = 0.0, worst_lin = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Direction a = random_direction(rng), b = random_direction(rng);
    const auto d1 = custom_detector(a, random_transverse(rng, a.cartesian()), kScheme.first_photon_energy());
    const auto d2 = custom_detector(b, random_transverse(rng, b.cartesian()), kScheme.second_photon_energy());
    const Eigen::MatrixXcd w = coincidence_kernel(kScheme, d1, d2);
    const Eigen::MatrixXcd r1 = random_rho(rng, 5), r2 = random_rho(rng, 5);
    const cplx p1 = r1.cwiseProduct(w).sum();
    most_negative = std::min(most_negative, p1.real() / w.cwiseAbs().maxCoeff());
    worst_imag = std::max(worst_imag, std::abs(p1.imag()) / w.cwiseAbs().maxCoeff());
    if (i % 10 == 0) {
      const double al = u(rng);
      const double lhs = coincidence_probability(al * r1 + (1 - al) * r2, kScheme, d1, d2);
      const double rhs = al * coincidence_probability(r1, kScheme, d1, d2) +
                         (1 - al) * coincidence_probability(r2, kScheme, d1, d2);
      worst_lin = std::max(worst_lin, std::abs(lhs - rhs) / w.cwiseAbs().maxCoeff());
    }
  }
  CHECK(most_negative > -1e-12);
  CHECK(worst_imag < 1e-12);
  CHECK(worst_lin < 1e-14);
}

TEST_CASE("joint rotation invariance") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 2 * pi);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double al = u(rng), be = u(rng) / 2, ga = u(rng);
    const Eigen::Matrix3d r = angular::rotation_matrix(al, be, ga);
    const Eigen::MatrixXcd d = angular::wigner_D(2, al, be, ga);
    const Eigen::MatrixXcd rho = random_rho(rng, 5);
    const Direction a = random_direction(rng), b = random_direction(rng);
    const Eigen::Vector3cd e1 = random_transverse(rng, a.cartesian());
    const Eigen::Vector3cd e2 = random_transverse(rng, b.cartesian());
    const double p = coincidence_probability(rho, kScheme, custom_detector(a, e1, kScheme.first_photon_energy()),
                                             custom_detector(b, e2, kScheme.second_photon_energy()));
    const Direction ra = Direction::from_vector(r * a.cartesian()), rb = Direction::from_vector(r * b.cartesian());
    const double q = coincidence_probability(
        d * rho * d.adjoint(), kScheme,
        custom_detector(ra, r.cast<cplx>() * e1, kScheme.first_photon_energy()),
        custom_detector(rb, r.cast<cplx>() * e2, kScheme.second_photon_energy()));
    worst = std::max(worst, std::abs(p - q));
    // unresolved detectors as well
    const double pu = coincidence_probability(rho, kScheme, detector(a, Analyzer::Unresolved, kScheme.first_photon_energy()),
                                              detector(b, Analyzer::Unresolved, kScheme.second_photon_energy()));
    const double qu = coincidence_probability(d * rho * d.adjoint(), kScheme,
                                              detector(ra, Analyzer::Unresolved, kScheme.first_photon_energy()),
                                              detector(rb, Analyzer::Unresolved, kScheme.second_photon_energy()));
    worst = std::max(worst, std::abs(pu - qu));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("polarization completeness on the hydrogen cascade") {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Eigen::MatrixXcd rho = random_rho(rng, 5);
    const Direction a = random_direction(rng), b = random_direction(rng);
    const auto d2 = detector(b, Analyzer::Unresolved, kScheme.second_photon_energy());
    const double u = coincidence_probability(rho, kScheme, detector(a, Analyzer::Unresolved, kScheme.first_photon_energy()), d2);
    const double s = coincidence_probability(rho, kScheme, detector(a, Analyzer::Sigma, kScheme.first_photon_energy()), d2) +
                     coincidence_probability(rho, kScheme, detector(a, Analyzer::SigmaPrime, kScheme.first_photon_energy()), d2);
    worst = std::max(worst, std::abs(u - s));
    // mode overload matches the detector overload
    const collision::SublevelDensityMatrix sr("4d", 2, rho, 1.0);
    const PhotonMode m1{a, 2, kScheme.first_photon_energy(), 0}, m2{b, 1, kScheme.second_photon_energy(), 0};
    CHECK(coincidence_probability(sr, kScheme, m1, m2) ==
          doctest::Approx(coincidence_probability(rho, kScheme, DetectorSpec::from_mode(m1), DetectorSpec::from_mode(m2))));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("channel checks and default detectors") {
  const auto [d1, d2] = default_detectors(kScheme, 0.7);
  CHECK(d1.direction.phi == doctest::Approx(pi / 2));
  CHECK(d1.direction.theta == 0.7);
  CHECK(d1.analyzer == Analyzer::SigmaPrime);
  CHECK((d2.direction.cartesian() - Eigen::Vector3d(0, -1, 0)).norm() < 1e-15);
  CHECK(d2.analyzer == Analyzer::Custom);
  CHECK(d1.energy == doctest::Approx(0.6614).epsilon(1e-4));
  CHECK(d2.energy == doctest::Approx(12.094).epsilon(1e-4));

  CHECK_THROWS_AS(coincidence_kernel(kScheme, d2, d1), ChannelError);
  auto close = d2;
  close.energy = 12.078;  // inside the window
  CHECK_NOTHROW(coincidence_kernel(kScheme, d1, close));

  auto bad = kScheme;
  bad.middle.l = 3;
  CHECK_THROWS_AS(bad.validate(), SelectionRuleError);
  auto transverse = d2;
  transverse.custom = Eigen::Vector3cd(0, 1, 0);  // along the detector axis
  CHECK_THROWS_AS(transverse.analyzer_matrix(), std::invalid_argument);
  CHECK_THROWS(coincidence_probability(Eigen::MatrixXcd::Identity(3, 3), kScheme, d1, d2));
}
