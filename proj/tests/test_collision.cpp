#include "doctest.h"

#include <cmath>
#include <random>

#include "photopair/collision.hpp"
#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

using namespace photopair;
using namespace photopair::collision;
using angular::AngularQuantumNumbers;
using constants::pi;
using ionization::EnergyGrid;
using ionization::PhotoelectronWavePacket;

namespace {

double r10(double r) { return 2.0 * std::exp(-r); }
double r42(double r) { return 1.0 / (64.0 * std::sqrt(5.0)) * r * r * (1.0 - r / 12.0) * std::exp(-r / 4.0); }
double j2(double x) {
  if (x < 1e-3) return x * x / 15.0;
  return (3.0 / (x * x) - 1.0) * std::sin(x) / x - 3.0 * std::cos(x) / (x * x);
}

auto simpson(double a, double b, int n, const auto& f) {
  const double h = (b - a) / n;
  auto s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

const CollisionQuadrature kSmall{12, 24, 12, 24};
const TargetManifold k4d = TargetManifold::hydrogen(4, 2);

EnergyGrid small_grid() { return EnergyGrid(15.70, 15.80, 3); }

PhotoelectronWavePacket packet_with(const std::vector<std::tuple<int, int, cplx>>& entries, const EnergyGrid& grid) {
  PhotoelectronWavePacket p(grid, ionization::channels_up_to(2));
  for (auto [l, m, v] : entries) {
    const auto c = static_cast<Eigen::Index>(*p.channel_index(l, m));
    for (std::size_t i = 0; i < grid.size(); ++i)
      p.amplitudes()(static_cast<Eigen::Index>(i), c) = v * (1.0 + 0.1 * static_cast<double>(i));
  }
  return p;
}

PhotoelectronWavePacket random_packet(std::mt19937_64& rng, const EnergyGrid& grid) {
  std::normal_distribution<double> g;
  PhotoelectronWavePacket p(grid, ionization::channels_up_to(2));
  for (Eigen::Index i = 0; i < p.amplitudes().rows(); ++i)
    for (Eigen::Index c = 0; c < p.amplitudes().cols(); ++c) p.amplitudes()(i, c) = cplx(g(rng), g(rng));
  return p;
}

}  // namespace

TEST_CASE("radial form factor integral against closed forms") {
  for (double q : {0.05, 0.5, 1.3, 3.0}) {
    const double oracle = simpson(0.0, 150.0, 60000, [&](double r) { return r42(r) * j2(q * r) * r10(r) * r * r; });
    CHECK(born_radial_integral(4, 2, q) == doctest::Approx(oracle).epsilon(1e-9));
  }
  CHECK(born_radial_integral(4, 2, 0.5) == doctest::Approx(0.011788509220334427).epsilon(1e-10));
  CHECK_THROWS_AS(born_radial_integral(4, 2, -1.0), std::invalid_argument);
}

TEST_CASE("form factor selection along z and small-q limit") {
  const Eigen::Vector3d qz(0.0, 0.0, 0.5);
  const auto f = born_form_factors(qz, k4d);
  CHECK(f.size() == 5);
  for (int m = -2; m <= 2; ++m) {
    if (m == 0) continue;
    CHECK(std::abs(f[static_cast<std::size_t>(m + 2)]) < 1e-15);
  }
  CHECK(f[2].real() == doctest::Approx(-0.026359907970050825).epsilon(1e-10));
  CHECK(std::abs(f[2].imag()) < 1e-16);

  // direct 2D integral <4d0| exp(i q z) |1s> over r and cos(theta)
  const double q = 0.5;
  const auto gl = angular::gauss_legendre(40, -1.0, 1.0);
  cplx direct = 0.0;
  for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
    const double c = gl.nodes[k];
    const double y20 = std::sqrt(5.0 / (16.0 * pi)) * (3 * c * c - 1);
    const double y00 = 1.0 / std::sqrt(4 * pi);
    const cplx radial = simpson(0.0, 150.0, 30000, [&](double r) {
      return std::polar(r42(r) * r10(r) * r * r, q * r * c);
    });
    direct += gl.weights[k] * 2 * pi * y20 * y00 * radial;
  }
  CHECK(std::abs(direct - f[2]) < 1e-10);

  for (double s : {1e-2, 1e-3}) {
    const auto small = born_form_factors(Eigen::Vector3d(0.2 * s, -0.3 * s, s), k4d);
    double mag = 0.0;
    for (auto v : small) mag += std::norm(v);
    CHECK(std::sqrt(mag) < 10 * s * s);
  }
  const auto zero = born_form_factors(Eigen::Vector3d::Zero(), k4d);
  for (auto v : zero) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("form factor covariance under rotation about z") {
  const Eigen::Vector3d q(0.3, 0.4, -0.2);
  const double a = 0.9;
  const Eigen::Vector3d qr = Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()) * q;
  const auto f = born_form_factors(q, k4d);
  const auto g = born_form_factors(qr, k4d);
  for (int m = -2; m <= 2; ++m)
    CHECK(std::abs(g[static_cast<std::size_t>(m + 2)] - std::polar(1.0, -m * a) * f[static_cast<std::size_t>(m + 2)]) <
          1e-13);
}

TEST_CASE("density matrix invariants on random packets") {
  std::mt19937_64 rng(23);
  const auto grid = small_grid();
  CollisionKernel kernel(grid, ionization::channels_up_to(2), k4d, {}, kSmall);
  for (int trial = 0; trial < 3; ++trial) {
    const auto p = random_packet(rng, grid);
    const auto rho = kernel.density_matrix(p);
    CHECK(rho.hermiticity_error() < 1e-12);
    CHECK(rho.min_eigenvalue() > -1e-10);
    CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rho.yield() > 0.0);

    auto q = p;
    q *= std::polar(1.0, 1.7);
    CHECK((kernel.density_matrix(q).matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-12);

    const double beta = 0.37 + trial;
    const auto rotated = kernel.density_matrix(p.rotated(beta, 0.0, 0.0));
    double worst = 0.0;
    for (int m = -2; m <= 2; ++m)
      for (int mp = -2; mp <= 2; ++mp)
        worst = std::max(worst, std::abs(rotated(m, mp) - rho(m, mp) * std::polar(1.0, -(m - mp) * beta)));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("axially symmetric inputs give diagonal density matrices") {
  const auto grid = small_grid();
  const auto s = packet_with({{0, 0, 1.0}}, grid);
  CollisionKernel kernel(grid, s.channels(), k4d, {}, kSmall);
  const auto rho = kernel.density_matrix(s);
  for (int m = -2; m <= 2; ++m) {
    for (int mp = -2; mp <= 2; ++mp)
      if (m != mp) CHECK(std::abs(rho(m, mp)) < 1e-13);
    CHECK(std::abs(rho(m, m) - rho(-m, -m)) < 1e-12);
  }

  // plane wave along z: sum_l 4 pi i^l Y_l0(z) over l <= 2
  PhotoelectronWavePacket plane(grid, ionization::channels_up_to(2));
  for (int l = 0; l <= 2; ++l) {
    const cplx v = 4 * pi * std::pow(cplx(0, 1), l) * angular::sph_harm(l, 0, 0.0, 0.0);
    plane.amplitudes().col(static_cast<Eigen::Index>(*plane.channel_index(l, 0))).setConstant(v);
  }
  for (auto route : {CollisionKernel::Route::Auto, CollisionKernel::Route::General}) {
    CollisionKernel k(grid, plane.channels(), k4d, {}, kSmall, route);
    const auto r = k.density_matrix(plane);
    for (int m = -2; m <= 2; ++m)
      for (int mp = -2; mp <= 2; ++mp)
        if (m != mp) CHECK(std::abs(r(m, mp)) < 1e-10);
  }
}

TEST_CASE("s-wave density matrix agrees with brute-force integration") {
  const EnergyGrid one(15.755, 15.755, 1);
  const auto s = packet_with({{0, 0, 1.0}}, one);
  const CollisionQuadrature coarse{8, 16, 8, 16};
  const auto rho = CollisionKernel(one, s.channels(), k4d, {}, coarse).density_matrix(s);

  const double hartree = constants::hartree_eV;
  const double ki = std::sqrt(2 * 15.755 / hartree), kf = std::sqrt(2 * (15.755 - k4d.excitation_energy) / hartree);
  const angular::SphereQuadrature quad(coarse.final_theta, coarse.final_phi);
  Eigen::MatrixXcd brute = Eigen::MatrixXcd::Zero(5, 5);
  for (const auto& nf : quad.nodes()) {
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(5);
    for (const auto& ni : quad.nodes()) {
      const Eigen::Vector3d q = ki * ni.direction.cartesian() - kf * nf.direction.cartesian();
      const auto f = born_form_factors(q, k4d);
      for (int m = 0; m < 5; ++m) t(m) += ni.weight * f[static_cast<std::size_t>(m)] / q.squaredNorm();
    }
    brute += nf.weight * t * t.adjoint();
  }
  brute /= brute.trace().real();
  CHECK((brute - rho.matrix()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("general route reproduces the symmetric shortcut at zero offset") {
  std::mt19937_64 rng(29);
  const auto grid = small_grid();
  const auto p = random_packet(rng, grid);
  const auto a = CollisionKernel(grid, p.channels(), k4d, {}, kSmall, CollisionKernel::Route::Auto).unnormalized(p);
  const auto g = CollisionKernel(grid, p.channels(), k4d, {}, kSmall, CollisionKernel::Route::General).unnormalized(p);
  CHECK((a - g).cwiseAbs().maxCoeff() < 1e-9 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("coherence transfer from a mixed-parity packet") {
  const auto grid = small_grid();
  CollisionGeometry offset;
  offset.target_offset = Eigen::Vector3d(0.0, 0.0, 3.0);
  CollisionKernel shifted(grid, ionization::channels_up_to(2), k4d, offset, kSmall, CollisionKernel::Route::General);
  CollisionKernel origin(grid, ionization::channels_up_to(2), k4d, {}, kSmall);

  std::vector<double> phase_track;
  double largest = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double phi = 2 * pi * i / 16.0;
    const auto p = packet_with({{2, 1, 1.0}, {1, 0, std::polar(0.8, phi)}}, grid);
    const auto rho = shifted.density_matrix(p);
    // Delta m = 1 coherences come only from the (2,1) x (1,0) cross term
    const cplx c = rho(1, 0);
    largest = std::max(largest, std::abs(c));
    phase_track.push_back(std::remainder(std::arg(c) + phi, 2 * pi));
    // magnitude does not depend on phi
    CHECK(std::abs(c) == doctest::Approx(std::abs(shifted.density_matrix(packet_with({{2, 1, 1.0}, {1, 0, 0.8}}, grid))(1, 0))).epsilon(1e-9));

    // at zero offset the opposite-parity interference cancels
    const auto rho0 = origin.density_matrix(p);
    for (int m = -1; m <= 2; ++m) CHECK(std::abs(rho0(m, m - 1)) < 1e-12);
  }
  CHECK(largest > 1e-4);
  for (double v : phase_track) CHECK(std::abs(std::remainder(v - phase_track.front(), 2 * pi)) < 1e-9);
}

TEST_CASE("threshold and validation errors") {
  const auto grid = small_grid();
  const auto s = packet_with({{0, 0, 1.0}}, grid);
  TargetManifold high = k4d;
  high.excitation_energy = 100.0;
  CHECK_THROWS_AS(excited_density_matrix(s, {}, high, kSmall), EmptyResultError);

  CollisionGeometry bad;
  bad.incident_direction = Eigen::Vector3d(0.0, 0.0, 2.0);
  CHECK_THROWS_AS(CollisionKernel(grid, s.channels(), k4d, bad, kSmall), std::invalid_argument);
  bad = {};
  bad.target_offset.x() = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(CollisionKernel(grid, s.channels(), k4d, bad, kSmall), std::invalid_argument);

  CollisionKernel kernel(grid, s.channels(), k4d, {}, kSmall);
  const auto other = packet_with({{0, 0, 1.0}}, EnergyGrid(15.0, 16.0, 3));
  CHECK_THROWS_AS(kernel.unnormalized(other), std::invalid_argument);
  CHECK_THROWS_AS(SublevelDensityMatrix::from_unnormalized("4d", 2, Eigen::MatrixXcd::Zero(5, 5)), EmptyResultError);
}

TEST_CASE("incident direction rotates the density matrix") {
  std::mt19937_64 rng(31);
  const auto grid = small_grid();
  const auto p = random_packet(rng, grid);
  CollisionGeometry tilted;
  const double theta = 0.6, phi = 1.1;
  tilted.incident_direction = angular::Direction{theta, phi}.cartesian();
  const auto rho_z = CollisionKernel(grid, p.channels(), k4d, {}, kSmall).density_matrix(p);
  const auto rho_t = CollisionKernel(grid, p.channels(), k4d, tilted, kSmall).density_matrix(p);
  const auto expected = rho_z.rotated(phi, theta, 0.0);
  // the product grid is exact only about z; tilts carry quadrature error
  CHECK((rho_t.matrix() - expected.matrix()).cwiseAbs().maxCoeff() < 1e-8);
}
