#include "doctest.h"

#include <cmath>
#include <functional>
#include <sstream>

#include "photopair/atoms.hpp"
#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

using namespace photopair::atoms;
namespace k = photopair::constants;

namespace {

// Textbook hydrogen radial functions, a.u.
double r10(double r) { return 2.0 * std::exp(-r); }
double r20(double r) { return (1.0 / std::sqrt(2.0)) * (1.0 - r / 2.0) * std::exp(-r / 2.0); }
double r21(double r) { return r * std::exp(-r / 2.0) / (2.0 * std::sqrt(6.0)); }
double r30(double r) { return 2.0 / (3.0 * std::sqrt(3.0)) * (1.0 - 2.0 * r / 3.0 + 2.0 * r * r / 27.0) * std::exp(-r / 3.0); }
double r31(double r) { return 8.0 / (27.0 * std::sqrt(6.0)) * r * (1.0 - r / 6.0) * std::exp(-r / 3.0); }
double r32(double r) { return 4.0 / (81.0 * std::sqrt(30.0)) * r * r * std::exp(-r / 3.0); }
double r42(double r) { return 1.0 / (64.0 * std::sqrt(5.0)) * r * r * (1.0 - r / 12.0) * std::exp(-r / 4.0); }
double r40(double r) {
  return 0.25 * (1.0 - 0.75 * r + r * r / 8.0 - r * r * r / 192.0) * std::exp(-r / 4.0);
}

// Composite Simpson on [0, 200].
double dipole(const std::function<double(double)>& a, const std::function<double(double)>& b) {
  const int n = 40000;
  const double h = 200.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * a(r) * r * b(r) * r * r;
  }
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("hydrogen spectrum") {
  CHECK(hydrogen_energy(1) == doctest::Approx(-13.6057).epsilon(1e-5));
  CHECK_THROWS_AS(hydrogen_energy(0), std::invalid_argument);
  for (int n = 1; n < 10; ++n) CHECK(hydrogen_energy(n + 1) > hydrogen_energy(n));
  CHECK(hydrogen_energy(3) - hydrogen_energy(1) == doctest::Approx(12.0940).epsilon(1e-5));
  CHECK(hydrogen_energy(4) - hydrogen_energy(3) == doctest::Approx(0.6614).epsilon(1e-4));
  const auto d = hydrogen_level(4, 2);
  CHECK(d.label == "4d");
  CHECK(d.energy == doctest::Approx(hydrogen_energy(4) - hydrogen_energy(1)).epsilon(1e-15));
  CHECK_THROWS(hydrogen_level(2, 2));
  CHECK_THROWS(hydrogen_level(3, 1, 2));
}

TEST_CASE("radial functions match closed forms") {
  for (double r : {0.1, 0.7, 2.0, 5.5, 13.0}) {
    CHECK(hydrogen_radial(1, 0, r) == doctest::Approx(r10(r)).epsilon(1e-12));
    CHECK(hydrogen_radial(2, 1, r) == doctest::Approx(r21(r)).epsilon(1e-12));
    CHECK(hydrogen_radial(3, 1, r) == doctest::Approx(r31(r)).epsilon(1e-12));
    CHECK(hydrogen_radial(4, 2, r) == doctest::Approx(r42(r)).epsilon(1e-12));
  }
}

TEST_CASE("radial dipole integrals") {
  const double exact_2p1s = std::pow(2.0, 7) * std::sqrt(6.0) / std::pow(3.0, 5);
  CHECK(hydrogen_radial_dipole(2, 1, 1, 0) == doctest::Approx(exact_2p1s).epsilon(1e-10));
  CHECK(exact_2p1s == doctest::Approx(1.2902).epsilon(1e-4));

  const double p31 = hydrogen_radial_dipole(3, 1, 1, 0);
  CHECK(p31 > 0.0);
  CHECK(p31 == doctest::Approx(dipole(r31, r10)).epsilon(1e-9));
  CHECK(p31 == doctest::Approx(0.5166892426183266).epsilon(1e-9));

  CHECK(hydrogen_radial_dipole(4, 2, 3, 1) == doctest::Approx(dipole(r42, r31)).epsilon(1e-9));
  CHECK(std::abs(hydrogen_radial_dipole(4, 2, 3, 1)) == doctest::Approx(7.565410812501621).epsilon(1e-9));
  CHECK(hydrogen_radial_dipole(3, 2, 2, 1) == doctest::Approx(dipole(r32, r21)).epsilon(1e-9));
  CHECK(hydrogen_radial_dipole(4, 0, 3, 1) == doctest::Approx(dipole(r40, r31)).epsilon(1e-9));
  CHECK(hydrogen_radial_dipole(3, 0, 2, 1) == doctest::Approx(dipole(r30, r21)).epsilon(1e-9));
  CHECK(hydrogen_radial_dipole(2, 0, 2, 1) == doctest::Approx(dipole(r20, r21)).epsilon(1e-9));

  CHECK_THROWS_AS(hydrogen_radial_dipole(3, 2, 1, 0), photopair::SelectionRuleError);
  CHECK_THROWS_AS(hydrogen_radial_dipole(2, 1, 3, 1), photopair::SelectionRuleError);
}

TEST_CASE("radial dipole is symmetric") {
  const int pairs[][4] = {{2, 1, 1, 0}, {3, 1, 1, 0}, {4, 2, 3, 1}, {4, 3, 3, 2}, {4, 1, 2, 0}, {3, 1, 4, 0}};
  for (const auto& p : pairs) {
    CHECK(std::abs(hydrogen_radial_dipole(p[0], p[1], p[2], p[3]) - hydrogen_radial_dipole(p[2], p[3], p[0], p[1])) <
          1e-8);
  }
}

TEST_CASE("Einstein A coefficients") {
  // A = 4 w^3 R^2 l_> / (3 c^3 (2 l_u + 1)) in atomic units
  const double w = 0.375;
  const double r = std::pow(2.0, 7) * std::sqrt(6.0) / std::pow(3.0, 5);
  const double a_au = 4.0 * w * w * w * r * r / (3.0 * std::pow(k::fine_structure_inv, 3) * 3.0);
  const double expected = a_au / k::atomic_time_fs;
  const double a = einstein_A(hydrogen_level(2, 1), hydrogen_level(1, 0));
  CHECK(a == doctest::Approx(expected).epsilon(1e-9));
  CHECK(a == doctest::Approx(6.268315042309787e-7).epsilon(1e-6));  // 6.27e8 per second
  CHECK_THROWS_AS(einstein_A(hydrogen_level(3, 2), hydrogen_level(1, 0)), photopair::SelectionRuleError);

  const double omega = 10.2;
  CHECK(einstein_A_rate(2 * omega, 1.3, 1, 0) / einstein_A_rate(omega, 1.3, 1, 0) == doctest::Approx(8.0).epsilon(1e-14));
  CHECK_THROWS(einstein_A_rate(-1.0, 1.0, 1, 0));
}

TEST_CASE("radial table parsing and lookups") {
  std::istringstream in(
      "# bound entries\n"
      "4 0 5 1  2.5\n"
      "\n"
      "15.7 2 5 1 0.8   # continuum\n"
      "15.8 2 5 1 1.2\n");
  const auto t = RadialMatrixElementTable::parse(in);
  CHECK(t.size() == 3);
  CHECK(*t.bound(4, 0, 5, 1) == 2.5);
  CHECK(*t.bound(5, 1, 4, 0) == 2.5);
  CHECK_FALSE(t.bound(4, 0, 6, 1).has_value());
  CHECK(*t.continuum(15.75, 2, 5, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(*t.continuum(10.0, 2, 5, 1) == 0.8);
  CHECK(*t.continuum(20.0, 2, 5, 1) == 1.2);
  CHECK_FALSE(t.continuum(15.75, 0, 5, 1).has_value());

  std::istringstream bad("4 0 5 2 1.0\n");
  CHECK_THROWS_AS(RadialMatrixElementTable::parse(bad), photopair::ConfigError);
  std::istringstream short_line("# c\n4 0 5\n");
  try {
    RadialMatrixElementTable::parse(short_line);
    FAIL("expected ConfigError");
  } catch (const photopair::ConfigError& e) {
    CHECK(e.line() == 2);
  }
  RadialMatrixElementTable m;
  CHECK_THROWS_AS(m.set_bound(3, 2, 1, 0, 1.0), photopair::SelectionRuleError);
  CHECK_THROWS_AS(m.set_continuum(1.0, 0, 1, 0, 1.0), photopair::SelectionRuleError);
}

TEST_CASE("atom models") {
  const auto ca = calcium_model();
  CHECK_NOTHROW(ca.validate());
  CHECK(ca.ionization_potential == 6.113);
  CHECK(ca.intermediate("4s5p").energy == 4.554);
  CHECK(ca.intermediate("4s6p").energy == 5.167);
  CHECK(ca.intermediate("4s5p").l == 1);
  CHECK(ca.ground.l == 0);
  CHECK(ca.phase_for(3) == 0.0);
  CHECK(ca.continuum_radial(15.755, 2, ca.intermediate("4s5p")) == 1.0);
  CHECK_THROWS(ca.intermediate("4s7p"));

  auto bad = ca;
  bad.ionization_potential = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const auto h = hydrogen_model();
  CHECK_NOTHROW(h.validate());
  CHECK(h.bound_radial(hydrogen_level(2, 1), hydrogen_level(1, 0)) ==
        doctest::Approx(hydrogen_radial_dipole(2, 1, 1, 0)).epsilon(1e-14));
}
