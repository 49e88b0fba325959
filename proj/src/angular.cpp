#include "photopair/angular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_legendre.h>

#include "photopair/constants.hpp"

namespace photopair::angular {

namespace {

constexpr int kLogFactorialTableSize = 64;

const std::array<double, kLogFactorialTableSize + 1>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kLogFactorialTableSize + 1> t{};
    t[0] = 0.0;
    for (int n = 1; n <= kLogFactorialTableSize; ++n) t[n] = t[n - 1] + std::log(static_cast<double>(n));
    return t;
  }();
  return table;
}

double log_factorial(int n) {
  if (n < 0) throw std::invalid_argument("log_factorial of negative argument");
  if (n <= kLogFactorialTableSize) return log_factorial_table()[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

// Doubled value 2x of a (half-)integer; throws if x is not a multiple of 1/2.
int twice(double x, const char* name) {
  const double t = 2.0 * x;
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-9) {
    throw std::invalid_argument(std::string(name) + " is not an integer or half-integer");
  }
  return static_cast<int>(r);
}

void check_pair(int tj, int tm, const char* name) {
  if (tj < 0) throw std::invalid_argument(std::string(name) + ": negative angular momentum");
  if (std::abs(tm) > tj) throw std::invalid_argument(std::string(name) + ": |m| > j");
  if ((tj - tm) % 2 != 0) throw std::invalid_argument(std::string(name) + ": j - m is not an integer");
}

int parity_sign(int n) { return (n % 2 == 0) ? 1 : -1; }

}  // namespace

AngularQuantumNumbers::AngularQuantumNumbers(int l_, int m_) : l(l_), m(m_) {
  if (l < 0 || std::abs(m) > l) {
    throw std::invalid_argument("angular quantum numbers require |m| <= l, got l=" + std::to_string(l) +
                                " m=" + std::to_string(m));
  }
}

double wigner3j(double j1, double j2, double j3, double m1, double m2, double m3) {
  const int tj1 = twice(j1, "j1"), tj2 = twice(j2, "j2"), tj3 = twice(j3, "j3");
  const int tm1 = twice(m1, "m1"), tm2 = twice(m2, "m2"), tm3 = twice(m3, "m3");
  check_pair(tj1, tm1, "(j1,m1)");
  check_pair(tj2, tm2, "(j2,m2)");
  check_pair(tj3, tm3, "(j3,m3)");

  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if ((tj1 + tj2 + tj3) % 2 != 0) return 0.0;
  if (tj3 > tj1 + tj2 || tj3 < std::abs(tj1 - tj2)) return 0.0;

  // Everything below is in integer units.
  const int a = (tj1 + tj2 - tj3) / 2;
  const int b = (tj1 - tj2 + tj3) / 2;
  const int c = (-tj1 + tj2 + tj3) / 2;
  const int s = (tj1 + tj2 + tj3) / 2;

  const int j1pm1 = (tj1 + tm1) / 2, j1mm1 = (tj1 - tm1) / 2;
  const int j2pm2 = (tj2 + tm2) / 2, j2mm2 = (tj2 - tm2) / 2;
  const int j3pm3 = (tj3 + tm3) / 2, j3mm3 = (tj3 - tm3) / 2;

  const double log_prefactor =
      0.5 * (log_factorial(a) + log_factorial(b) + log_factorial(c) - log_factorial(s + 1) + log_factorial(j1pm1) +
             log_factorial(j1mm1) + log_factorial(j2pm2) + log_factorial(j2mm2) + log_factorial(j3pm3) +
             log_factorial(j3mm3));

  // k bounds from the non-negativity of each factorial argument
  const int t1 = (tj3 - tj2 + tm1) / 2;  // j3 - j2 + m1
  const int t2 = (tj3 - tj1 - tm2) / 2;  // j3 - j1 - m2
  const int kmin = std::max({0, -t1, -t2});
  const int kmax = std::min({a, j1mm1, j2pm2});

  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double log_den = log_factorial(k) + log_factorial(t1 + k) + log_factorial(t2 + k) + log_factorial(a - k) +
                           log_factorial(j1mm1 - k) + log_factorial(j2pm2 - k);
    sum += parity_sign(k) * std::exp(log_prefactor - log_den);
  }
  // (-1)^(j1 - j2 - m3)
  const int phase_exp = (tj1 - tj2 - tm3) / 2;
  return parity_sign(std::abs(phase_exp)) * sum;
}

double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M) {
  // Validate before the shortcut so unphysical input always throws.
  const double w = wigner3j(j1, j2, J, m1, m2, -M);
  if (twice(m1, "m1") + twice(m2, "m2") != twice(M, "M")) return 0.0;
  const int phase_exp = (twice(j1, "j1") - twice(j2, "j2") + twice(M, "M")) / 2;
  return parity_sign(std::abs(phase_exp)) * std::sqrt(2.0 * J + 1.0) * w;
}

cplx sph_harm(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) {
    throw std::invalid_argument("sph_harm requires |m| <= l, got l=" + std::to_string(l) + " m=" + std::to_string(m));
  }
  const int am = std::abs(m);
  const double plm = gsl_sf_legendre_sphPlm(l, am, std::cos(theta));
  const cplx y = plm * std::polar(1.0, am * phi);
  if (m >= 0) return y;
  return static_cast<double>(parity_sign(am)) * std::conj(y);
}

Eigen::Vector3d Direction::cartesian() const {
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

Direction Direction::from_vector(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (n == 0.0) throw std::invalid_argument("direction from zero vector");
  const double z = std::clamp(v.z() / n, -1.0, 1.0);
  return {std::acos(z), std::atan2(v.y(), v.x())};
}

Eigen::Vector3cd spherical_unit_vector(int q) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (q) {
    case 1:
      return Eigen::Vector3cd(cplx(-r, 0.0), cplx(0.0, -r), cplx(0.0, 0.0));
    case 0:
      return Eigen::Vector3cd(0.0, 0.0, 1.0);
    case -1:
      return Eigen::Vector3cd(cplx(r, 0.0), cplx(0.0, -r), cplx(0.0, 0.0));
    default:
      throw std::invalid_argument("spherical index q must be -1, 0 or +1");
  }
}

std::array<cplx, 3> spherical_basis_decompose(const Direction& direction) {
  const double norm = std::sqrt(4.0 * constants::pi / 3.0);
  std::array<cplx, 3> c{};
  for (int q = -1; q <= 1; ++q) c[static_cast<std::size_t>(q + 1)] = norm * sph_harm(1, q, direction.theta, direction.phi);
  return c;
}

Eigen::Vector3cd reconstruct_from_spherical(const std::array<cplx, 3>& coefficients) {
  Eigen::Vector3cd v = Eigen::Vector3cd::Zero();
  for (int q = -1; q <= 1; ++q) v += coefficients[static_cast<std::size_t>(q + 1)] * spherical_unit_vector(q).conjugate();
  return v;
}

std::array<cplx, 3> spherical_components(const Eigen::Vector3cd& v) {
  std::array<cplx, 3> c{};
  for (int q = -1; q <= 1; ++q) c[static_cast<std::size_t>(q + 1)] = spherical_unit_vector(q).transpose() * v;
  return c;
}

double double_factorial(int n) {
  if (n < -1) throw std::invalid_argument("double factorial of n < -1");
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

double multipole_weight(int lambda, double k, double r) {
  if (lambda < 0 || k < 0.0 || r < 0.0) throw std::invalid_argument("multipole_weight requires non-negative arguments");
  return std::pow(k * r, lambda) / double_factorial(2 * lambda + 1);
}

double dipole_angular(int lf, int mf, int q, int li, int mi) {
  if (mf != mi + q) return 0.0;
  if (std::abs(lf - li) != 1) return 0.0;
  return parity_sign(std::abs(mf)) * std::sqrt((2.0 * lf + 1.0) * (2.0 * li + 1.0)) * wigner3j(lf, 1, li, -mf, q, mi) *
         wigner3j(lf, 1, li, 0, 0, 0);
}

double wigner_small_d(int j, int mp, int m, double beta) {
  if (j < 0 || std::abs(m) > j || std::abs(mp) > j) throw std::invalid_argument("wigner_small_d: |m| > j");
  const double c = std::cos(0.5 * beta);
  const double s = std::sin(0.5 * beta);
  const double log_norm =
      0.5 * (log_factorial(j + mp) + log_factorial(j - mp) + log_factorial(j + m) + log_factorial(j - m));
  const int kmin = std::max(0, m - mp);
  const int kmax = std::min(j + m, j - mp);
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double log_den = log_factorial(j + m - k) + log_factorial(k) + log_factorial(j - k - mp) +
                           log_factorial(k - m + mp);
    const double term = std::exp(log_norm - log_den) * std::pow(c, 2 * j - 2 * k + m - mp) * std::pow(s, 2 * k - m + mp);
    sum += parity_sign(k - m + mp + 2 * j) * term;
  }
  return sum;
}

Eigen::MatrixXcd wigner_D(int j, double alpha, double beta, double gamma) {
  const int dim = 2 * j + 1;
  Eigen::MatrixXcd d(dim, dim);
  for (int mp = -j; mp <= j; ++mp) {
    for (int m = -j; m <= j; ++m) {
      d(mp + j, m + j) = std::polar(1.0, -mp * alpha) * wigner_small_d(j, mp, m, beta) * std::polar(1.0, -m * gamma);
    }
  }
  return d;
}

Eigen::Matrix3d rotation_matrix(double alpha, double beta, double gamma) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  return (AngleAxisd(alpha, Vector3d::UnitZ()) * AngleAxisd(beta, Vector3d::UnitY()) *
          AngleAxisd(gamma, Vector3d::UnitZ()))
      .toRotationMatrix();
}

GaussLegendre gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre needs at least one node");
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
  if (table == nullptr) throw std::runtime_error("gauss_legendre: table allocation failed");
  GaussLegendre gl;
  gl.nodes.resize(static_cast<std::size_t>(n));
  gl.weights.resize(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    gsl_integration_glfixed_point(a, b, i, &gl.nodes[i], &gl.weights[i], table);
  }
  gsl_integration_glfixed_table_free(table);
  return gl;
}

SphereQuadrature::SphereQuadrature(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("sphere quadrature needs positive node counts");
  // Nodes in cos(theta) ascending -> theta descending; reverse so theta ascends.
  auto gl = gauss_legendre(n_theta, -1.0, 1.0);
  std::reverse(gl.nodes.begin(), gl.nodes.end());
  std::reverse(gl.weights.begin(), gl.weights.end());
  for (int i = 0; i < n_theta; ++i) {
    const double x = gl.nodes[static_cast<std::size_t>(i)];
    cos_theta_.push_back(x);
    theta_.push_back(std::acos(x));
    theta_weight_.push_back(gl.weights[static_cast<std::size_t>(i)]);
  }
  nodes_.reserve(static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi));
  for (int i = 0; i < n_theta; ++i) {
    for (int j = 0; j < n_phi; ++j) nodes_.push_back({{theta(i), phi(j)}, theta_weight(i) * phi_weight()});
  }
}

double SphereQuadrature::phi(int j) const { return 2.0 * constants::pi * j / n_phi_; }

double SphereQuadrature::phi_weight() const noexcept { return 2.0 * constants::pi / n_phi_; }

const SphereQuadrature& default_quadrature() {
  static const SphereQuadrature q(32, 64);
  return q;
}

}  // namespace photopair::angular
