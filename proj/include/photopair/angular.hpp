#pragma once

// Angular-momentum algebra: Wigner symbols, spherical harmonics, spherical
// basis vectors, rotation matrices and the angular quadrature shared by the
// collision and cascade modules. Condon-Shortley phase throughout.

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace photopair::angular {

using cplx = std::complex<double>;

struct AngularQuantumNumbers {
  int l = 0;
  int m = 0;

  AngularQuantumNumbers() = default;
  AngularQuantumNumbers(int l, int m);  // throws std::invalid_argument unless |m| <= l

  friend bool operator==(const AngularQuantumNumbers&, const AngularQuantumNumbers&) = default;
  friend auto operator<=>(const AngularQuantumNumbers&, const AngularQuantumNumbers&) = default;
};

/// Wigner 3j symbol. Arguments may be integers or half-integers.
/// Returns exactly 0 when the m's do not sum to zero or the triangle rule fails.
/// Throws std::invalid_argument when an (j, m) pair is not physical.
double wigner3j(double j1, double j2, double j3, double m1, double m2, double m3);

/// <j1 m1; j2 m2 | J M>
double clebsch_gordan(double j1, double m1, double j2, double m2, double J, double M);

/// Complex spherical harmonic Y_l^m(theta, phi).
cplx sph_harm(int l, int m, double theta, double phi);

/// Unit direction on the sphere. Polar angle theta in [0, pi], azimuth phi.
struct Direction {
  double theta = 0.0;
  double phi = 0.0;

  Eigen::Vector3d cartesian() const;
  static Direction from_vector(const Eigen::Vector3d& v);
};

/// Covariant spherical unit vector e_q, q in {-1, 0, +1}.
///   e_{+1} = -(x + i y)/sqrt2,  e_0 = z,  e_{-1} = (x - i y)/sqrt2
Eigen::Vector3cd spherical_unit_vector(int q);

/// Coefficients c_q = (4 pi / 3)^{1/2} Y_1^q(direction), indexed by q + 1,
/// such that  direction = sum_q c_q conj(e_q).
std::array<cplx, 3> spherical_basis_decompose(const Direction& direction);

/// Cartesian vector sum_q c_q conj(e_q).
Eigen::Vector3cd reconstruct_from_spherical(const std::array<cplx, 3>& coefficients);

/// Spherical components V_q = e_q . V of a Cartesian vector, indexed by q + 1.
std::array<cplx, 3> spherical_components(const Eigen::Vector3cd& v);

/// (2n+1)!! style double factorial; n!! for n >= -1.
double double_factorial(int n);

/// Long-wavelength multipole weight (k r)^lambda / (2 lambda + 1)!!, the small-argument
/// limit of the spherical Bessel function j_lambda(k r).
double multipole_weight(int lambda, double k, double r);

/// Reduced matrix element of the Racah tensor: <lf mf | C^1_q | li mi>.
double dipole_angular(int lf, int mf, int q, int li, int mi);

/// Wigner small-d matrix element d^j_{m' m}(beta) for integer j.
double wigner_small_d(int j, int mp, int m, double beta);

/// Wigner D matrix for an active rotation R = Rz(alpha) Ry(beta) Rz(gamma).
/// Rows/columns are indexed by m + j. Satisfies
///   Y_l^m(R^-1 r) = sum_m' Y_l^m'(r) D_{m' m}.
Eigen::MatrixXcd wigner_D(int j, double alpha, double beta, double gamma);

/// Cartesian matrix of the same active rotation.
Eigen::Matrix3d rotation_matrix(double alpha, double beta, double gamma);

/// Gauss-Legendre nodes and weights on [a, b].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n, double a, double b);

/// Product quadrature over the unit sphere: Gauss-Legendre in cos(theta) times
/// a uniform trapezoid in phi.
class SphereQuadrature {
 public:
  struct Node {
    Direction direction;
    double weight;
  };

  SphereQuadrature(int n_theta, int n_phi);

  int n_theta() const noexcept { return n_theta_; }
  int n_phi() const noexcept { return n_phi_; }
  double theta(int i) const { return theta_[static_cast<std::size_t>(i)]; }
  double cos_theta(int i) const { return cos_theta_[static_cast<std::size_t>(i)]; }
  double theta_weight(int i) const { return theta_weight_[static_cast<std::size_t>(i)]; }
  double phi(int j) const;
  double phi_weight() const noexcept;

  /// Flattened nodes, theta-major.
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  int n_theta_;
  int n_phi_;
  std::vector<double> theta_;
  std::vector<double> cos_theta_;
  std::vector<double> theta_weight_;
  std::vector<Node> nodes_;
};

/// 32 Gauss-Legendre nodes in cos(theta) times 64 uniform in phi.
const SphereQuadrature& default_quadrature();

}  // namespace photopair::angular
