#include "photopair/collision.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gsl/gsl_sf_legendre.h>

#include "photopair/atoms.hpp"
#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

namespace photopair::collision {

namespace {

using constants::pi;
using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

constexpr int kRadialTablePoints = 2049;

double wave_number(double energy_eV) { return std::sqrt(2.0 * energy_eV / constants::hartree_eV); }

cplx i_power(int l) {
  static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[((l % 4) + 4) % 4];
}

// conj(Y_l^mu(q-hat)) for mu = -l..l (index mu + l), from Cartesian components.
void conj_harmonics(int l, const Eigen::Vector3d& q, double qn, std::vector<cplx>& out) {
  out.assign(static_cast<std::size_t>(2 * l + 1), 0.0);
  const double ct = std::clamp(q.z() / qn, -1.0, 1.0);
  const double perp = std::hypot(q.x(), q.y());
  const cplx e_iphi = perp > 0.0 ? cplx(q.x() / perp, q.y() / perp) : cplx(1.0, 0.0);
  cplx e_pow(1.0, 0.0);
  for (int m = 0; m <= l; ++m) {
    const cplx y = gsl_sf_legendre_sphPlm(l, m, ct) * e_pow;
    out[static_cast<std::size_t>(l + m)] = std::conj(y);
    if (m > 0) out[static_cast<std::size_t>(l - m)] = ((m % 2 == 0) ? 1.0 : -1.0) * y;
    e_pow *= e_iphi;
  }
}

// I_l(q) tabulated on a uniform q grid with a cubic B-spline.
class RadialTable {
 public:
  RadialTable(int n, int l, double q_lo, double q_hi) {
    const double pad = 0.02 * (q_hi - q_lo) + 1e-3;
    lo_ = std::max(0.0, q_lo - pad);
    const double hi = q_hi + pad;
    const double h = (hi - lo_) / (kRadialTablePoints - 1);
    std::vector<double> values(kRadialTablePoints);
    for (int k = 0; k < kRadialTablePoints; ++k) values[static_cast<std::size_t>(k)] = born_radial_integral(n, l, lo_ + k * h);
    spline_ = Spline(values.data(), values.size(), lo_, h);
  }
  double operator()(double q) const { return spline_(q); }

 private:
  double lo_ = 0.0;
  Spline spline_;
};

// Born amplitude prefactor without the angular factor: -2 sqrt(4 pi) i^l I_l(q) / q^2.
struct BornEvaluator {
  const RadialTable& radial;
  int l;
  cplx prefactor;

  BornEvaluator(const RadialTable& r, int l_) : radial(r), l(l_), prefactor(-2.0 * std::sqrt(4.0 * pi) * i_power(l_)) {}

  // out[mu + l] = amplitude for target sublevel mu
  void operator()(const Eigen::Vector3d& q, std::vector<cplx>& scratch, std::vector<cplx>& out) const {
    const double qn = q.norm();
    conj_harmonics(l, q, qn, scratch);
    const cplx g = prefactor * radial(qn) / (qn * qn);
    out.resize(scratch.size());
    for (std::size_t k = 0; k < scratch.size(); ++k) out[k] = g * scratch[k];
  }
};

}  // namespace

void CollisionGeometry::validate() const {
  if (!target_offset.allFinite()) throw std::invalid_argument("collision geometry: target offset must be finite");
  const double n = incident_direction.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-9) {
    throw std::invalid_argument("collision geometry: incident direction must be a unit vector");
  }
}

TargetManifold TargetManifold::hydrogen(int n, int l) {
  const auto level = atoms::hydrogen_level(n, l);
  return {level.label, n, l, level.energy};
}

SublevelDensityMatrix::SublevelDensityMatrix(std::string manifold, int l, Eigen::MatrixXcd rho, double yield)
    : manifold_(std::move(manifold)), l_(l), rho_(std::move(rho)), yield_(yield) {
  if (rho_.rows() != 2 * l_ + 1 || rho_.cols() != 2 * l_ + 1) {
    throw std::invalid_argument("density matrix dimension does not match 2l+1");
  }
}

SublevelDensityMatrix SublevelDensityMatrix::from_unnormalized(std::string manifold, int l,
                                                               const Eigen::MatrixXcd& unnormalized) {
  const double tr = unnormalized.trace().real();
  if (!(tr > 0.0)) throw EmptyResultError("excitation of " + manifold + " has zero probability");
  return SublevelDensityMatrix(std::move(manifold), l, unnormalized / tr, tr);
}

double SublevelDensityMatrix::trace() const { return rho_.trace().real(); }

double SublevelDensityMatrix::hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

double SublevelDensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd h = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

SublevelDensityMatrix SublevelDensityMatrix::rotated(double alpha, double beta, double gamma) const {
  const Eigen::MatrixXcd d = angular::wigner_D(l_, alpha, beta, gamma);
  return SublevelDensityMatrix(manifold_, l_, d * rho_ * d.adjoint(), yield_);
}

double born_radial_integral(int n, int l, double q) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument("born_radial_integral needs finite q >= 0");
  auto integrand = [&](double r) {
    return atoms::hydrogen_radial(n, l, r) * std::sph_bessel(static_cast<unsigned>(l), q * r) *
           atoms::hydrogen_radial(1, 0, r) * r * r;
  };
  // The 1s factor makes the integrand below 1e-20 beyond r ~ 60 bohr for n <= 6.
  const double r_max = 60.0 + 4.0 * n;
  using boost::math::quadrature::gauss_kronrod;
  double error = 0.0;
  const double value = gauss_kronrod<double, 61>::integrate(integrand, 0.0, r_max, 20, 1e-13, &error);
  if (!std::isfinite(value) || error > 1e-10) {
    throw NumericError("form factor radial quadrature did not converge for n=" + std::to_string(n) +
                       " l=" + std::to_string(l) + " q=" + std::to_string(q) +
                       " (error estimate " + std::to_string(error) + ")");
  }
  return value;
}

std::vector<cplx> born_form_factors(const Eigen::Vector3d& q, const TargetManifold& target) {
  const double qn = q.norm();
  std::vector<cplx> out(static_cast<std::size_t>(2 * target.l + 1), 0.0);
  const double radial = born_radial_integral(target.n, target.l, qn);
  if (qn == 0.0) {
    // Only l = 0 survives at q = 0, and orthogonality makes that integral vanish too.
    if (target.l == 0) out[0] = std::sqrt(4.0 * pi) * radial * angular::sph_harm(0, 0, 0.0, 0.0);
    return out;
  }
  std::vector<cplx> ystar;
  conj_harmonics(target.l, q, qn, ystar);
  const cplx pref = std::sqrt(4.0 * pi) * i_power(target.l) * radial;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = pref * ystar[k];
  return out;
}

cplx born_form_factor(const Eigen::Vector3d& q, const TargetManifold& target, int m) {
  if (std::abs(m) > target.l) throw std::invalid_argument("born_form_factor: |m| > l");
  return born_form_factors(q, target)[static_cast<std::size_t>(m + target.l)];
}

namespace {

struct GramContext {
  const std::vector<angular::AngularQuantumNumbers>& channels;
  const TargetManifold& target;
  const CollisionGeometry& geometry;
  CollisionKernel::Route route;
  const RadialTable& radial;
};

Eigen::MatrixXcd gram_for_energy(const GramContext& ctx, double energy, const angular::SphereQuadrature& incident,
                                 const angular::SphereQuadrature& final) {
  const auto& channels = ctx.channels;
  const auto& target = ctx.target;
  const auto& geometry = ctx.geometry;
  const double final_energy = energy - target.excitation_energy;
  if (!(final_energy > 0.0)) return {};

  const double ki = wave_number(energy);
  const double kf = wave_number(final_energy);
  const int l = target.l;
  const int dim = 2 * l + 1;
  const auto n_channels = static_cast<int>(channels.size());

  const BornEvaluator born(ctx.radial, l);

  int m_max = 0;
  for (const auto& c : channels) m_max = std::max(m_max, std::abs(c.m));

  // Y_c(theta_b, 0) and exp(i s phi_j) tables for the incident grid.
  const int nb = incident.n_theta();
  const int nj = incident.n_phi();
  Eigen::MatrixXcd y0(nb, n_channels);
  for (int b = 0; b < nb; ++b)
    for (int c = 0; c < n_channels; ++c)
      y0(b, c) = angular::sph_harm(channels[static_cast<std::size_t>(c)].l, channels[static_cast<std::size_t>(c)].m,
                                   incident.theta(b), 0.0);
  Eigen::MatrixXcd phase(nj, 2 * m_max + 1);
  for (int j = 0; j < nj; ++j)
    for (int s = -m_max; s <= m_max; ++s) phase(j, s + m_max) = std::polar(1.0, s * incident.phi(j));

  std::vector<cplx> scratch, amp;
  // H(b)[mu][s]: phi_i-projected Born amplitude.
  std::vector<cplx> h(static_cast<std::size_t>(nb * dim * (2 * m_max + 1)));
  auto h_at = [&](int b, int mu, int s) -> cplx& {
    return h[static_cast<std::size_t>((b * dim + mu) * (2 * m_max + 1) + s + m_max)];
  };

  // T(c, mu) for one final direction.
  auto amplitudes_for = [&](const Eigen::Vector3d& kf_vec) {
    std::fill(h.begin(), h.end(), cplx(0.0));
    for (int b = 0; b < nb; ++b) {
      const double st = std::sin(incident.theta(b));
      const double ct = incident.cos_theta(b);
      for (int j = 0; j < nj; ++j) {
        const double ph = incident.phi(j);
        const Eigen::Vector3d ki_vec(ki * st * std::cos(ph), ki * st * std::sin(ph), ki * ct);
        const Eigen::Vector3d q = ki_vec - kf_vec;
        born(q, scratch, amp);
        const cplx propagation = std::polar(1.0, q.dot(geometry.target_offset));
        for (int mu = 0; mu < dim; ++mu) {
          const cplx g = incident.phi_weight() * propagation * amp[static_cast<std::size_t>(mu)];
          for (int s = -m_max; s <= m_max; ++s) h_at(b, mu, s) += g * phase(j, s + m_max);
        }
      }
    }
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n_channels, dim);
    for (int c = 0; c < n_channels; ++c) {
      const int m = channels[static_cast<std::size_t>(c)].m;
      for (int mu = 0; mu < dim; ++mu) {
        cplx sum = 0.0;
        for (int b = 0; b < nb; ++b) sum += incident.theta_weight(b) * y0(b, c) * h_at(b, mu, m);
        t(c, mu) = sum;
      }
    }
    return t;
  };

  const int n = n_channels * dim;
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(n, n);
  const bool symmetric = ctx.route == CollisionKernel::Route::Auto && ctx.geometry.target_offset.isZero(0.0);
  if (symmetric) {
    // T(c,mu) at azimuth alpha equals exp(i (m_c - mu) alpha) T(c,mu) at azimuth 0,
    // so the final-azimuth integral reduces to 2 pi delta(m_c - mu, m_c' - mu').
    for (int a = 0; a < final.n_theta(); ++a) {
      const double st = std::sin(final.theta(a));
      const Eigen::MatrixXcd t = amplitudes_for(Eigen::Vector3d(kf * st, 0.0, kf * final.cos_theta(a)));
      const double w = 2.0 * pi * final.theta_weight(a);
      for (int c = 0; c < n_channels; ++c)
        for (int mu = 0; mu < dim; ++mu)
          for (int cp = 0; cp < n_channels; ++cp)
            for (int mup = 0; mup < dim; ++mup) {
              const int dm = channels[static_cast<std::size_t>(c)].m - (mu - l);
              const int dmp = channels[static_cast<std::size_t>(cp)].m - (mup - l);
              if (dm != dmp) continue;
              gram(c * dim + mu, cp * dim + mup) += w * t(c, mu) * std::conj(t(cp, mup));
            }
    }
  } else {
    for (const auto& node : final.nodes()) {
      const Eigen::Vector3d kf_vec = kf * node.direction.cartesian();
      const Eigen::MatrixXcd t = amplitudes_for(kf_vec);
      Eigen::VectorXcd ordered(n);
      for (int c = 0; c < n_channels; ++c)
        for (int mu = 0; mu < dim; ++mu) ordered(c * dim + mu) = t(c, mu);
      gram.noalias() += node.weight * ordered * ordered.adjoint();
    }
  }
  // Flux factor of the cross section.
  gram *= kf / ki;
  return gram;
}

}  // namespace

CollisionKernel::CollisionKernel(ionization::EnergyGrid grid, std::vector<angular::AngularQuantumNumbers> channels,
                                 TargetManifold target, CollisionGeometry geometry, CollisionQuadrature quadrature,
                                 Route route, int threads)
    : grid_(std::move(grid)),
      channels_(std::move(channels)),
      target_(std::move(target)),
      geometry_(std::move(geometry)),
      quadrature_(quadrature),
      route_(route) {
  geometry_.validate();
  if (channels_.empty()) throw std::invalid_argument("collision kernel needs at least one partial-wave channel");
  if (target_.l < 0 || target_.l >= target_.n) throw std::invalid_argument("invalid target manifold");

  const angular::SphereQuadrature incident(quadrature_.incident_theta, quadrature_.incident_phi);
  const angular::SphereQuadrature final(quadrature_.final_theta, quadrature_.final_phi);

  gram_.resize(grid_.size());
  double q_lo = std::numeric_limits<double>::infinity(), q_hi = 0.0;
  for (double e : grid_.points()) {
    if (!(e - target_.excitation_energy > 0.0)) continue;
    const double ki = wave_number(e), kf = wave_number(e - target_.excitation_energy);
    q_lo = std::min(q_lo, ki - kf);
    q_hi = std::max(q_hi, ki + kf);
  }
  if (q_hi == 0.0) return;  // every channel closed; reported when the kernel is applied
  const RadialTable radial(target_.n, target_.l, q_lo, q_hi);
  const GramContext ctx{channels_, target_, geometry_, route_, radial};

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(grid_.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < grid_.size(); i = next++) {
      try {
        gram_[i] = gram_for_energy(ctx, grid_[i], incident, final);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

bool CollisionKernel::any_open() const noexcept {
  return std::any_of(gram_.begin(), gram_.end(), [](const auto& g) { return g.size() > 0; });
}


Eigen::MatrixXcd CollisionKernel::unnormalized(const ionization::PhotoelectronWavePacket& packet) const {
  if (!(packet.grid() == grid_)) throw std::invalid_argument("wave packet grid does not match the collision kernel");
  if (packet.channels() != channels_) throw std::invalid_argument("wave packet channels do not match the collision kernel");
  if (!any_open()) {
    throw EmptyResultError("all collision channels are closed: packet energies lie below the " + target_.label +
                           " excitation threshold");
  }

  const ionization::PhotoelectronWavePacket* source = &packet;
  ionization::PhotoelectronWavePacket rotated;
  if (!geometry_.incident_direction.isApprox(Eigen::Vector3d::UnitZ(), 1e-15)) {
    const auto d = angular::Direction::from_vector(geometry_.incident_direction);
    rotated = packet.rotated(d.phi, d.theta, 0.0);
    source = &rotated;
  }

  const int l = target_.l;
  const int dim = 2 * l + 1;
  const auto n_channels = static_cast<int>(channels_.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const auto& g = gram_[i];
    if (g.size() == 0) continue;
    const auto a = source->amplitudes().row(static_cast<Eigen::Index>(i));
    for (int mu = 0; mu < dim; ++mu)
      for (int mup = 0; mup < dim; ++mup) {
        cplx sum = 0.0;
        for (int c = 0; c < n_channels; ++c) {
          if (a(c) == 0.0) continue;
          for (int cp = 0; cp < n_channels; ++cp) sum += a(c) * std::conj(a(cp)) * g(c * dim + mu, cp * dim + mup);
        }
        rho(mu, mup) += grid_.weight(i) * sum;
      }
  }
  return rho;
}

SublevelDensityMatrix CollisionKernel::density_matrix(const ionization::PhotoelectronWavePacket& packet) const {
  return SublevelDensityMatrix::from_unnormalized(target_.label, target_.l, unnormalized(packet));
}

SublevelDensityMatrix excited_density_matrix(const ionization::PhotoelectronWavePacket& packet,
                                             const CollisionGeometry& geometry, const TargetManifold& target,
                                             const CollisionQuadrature& quadrature) {
  CollisionKernel kernel(packet.grid(), packet.channels(), target, geometry, quadrature);
  return kernel.density_matrix(packet);
}

}  // namespace photopair::collision
