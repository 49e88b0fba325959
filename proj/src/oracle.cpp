#include "photopair/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

namespace photopair::oracle {

namespace {

constexpr double kModeMatch = 1e-9;

// Per-step coupling blocks: c[gamma] maps sublevels of level s to level s+1
// (rate in fs^-1), together with the detuning frequency of each mode.
struct StepCouplings {
  std::vector<Eigen::MatrixXcd> c;
  std::vector<double> bohr;  // fs^-1
  std::vector<bool> active;
};

StepCouplings step_couplings(const TruncatedSystem& sys, std::size_t s) {
  StepCouplings out;
  const auto& upper = sys.levels[s];
  const auto& lower = sys.levels[s + 1];
  const double omega = sys.transition_energy(s);
  for (const auto& mode : sys.modes[s]) {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(sys.dim(s + 1), sys.dim(s));
    const bool on_channel = std::abs(mode.energy - omega) <= sys.window;
    if (on_channel && sys.coupling != 0.0) {
      const Eigen::Vector3cd e = cascade::polarization_vector(mode).cast<cplx>();
      const double a0 = cascade::mode_coupling(mode.energy);
      for (int ml = -lower.l; ml <= lower.l; ++ml)
        for (int mu = -upper.l; mu <= upper.l; ++mu) {
          const Eigen::Vector3cd d = cascade::dipole_vector(lower.l, ml, upper.l, mu);
          c(ml + lower.l, mu + upper.l) = sys.coupling * a0 * sys.radial[s] * e.dot(d);
        }
    }
    out.active.push_back(on_channel && sys.coupling != 0.0);
    out.bohr.push_back((mode.energy - omega) / constants::hbar_eV_fs);
    out.c.push_back(std::move(c));
  }
  return out;
}

class Interaction {
 public:
  explicit Interaction(const TruncatedSystem& sys) : sys_(sys) {
    offsets_.push_back(0);
    for (std::size_t s = 0; s < sys.levels.size(); ++s) offsets_.push_back(offsets_.back() + sys.sector_size(s));
    for (std::size_t s = 0; s < sys.steps(); ++s) steps_.push_back(step_couplings(sys, s));
  }

  std::size_t size() const { return offsets_.back(); }
  const std::vector<std::size_t>& offsets() const { return offsets_; }

  // out = -i V_I(t) in
  void apply(double t, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const {
    out.setZero(static_cast<Eigen::Index>(size()));
    std::size_t configs = 1;
    for (std::size_t s = 0; s < steps_.size(); ++s) {
      const auto& st = steps_[s];
      const int du = sys_.dim(s), dl = sys_.dim(s + 1);
      const std::size_t n_modes = st.c.size();
      for (std::size_t g = 0; g < n_modes; ++g) {
        if (!st.active[g]) continue;
        const cplx ph = std::polar(1.0, st.bohr[g] * t);
        const Eigen::MatrixXcd emit = st.c[g] * ph;
        for (std::size_t p = 0; p < configs; ++p) {
          const auto ui = static_cast<Eigen::Index>(offsets_[s] + p * static_cast<std::size_t>(du));
          const auto li = static_cast<Eigen::Index>(offsets_[s + 1] + (p * n_modes + g) * static_cast<std::size_t>(dl));
          out.segment(li, dl).noalias() += emit * in.segment(ui, du);
          out.segment(ui, du).noalias() += emit.adjoint() * in.segment(li, dl);
        }
      }
      configs *= n_modes;
    }
    out *= cplx(0.0, -1.0);
  }

 private:
  const TruncatedSystem& sys_;
  std::vector<std::size_t> offsets_;
  std::vector<StepCouplings> steps_;
};

std::size_t find_mode(const std::vector<cascade::PhotonMode>& modes, const cascade::PhotonMode& m) {
  const Eigen::Vector3d k = m.direction.cartesian();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].polarization == m.polarization && std::abs(modes[i].energy - m.energy) < kModeMatch &&
        (modes[i].direction.cartesian() - k).norm() < kModeMatch) {
      return i;
    }
  }
  throw std::invalid_argument("photon mode is not part of the oracle mode grid");
}

}  // namespace

std::vector<Eigen::Vector3d> icosahedron_directions() {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v;
  for (double a : {-1.0, 1.0})
    for (double b : {-g, g}) {
      v.emplace_back(0.0, a, b);
      v.emplace_back(a, b, 0.0);
      v.emplace_back(b, 0.0, a);
    }
  for (auto& x : v) x.normalize();
  return v;
}

std::vector<cascade::PhotonMode> mode_grid(std::span<const Eigen::Vector3d> directions, std::span<const double> energies) {
  std::vector<cascade::PhotonMode> modes;
  for (const auto& d : directions)
    for (int pol = 1; pol <= 2; ++pol)
      for (double e : energies) modes.push_back({angular::Direction::from_vector(d), pol, e, 0});
  return modes;
}

std::vector<double> channel_energies(double center, double detuning) {
  return {center - detuning, center, center + detuning};
}

std::size_t TruncatedSystem::sector_size(std::size_t sector) const {
  std::size_t n = static_cast<std::size_t>(dim(sector));
  for (std::size_t s = 0; s < sector; ++s) n *= modes[s].size();
  return n;
}

std::size_t TruncatedSystem::basis_size() const {
  std::size_t n = 0;
  for (std::size_t s = 0; s < levels.size(); ++s) n += sector_size(s);
  return n;
}

void TruncatedSystem::validate() const {
  if (levels.size() < 2) throw std::invalid_argument("oracle chain needs at least two levels");
  if (radial.size() != steps() || modes.size() != steps()) {
    throw std::invalid_argument("oracle chain needs one radial integral and one mode channel per step");
  }
  for (std::size_t s = 0; s < steps(); ++s) {
    if (std::abs(levels[s].l - levels[s + 1].l) != 1) {
      throw SelectionRuleError("oracle chain step " + levels[s].label + "->" + levels[s + 1].label + " is not E1");
    }
    if (!(transition_energy(s) > 0.0)) throw std::invalid_argument("oracle chain levels must decrease in energy");
    if (modes[s].empty()) throw std::invalid_argument("oracle mode channel is empty");
  }
  const auto d0 = static_cast<Eigen::Index>(dim(0));
  if (initial_rho.rows() != d0 || initial_rho.cols() != d0) {
    throw std::invalid_argument("initial density matrix does not match the upper level");
  }
  if ((initial_rho - initial_rho.adjoint()).norm() > 1e-10) {
    throw std::invalid_argument("initial density matrix must be Hermitian");
  }
  if (std::abs(initial_rho.trace().real() - 1.0) > 1e-10) {
    throw std::invalid_argument("initial density matrix must have unit trace");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < levels.size(); ++s) {
    double n = dim(s);
    for (std::size_t j = 0; j < s; ++j) n *= static_cast<double>(modes[j].size());
    total += n;
  }
  if (total > static_cast<double>(max_basis)) {
    throw BasisSizeError("oracle basis of " + std::to_string(static_cast<long long>(total)) +
                         " states exceeds the configured limit of " + std::to_string(max_basis));
  }
}

TruncatedSystem TruncatedSystem::hydrogen_cascade(const Eigen::MatrixXcd& rho,
                                                  std::span<const Eigen::Vector3d> directions, double coupling,
                                                  double detuning) {
  const auto scheme = cascade::CascadeScheme::hydrogen_4d_3p_1s();
  TruncatedSystem sys;
  sys.levels = {scheme.upper, scheme.middle, scheme.lower};
  sys.radial = {scheme.radial_upper_middle, scheme.radial_middle_lower};
  const auto e1 = channel_energies(scheme.first_photon_energy(), detuning);
  const auto e2 = channel_energies(scheme.second_photon_energy(), detuning);
  sys.modes = {mode_grid(directions, e1), mode_grid(directions, e2)};
  sys.coupling = coupling;
  sys.window = scheme.window;
  sys.initial_rho = rho;
  return sys;
}

TruncatedSystem TruncatedSystem::hydrogen_cascade(const Eigen::MatrixXcd& rho, double coupling, double detuning) {
  const auto dirs = icosahedron_directions();
  return hydrogen_cascade(rho, dirs, coupling, detuning);
}

double History::first_crossing(std::size_t sector, double threshold) const {
  for (Eigen::Index i = 0; i < sector_population.rows(); ++i)
    if (sector_population(i, static_cast<Eigen::Index>(sector)) > threshold) return times[static_cast<std::size_t>(i)];
  return -1.0;
}

double History::norm() const {
  double n = 0.0;
  for (std::size_t c = 0; c < weights.size(); ++c) n += weights[c] * coefficients[c].squaredNorm();
  return n;
}

double max_bohr_frequency(const TruncatedSystem& system) {
  double w = 0.0;
  for (std::size_t s = 0; s < system.steps(); ++s) {
    const auto st = step_couplings(system, s);
    for (std::size_t g = 0; g < st.bohr.size(); ++g)
      if (st.active[g]) w = std::max(w, std::abs(st.bohr[g]));
  }
  return w;
}

History propagate(const TruncatedSystem& system, int order, double t_final, double dt) {
  system.validate();
  if (order < 1) throw std::invalid_argument("iteration order must be at least 1");
  if (!(dt > 0.0) || !(t_final > 0.0)) throw std::invalid_argument("oracle time step and final time must be positive");
  const double w = max_bohr_frequency(system);
  if (w > 0.0 && dt > 0.1 / w) {
    throw StabilityError("time step " + std::to_string(dt) + " fs does not resolve the fastest Bohr frequency (" +
                         std::to_string(w) + " fs^-1); need dt <= " + std::to_string(0.1 / w) + " fs");
  }

  const Interaction v(system);
  const auto n = static_cast<Eigen::Index>(v.size());
  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
  const double h = t_final / static_cast<double>(steps);
  const std::size_t sectors = system.levels.size();

  History hist;
  hist.system = system;
  hist.order = order;
  hist.offsets = v.offsets();
  hist.times.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) hist.times[i] = h * static_cast<double>(i);
  hist.sector_population = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(steps + 1), static_cast<Eigen::Index>(sectors));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(system.initial_rho);
  const auto d0 = static_cast<Eigen::Index>(system.dim(0));
  for (Eigen::Index k = 0; k < d0; ++k) {
    const double weight = eig.eigenvalues()(k);
    if (weight <= 1e-14) continue;
    Eigen::VectorXcd s0 = Eigen::VectorXcd::Zero(n);
    s0.head(d0) = eig.eigenvectors().col(k);

    // s[j] = S^(j)(t_i), f[j] = -i V(t_i) S^(j)(t_i)
    std::vector<Eigen::VectorXcd> s(static_cast<std::size_t>(order) + 1, Eigen::VectorXcd::Zero(n));
    std::vector<Eigen::VectorXcd> f(static_cast<std::size_t>(order) + 1, Eigen::VectorXcd::Zero(n));
    s[0] = s0;
    for (int j = 0; j < order; ++j) v.apply(0.0, s[static_cast<std::size_t>(j)], f[static_cast<std::size_t>(j)]);

    auto record = [&](std::size_t i) {
      Eigen::VectorXcd total = Eigen::VectorXcd::Zero(n);
      for (const auto& x : s) total += x;
      for (std::size_t sec = 0; sec < sectors; ++sec) {
        const auto a = static_cast<Eigen::Index>(hist.offsets[sec]);
        const auto len = static_cast<Eigen::Index>(hist.offsets[sec + 1] - hist.offsets[sec]);
        hist.sector_population(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(sec)) +=
            weight * total.segment(a, len).squaredNorm();
      }
      return total;
    };
    record(0);

    Eigen::VectorXcd next_f(n);
    for (std::size_t i = 1; i <= steps; ++i) {
      const double t = hist.times[i];
      // S^(0) is constant; each higher order uses the already-advanced lower order.
      v.apply(t, s[0], next_f);
      std::swap(f[0], next_f);
      for (int j = 1; j <= order; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        // f[j-1] now holds the value at t_i, next_f the value at t_{i-1}
        s[ju] += 0.5 * h * (next_f + f[ju - 1]);
        if (j < order) {
          v.apply(t, s[ju], next_f);
          std::swap(f[ju], next_f);
        }
      }
      const Eigen::VectorXcd total = record(i);
      if (i == steps) {
        hist.weights.push_back(weight);
        hist.coefficients.push_back(total);
      }
    }
  }
  return hist;
}

double extract_coincidence(const History& history, const cascade::PhotonMode& mode1, const cascade::PhotonMode& mode2,
                           bool normalized) {
  const auto& sys = history.system;
  if (sys.steps() != 2) throw std::invalid_argument("coincidence extraction needs a two-step chain");
  const std::size_t g1 = find_mode(sys.modes[0], mode1);
  const std::size_t g2 = find_mode(sys.modes[1], mode2);
  const auto dl = static_cast<Eigen::Index>(sys.dim(2));
  const auto start = static_cast<Eigen::Index>(history.offsets[2] +
                                               (g1 * sys.modes[1].size() + g2) * static_cast<std::size_t>(dl));
  const auto sector = static_cast<Eigen::Index>(history.offsets[3] - history.offsets[2]);
  double p = 0.0, total = 0.0;
  for (std::size_t c = 0; c < history.weights.size(); ++c) {
    p += history.weights[c] * history.coefficients[c].segment(start, dl).squaredNorm();
    total += history.weights[c] *
             history.coefficients[c].segment(static_cast<Eigen::Index>(history.offsets[2]), sector).squaredNorm();
  }
  if (!normalized) return p;
  if (total == 0.0) return 0.0;
  return p / total;
}

double cascade_deviation(const History& history, const cascade::CascadeScheme& scheme) {
  const auto& sys = history.system;
  std::vector<double> oracle_p, cascade_p;
  for (const auto& m1 : sys.modes[0]) {
    if (std::abs(m1.energy - scheme.first_photon_energy()) > kModeMatch) continue;
    for (const auto& m2 : sys.modes[1]) {
      if (std::abs(m2.energy - scheme.second_photon_energy()) > kModeMatch) continue;
      oracle_p.push_back(extract_coincidence(history, m1, m2, false));
      cascade_p.push_back(cascade::coincidence_probability(sys.initial_rho, scheme, cascade::DetectorSpec::from_mode(m1),
                                                           cascade::DetectorSpec::from_mode(m2)));
    }
  }
  if (oracle_p.empty()) throw std::invalid_argument("mode grid has no on-resonance pairs");
  const double so = std::accumulate(oracle_p.begin(), oracle_p.end(), 0.0);
  const double sc = std::accumulate(cascade_p.begin(), cascade_p.end(), 0.0);
  if (so <= 0.0 || sc <= 0.0) throw EmptyResultError("on-resonance coincidence pattern is empty");
  double peak = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < oracle_p.size(); ++i) {
    peak = std::max(peak, cascade_p[i] / sc);
    dev = std::max(dev, std::abs(oracle_p[i] / so - cascade_p[i] / sc));
  }
  return dev / peak;
}

}  // namespace photopair::oracle
