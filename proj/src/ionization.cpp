#include "photopair/ionization.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "photopair/constants.hpp"
#include "photopair/errors.hpp"

namespace photopair::ionization {

namespace {

const cplx kMinusI(0.0, -1.0);

// (-i)^l exp(i delta_l): asymptotic phase of an outgoing partial wave.
cplx continuum_phase_factor(const atoms::AtomModel& atom, int l) {
  cplx f(1.0, 0.0);
  for (int k = 0; k < l; ++k) f *= kMinusI;
  return f * std::polar(1.0, atom.phase_for(l));
}

// -i / hbar per perturbative order (eV^-1 fs^-1).
const cplx kOrderFactor = kMinusI / constants::hbar_eV_fs;

}  // namespace

void PathwaySpec::validate(const atoms::AtomModel& atom) const {
  if (steps.empty() || steps.size() > 2) {
    throw std::invalid_argument("pathway '" + name + "' must have one or two photon steps");
  }
  for (const auto& s : steps) s.validate();
  const auto& g = atom.ground;
  const int q1 = field::spherical_index(steps[0].polarization);
  if (steps.size() == 1) {
    if (intermediate) throw std::invalid_argument("one-photon pathway '" + name + "' cannot declare an intermediate");
    return;
  }
  if (!intermediate) throw std::invalid_argument("two-photon pathway '" + name + "' needs a resonant intermediate");
  const auto& n = atom.intermediate(*intermediate);
  if (std::abs(n.l - g.l) != 1 || std::abs(g.m + q1) > n.l) {
    throw SelectionRuleError("pathway '" + name + "': intermediate " + n.label + " is not E1-reachable from " +
                             g.label + " with q=" + std::to_string(q1));
  }
}

EnergyGrid::EnergyGrid(double lo, double hi, int points) {
  if (points < 1) throw std::invalid_argument("energy grid needs at least one point");
  if (points > 1 && !(hi > lo)) throw std::invalid_argument("energy grid needs lo < hi");
  points_.resize(static_cast<std::size_t>(points));
  step_ = points > 1 ? (hi - lo) / (points - 1) : 0.0;
  for (int i = 0; i < points; ++i) points_[static_cast<std::size_t>(i)] = lo + i * step_;
  if (points > 1) points_.back() = hi;
}

EnergyGrid EnergyGrid::centered(double center, double halfwidth, int points) {
  return EnergyGrid(center - halfwidth, center + halfwidth, points);
}

double EnergyGrid::weight(std::size_t i) const {
  if (points_.size() == 1) return 1.0;
  return (i == 0 || i + 1 == points_.size()) ? 0.5 * step_ : step_;
}

EnergyGrid default_energy_grid(const field::FrequencyComponent& pulse) {
  return EnergyGrid::centered(kReferencePhotoelectronEnergy, 3.0 * pulse.spectral_sigma(), 64);
}

std::vector<AngularQuantumNumbers> channels_up_to(int l_max) {
  std::vector<AngularQuantumNumbers> c;
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) c.emplace_back(l, m);
  return c;
}

PhotoelectronWavePacket::PhotoelectronWavePacket(EnergyGrid grid, std::vector<AngularQuantumNumbers> channels)
    : grid_(std::move(grid)),
      channels_(std::move(channels)),
      amplitudes_(Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid_.size()),
                                         static_cast<Eigen::Index>(channels_.size()))) {}

std::optional<std::size_t> PhotoelectronWavePacket::channel_index(int l, int m) const {
  for (std::size_t c = 0; c < channels_.size(); ++c)
    if (channels_[c].l == l && channels_[c].m == m) return c;
  return std::nullopt;
}

cplx PhotoelectronWavePacket::amplitude(std::size_t energy_index, int l, int m) const {
  auto c = channel_index(l, m);
  if (!c) return 0.0;
  return amplitudes_(static_cast<Eigen::Index>(energy_index), static_cast<Eigen::Index>(*c));
}

double PhotoelectronWavePacket::norm_squared() const {
  double n = 0.0;
  for (std::size_t i = 0; i < grid_.size(); ++i) n += grid_.weight(i) * amplitudes_.row(static_cast<Eigen::Index>(i)).squaredNorm();
  return n;
}

std::vector<AngularQuantumNumbers> PhotoelectronWavePacket::support(double relative_tolerance) const {
  std::vector<AngularQuantumNumbers> s;
  if (amplitudes_.size() == 0) return s;
  const double peak = amplitudes_.cwiseAbs().maxCoeff();
  if (peak == 0.0) return s;
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    if (amplitudes_.col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff() > relative_tolerance * peak) {
      s.push_back(channels_[c]);
    }
  }
  return s;
}

PhotoelectronWavePacket& PhotoelectronWavePacket::operator+=(const PhotoelectronWavePacket& other) {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("cannot combine wave packets on different energy grids");
  if (channels_ != other.channels_) throw std::invalid_argument("cannot combine wave packets with different channels");
  amplitudes_ += other.amplitudes_;
  return *this;
}

PhotoelectronWavePacket& PhotoelectronWavePacket::operator*=(cplx factor) {
  amplitudes_ *= factor;
  return *this;
}

PhotoelectronWavePacket PhotoelectronWavePacket::rotated(double alpha, double beta, double gamma) const {
  PhotoelectronWavePacket out = *this;
  int l_max = 0;
  for (const auto& c : channels_) l_max = std::max(l_max, c.l);
  for (int l = 0; l <= l_max; ++l) {
    const Eigen::MatrixXcd d = angular::wigner_D(l, alpha, beta, gamma);
    for (int mp = -l; mp <= l; ++mp) {
      auto target = channel_index(l, mp);
      if (!target) continue;
      Eigen::VectorXcd col = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid_.size()));
      for (int m = -l; m <= l; ++m) {
        auto source = channel_index(l, m);
        if (!source) continue;
        col += d(mp + l, m + l) * amplitudes_.col(static_cast<Eigen::Index>(*source));
      }
      out.amplitudes_.col(static_cast<Eigen::Index>(*target)) = col;
    }
  }
  return out;
}

cplx one_photon_amplitude(const atoms::AtomModel& atom, const PathwaySpec& pathway, double epsilon, int l, int m) {
  if (pathway.steps.size() != 1) throw std::invalid_argument("one_photon_amplitude needs a one-step pathway");
  if (epsilon <= 0.0) return 0.0;
  const auto& photon = pathway.steps[0];
  const auto& g = atom.ground;
  const int q = field::spherical_index(photon.polarization);
  const double angular_factor = angular::dipole_angular(l, m, q, g.l, g.m);
  if (angular_factor == 0.0) return 0.0;
  const double radial = atom.continuum_radial(epsilon, l, g);
  const cplx field_factor = field::spectral_amplitude(photon, epsilon + atom.ionization_potential - g.energy);
  return kOrderFactor * field_factor * angular_factor * radial * continuum_phase_factor(atom, l);
}

cplx two_photon_amplitude(const atoms::AtomModel& atom, const PathwaySpec& pathway, double epsilon, int l, int m) {
  if (pathway.steps.size() != 2) throw std::invalid_argument("two_photon_amplitude needs a two-step pathway");
  pathway.validate(atom);
  if (epsilon <= 0.0) return 0.0;
  const auto& g = atom.ground;
  const auto& n = atom.intermediate(*pathway.intermediate);
  const int q1 = field::spherical_index(pathway.steps[0].polarization);
  const int q2 = field::spherical_index(pathway.steps[1].polarization);
  const int mn = g.m + q1;

  const double a1 = angular::dipole_angular(n.l, mn, q1, g.l, g.m);
  const double a2 = angular::dipole_angular(l, m, q2, n.l, mn);
  if (a1 == 0.0 || a2 == 0.0) return 0.0;

  const double second_photon = epsilon + atom.ionization_potential - n.energy;
  if (second_photon <= 0.0) return 0.0;

  const double r1 = atom.bound_radial(g, n);
  const double r2 = atom.continuum_radial(epsilon, l, n);
  const cplx e1 = field::spectral_amplitude(pathway.steps[0], n.energy - g.energy);
  const cplx e2 = field::spectral_amplitude(pathway.steps[1], second_photon);
  return kOrderFactor * kOrderFactor * e1 * e2 * a1 * a2 * r1 * r2 * continuum_phase_factor(atom, l);
}

cplx pathway_amplitude(const atoms::AtomModel& atom, const PathwaySpec& pathway, double epsilon, int l, int m) {
  switch (pathway.steps.size()) {
    case 1:
      return one_photon_amplitude(atom, pathway, epsilon, l, m);
    case 2:
      return two_photon_amplitude(atom, pathway, epsilon, l, m);
    default:
      throw std::invalid_argument("pathway '" + pathway.name + "' must have one or two photon steps");
  }
}

PhotoelectronWavePacket pathway_wavepacket(const atoms::AtomModel& atom, const PathwaySpec& pathway,
                                           const EnergyGrid& grid, const std::vector<AngularQuantumNumbers>& channels) {
  pathway.validate(atom);
  PhotoelectronWavePacket packet(grid, channels);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t c = 0; c < channels.size(); ++c) {
      packet.amplitudes()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          pathway_amplitude(atom, pathway, grid[i], channels[c].l, channels[c].m);
    }
  }
  return packet;
}

PhotoelectronWavePacket combine_pathways(std::span<const PhotoelectronWavePacket> packets) {
  if (packets.empty()) throw std::invalid_argument("combine_pathways needs at least one pathway");
  PhotoelectronWavePacket total = packets.front();
  for (std::size_t p = 1; p < packets.size(); ++p) total += packets[p];
  return total;
}

PhotoelectronWavePacket combine_pathways(const atoms::AtomModel& atom, std::span<const PathwaySpec> pathways,
                                         const EnergyGrid& grid) {
  if (pathways.empty()) throw std::invalid_argument("combine_pathways needs at least one pathway");
  std::size_t max_steps = 0;
  for (const auto& p : pathways) max_steps = std::max(max_steps, p.steps.size());
  const auto channels = channels_up_to(atom.ground.l + static_cast<int>(max_steps));
  std::vector<PhotoelectronWavePacket> packets;
  packets.reserve(pathways.size());
  for (const auto& p : pathways) packets.push_back(pathway_wavepacket(atom, p, grid, channels));
  return combine_pathways(packets);
}

std::vector<PathwaySpec> apply_pump_probe_delay(std::span<const PathwaySpec> pathways, double tau) {
  std::vector<PathwaySpec> out(pathways.begin(), pathways.end());
  for (auto& p : out)
    for (std::size_t s = 1; s < p.steps.size(); ++s) p.steps[s].center_time += tau;
  return out;
}

double momentum_distribution(const PhotoelectronWavePacket& packet, const angular::Direction& direction) {
  const auto& channels = packet.channels();
  Eigen::VectorXcd y(static_cast<Eigen::Index>(channels.size()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    y(static_cast<Eigen::Index>(c)) = angular::sph_harm(channels[c].l, channels[c].m, direction.theta, direction.phi);
  }
  double total = 0.0;
  const auto& grid = packet.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx psi = packet.amplitudes().row(static_cast<Eigen::Index>(i)) * y;
    total += grid.weight(i) * std::norm(psi);
  }
  return total;
}

}  // namespace photopair::ionization
