#include "photopair/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "photopair/constants.hpp"

namespace photopair::field {

using constants::hbar_eV_fs;
using constants::pi;

int spherical_index(Polarization p) {
  switch (p) {
    case Polarization::LeftCircular:
      return 1;
    case Polarization::RightCircular:
      return -1;
    case Polarization::LinearZ:
      return 0;
  }
  return 0;
}

std::string to_string(Polarization p) {
  switch (p) {
    case Polarization::LeftCircular:
      return "left";
    case Polarization::RightCircular:
      return "right";
    case Polarization::LinearZ:
      return "linear-z";
  }
  return "linear-z";
}

Polarization polarization_from_string(const std::string& s) {
  if (s == "left" || s == "left-circular") return Polarization::LeftCircular;
  if (s == "right" || s == "right-circular") return Polarization::RightCircular;
  if (s == "linear-z" || s == "z") return Polarization::LinearZ;
  throw std::invalid_argument("unknown polarization '" + s + "' (expected left, right or linear-z)");
}

void FrequencyComponent::validate() const {
  if (!(omega > 0.0)) throw std::invalid_argument("component '" + label + "': omega must be > 0");
  if (!(fwhm > 0.0)) throw std::invalid_argument("component '" + label + "': fwhm must be > 0");
  if (!std::isfinite(amplitude) || !std::isfinite(phase) || !std::isfinite(center_time)) {
    throw std::invalid_argument("component '" + label + "': non-finite parameter");
  }
}

double FrequencyComponent::reduced_phase() const {
  double r = std::fmod(phase, 2.0 * pi);
  if (r < 0.0) r += 2.0 * pi;
  return r;
}

double FrequencyComponent::field_sigma_t() const {
  // intensity exp(-4 ln2 t^2/T^2) = field^2  ->  field = exp(-t^2 / (2 sigma^2)), sigma^2 = T^2 / (4 ln2)
  return fwhm / (2.0 * std::sqrt(std::numbers::ln2));
}

double FrequencyComponent::spectral_sigma() const { return hbar_eV_fs / field_sigma_t(); }

double FrequencyComponent::spectral_fwhm() const {
  return 2.0 * std::sqrt(std::numbers::ln2) * spectral_sigma();
}

FieldSpec::FieldSpec(std::vector<FrequencyComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("field needs at least one frequency component");
  std::set<std::string> seen;
  for (const auto& c : components_) {
    c.validate();
    if (!seen.insert(c.label).second) throw std::invalid_argument("duplicate component label '" + c.label + "'");
  }
}

const FrequencyComponent& FieldSpec::component(const std::string& label) const {
  auto it = std::find_if(components_.begin(), components_.end(), [&](const auto& c) { return c.label == label; });
  if (it == components_.end()) throw std::invalid_argument("no frequency component labelled '" + label + "'");
  return *it;
}

FrequencyComponent& FieldSpec::component(const std::string& label) {
  return const_cast<FrequencyComponent&>(std::as_const(*this).component(label));
}

bool FieldSpec::contains(const std::string& label) const {
  return std::any_of(components_.begin(), components_.end(), [&](const auto& c) { return c.label == label; });
}

double envelope(const FrequencyComponent& c, double t) {
  const double dt = t - c.center_time;
  return std::exp(-4.0 * std::numbers::ln2 * dt * dt / (c.fwhm * c.fwhm));
}

std::complex<double> field_amplitude(const FrequencyComponent& c, double t) {
  const double carrier = -c.omega * (t - c.center_time) / hbar_eV_fs + c.phase;
  return c.amplitude * std::sqrt(envelope(c, t)) * std::polar(1.0, carrier);
}

std::complex<double> spectral_amplitude(const FrequencyComponent& c, double omega_eval) {
  const double sigma_t = c.field_sigma_t();
  const double sigma_w = c.spectral_sigma();
  const double dw = omega_eval - c.omega;
  const double magnitude = c.amplitude * std::sqrt(2.0 * pi) * sigma_t * std::exp(-dw * dw / (2.0 * sigma_w * sigma_w));
  return magnitude * std::polar(1.0, c.phase) * std::polar(1.0, omega_eval * c.center_time / hbar_eV_fs);
}

namespace presets {

FrequencyComponent component(const std::string& label) {
  FrequencyComponent c;
  c.label = label;
  c.fwhm = pulse_fwhm;
  if (label == "w0") {
    c.omega = omega0;
    c.polarization = Polarization::LeftCircular;
  } else if (label == "w1") {
    c.omega = omega1;
    c.polarization = Polarization::LeftCircular;
  } else if (label == "w2") {
    c.omega = omega2;
    c.polarization = Polarization::LinearZ;
  } else if (label == "w3") {
    c.omega = omega3;
    c.polarization = Polarization::LeftCircular;
  } else if (label == "w4") {
    c.omega = omega4;
    c.polarization = Polarization::LinearZ;
  } else {
    throw std::invalid_argument("no preset frequency component '" + label + "'");
  }
  return c;
}

FieldSpec two_pathway_even() {
  return FieldSpec({component("w1"), component("w2"), component("w3"), component("w4")});
}

FieldSpec one_plus_two_photon() { return FieldSpec({component("w0"), component("w3"), component("w4")}); }

}  // namespace presets

}  // namespace photopair::field
