#pragma once

// Classical multicolor ionizing field. Each frequency component is a Gaussian
// pulse with its own polarization, phase and center time. The field couples only
// to the source atom; the target atom never sees it.

#include <complex>
#include <string>
#include <vector>

namespace photopair::field {

enum class Polarization { LeftCircular, RightCircular, LinearZ };

/// Spherical tensor index of the polarization: left +1, right -1, linear-z 0.
int spherical_index(Polarization p);
std::string to_string(Polarization p);
Polarization polarization_from_string(const std::string& s);  // "left", "right", "linear-z"

struct FrequencyComponent {
  std::string label;
  double omega = 0.0;      // photon energy, eV
  double amplitude = 1.0;  // relative peak field strength
  Polarization polarization = Polarization::LinearZ;
  double phase = 0.0;        // rad
  double center_time = 0.0;  // fs
  double fwhm = 20.0;        // intensity FWHM, fs

  /// Throws std::invalid_argument unless omega > 0 and fwhm > 0.
  void validate() const;

  /// Phase reduced to [0, 2pi).
  double reduced_phase() const;

  /// Width sigma_t of the Gaussian field envelope exp(-t^2 / (2 sigma_t^2)).
  double field_sigma_t() const;
  /// Spectral width sigma_w (eV) of the field amplitude exp(-dw^2 / (2 sigma_w^2)).
  double spectral_sigma() const;
  /// FWHM (eV) of the spectral intensity |E(w)|^2.
  double spectral_fwhm() const;
};

/// Ordered, non-empty list of components with unique labels.
class FieldSpec {
 public:
  FieldSpec() = default;
  explicit FieldSpec(std::vector<FrequencyComponent> components);

  const std::vector<FrequencyComponent>& components() const noexcept { return components_; }
  const FrequencyComponent& component(const std::string& label) const;
  FrequencyComponent& component(const std::string& label);
  bool contains(const std::string& label) const;

 private:
  std::vector<FrequencyComponent> components_;
};

/// Normalized intensity envelope exp(-4 ln2 (t - t_c)^2 / fwhm^2); 1 at the peak.
double envelope(const FrequencyComponent& c, double t);

/// Positive-frequency field E+(t) = A sqrt(envelope) exp(-i w (t - t_c)/hbar + i phase).
std::complex<double> field_amplitude(const FrequencyComponent& c, double t);

/// Fourier transform  int dt E+(t) exp(i w t / hbar)  of field_amplitude, evaluated at
/// photon energy omega_eval (eV). Units: amplitude x fs.
std::complex<double> spectral_amplitude(const FrequencyComponent& c, double omega_eval);

/// Named presets. Components w0..w4 carry the photon energies of the coherent
/// control scheme; w0 is the single-photon partner of w3+w4.
namespace presets {
inline constexpr double omega1 = 4.554;   // eV, resonant with 4s5p 1P
inline constexpr double omega2 = 17.324;  // eV
inline constexpr double omega3 = 5.167;   // eV, resonant with 4s6p 1P
inline constexpr double omega4 = 16.701;  // eV
inline constexpr double omega0 = omega3 + omega4;
inline constexpr double pulse_fwhm = 20.0;  // fs

FrequencyComponent component(const std::string& label);  // one of w0..w4
FieldSpec two_pathway_even();                             // w1, w2, w3, w4
FieldSpec one_plus_two_photon();                          // w0, w3, w4
}  // namespace presets

}  // namespace photopair::field
