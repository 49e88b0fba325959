#pragma once

#include <numbers>

namespace photopair::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double hbar_eV_fs = 0.6582119569;         // eV fs
inline constexpr double planck_eV_fs = 2.0 * pi * hbar_eV_fs;  // eV fs
inline constexpr double hartree_eV = 27.211386245988;
inline constexpr double rydberg_eV = 0.5 * hartree_eV;
inline constexpr double fine_structure_inv = 137.035999084;  // c in atomic units
inline constexpr double atomic_time_fs = 2.4188843265857e-2;

}  // namespace photopair::constants
