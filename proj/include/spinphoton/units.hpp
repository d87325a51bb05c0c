#pragma once

#include <numbers>

namespace spinphoton {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FWHM of a Gaussian = 2 sqrt(2 ln 2) sigma.
inline constexpr double kFwhmToSigma = 0.42466090014400953;

inline constexpr double kPicosecond = 1e-12;
inline constexpr double kNanosecond = 1e-9;

/// Frequency in GHz -> angular frequency in rad/s.
constexpr double ghz_to_angular(double ghz) { return kTwoPi * 1e9 * ghz; }

/// Angular frequency in rad/s -> frequency in GHz.
constexpr double angular_to_ghz(double w) { return w / (kTwoPi * 1e9); }

constexpr double ps_to_s(double ps) { return ps * kPicosecond; }
constexpr double s_to_ps(double s) { return s / kPicosecond; }

}  // namespace spinphoton
