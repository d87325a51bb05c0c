#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinphoton/qd_model.hpp"
#include "spinphoton/units.hpp"

namespace spinphoton {

enum class PulseShape { Square, Gaussian };

/// V1..V4 address one optical transition; Raman marks the detuned
/// ground-state rotation pulse, applied as an instantaneous unitary.
enum class PulseTarget { V1, H2, H3, V4, Raman };

inline std::string to_string(PulseTarget t) {
  switch (t) {
    case PulseTarget::V1: return "V1";
    case PulseTarget::H2: return "H2";
    case PulseTarget::H3: return "H3";
    case PulseTarget::V4: return "V4";
    case PulseTarget::Raman: return "raman";
  }
  return "?";
}

inline PulseTarget pulse_target_from_string(const std::string& s) {
  if (s == "V1") return PulseTarget::V1;
  if (s == "H2") return PulseTarget::H2;
  if (s == "H3") return PulseTarget::H3;
  if (s == "V4") return PulseTarget::V4;
  if (s == "raman") return PulseTarget::Raman;
  throw std::invalid_argument("unknown pulse target: " + s);
}

/// One timed laser pulse. Exactly one of `area` (rad) or `rabi` (peak, rad/s)
/// must be given; the area is calibrated on the target transition.
struct Pulse {
  double start = 0.0;     // s, within the frame
  double duration = 0.0;  // s
  PulseShape shape = PulseShape::Square;
  std::optional<double> area;
  std::optional<double> rabi;
  double detuning = 0.0;  // rad/s, relative to the target transition
  PulseTarget target = PulseTarget::V4;
  PhotonPol polarization = PhotonPol::V;

  double end() const { return start + duration; }
};

inline void validate_pulse(const Pulse& p) {
  if (!(p.duration > 0.0)) throw std::invalid_argument("Pulse: duration must be > 0");
  if (p.area.has_value() == p.rabi.has_value())
    throw std::invalid_argument("Pulse: exactly one of area or rabi must be given");
  const double strength = p.area.value_or(p.rabi.value_or(0.0));
  if (!std::isfinite(strength) || !std::isfinite(p.detuning) || !std::isfinite(p.start))
    throw std::invalid_argument("Pulse: parameters must be finite");
}

/// Gaussian envelopes use FWHM = duration/2, truncated to the pulse window.
inline double gaussian_envelope_integral(double duration) {
  const double fwhm = 0.5 * duration;
  const double a = 4.0 * std::numbers::ln2_v<double> / (fwhm * fwhm);
  return std::sqrt(kPi / a) * std::erf(std::sqrt(a) * 0.5 * duration);
}

/// Peak Rabi frequency (rad/s) on the target transition.
inline double peak_rabi(const Pulse& p) {
  if (p.rabi) return *p.rabi;
  if (p.shape == PulseShape::Square) return *p.area / p.duration;
  return *p.area / gaussian_envelope_integral(p.duration);
}

/// Dimensionless envelope in [0, 1]; zero outside the pulse window.
inline double pulse_envelope(const Pulse& p, double t) {
  if (t < p.start || t > p.end()) return 0.0;
  if (p.shape == PulseShape::Square) return 1.0;
  const double fwhm = 0.5 * p.duration;
  const double u = t - (p.start + 0.5 * p.duration);
  return std::exp(-4.0 * std::numbers::ln2_v<double> * u * u / (fwhm * fwhm));
}

enum class SequenceLabel {
  XBasisPositive,
  XBasisAnticorr,
  ZBasisSigmaPlus,
  ZBasisSigmaMinus,
  Custom,
};

inline std::string to_string(SequenceLabel label) {
  switch (label) {
    case SequenceLabel::XBasisPositive: return "x_basis_positive";
    case SequenceLabel::XBasisAnticorr: return "x_basis_anticorr";
    case SequenceLabel::ZBasisSigmaPlus: return "z_basis_sigma_plus";
    case SequenceLabel::ZBasisSigmaMinus: return "z_basis_sigma_minus";
    case SequenceLabel::Custom: return "custom";
  }
  return "?";
}

inline SequenceLabel sequence_label_from_string(const std::string& s) {
  if (s == "x_basis_positive") return SequenceLabel::XBasisPositive;
  if (s == "x_basis_anticorr") return SequenceLabel::XBasisAnticorr;
  if (s == "z_basis_sigma_plus") return SequenceLabel::ZBasisSigmaPlus;
  if (s == "z_basis_sigma_minus") return SequenceLabel::ZBasisSigmaMinus;
  if (s == "custom") return SequenceLabel::Custom;
  throw std::invalid_argument("unknown sequence label: " + s);
}

/// Ordered pulses within one repetition frame. Pulses must not overlap and
/// must fit inside the frame period (Raman pulses are treated as zero-width
/// events at their start time).
struct PulseSequence {
  std::vector<Pulse> pulses;
  double frame_period = 0.0;  // s
  SequenceLabel label = SequenceLabel::Custom;
};

inline void validate_sequence(const PulseSequence& seq) {
  if (!(seq.frame_period > 0.0))
    throw std::invalid_argument("PulseSequence: frame_period must be > 0");
  struct Interval {
    double lo, hi;
  };
  std::vector<Interval> spans;
  for (const auto& p : seq.pulses) {
    validate_pulse(p);
    const double hi = p.target == PulseTarget::Raman ? p.start : p.end();
    if (p.start < 0.0 || hi > seq.frame_period)
      throw std::invalid_argument("PulseSequence: pulse does not fit in the frame");
    if (p.target != PulseTarget::Raman) spans.push_back({p.start, p.end()});
  }
  std::sort(spans.begin(), spans.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].lo < spans[i - 1].hi - 1e-15)
      throw std::invalid_argument("PulseSequence: pulses overlap");
  }
}

}  // namespace spinphoton
