#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "spinphoton/operators.hpp"
#include "spinphoton/rng.hpp"
#include "spinphoton/trajectory.hpp"
#include "spinphoton/units.hpp"

namespace spinphoton {

enum class DetectorLabel { Standard, FastTiming };

/// Single-photon detector: Bernoulli efficiency, Gaussian timing jitter
/// (quoted as FWHM), optional dark-count rate.
struct DetectorModel {
  double jitter_fwhm = 0.0;  // s
  double efficiency = 1.0;
  double dark_rate = 0.0;  // 1/s
  DetectorLabel label = DetectorLabel::Standard;
};

inline void validate_detector(const DetectorModel& d) {
  if (!(d.efficiency >= 0.0 && d.efficiency <= 1.0))
    throw std::invalid_argument("DetectorModel: efficiency must be in [0, 1]");
  if (d.jitter_fwhm < 0.0)
    throw std::invalid_argument("DetectorModel: jitter_fwhm must be >= 0");
  if (d.dark_rate < 0.0)
    throw std::invalid_argument("DetectorModel: dark_rate must be >= 0");
}

/// Polarization analyzer in front of the HBT splitter. A disengaged axis
/// (nullopt) passes every photon. leak_probability is the per-frame chance
/// of an excitation leak-through event inside the analysis window.
struct AnalyzerSetting {
  std::optional<PhotonPol> axis;
  double leak_probability = 0.0;
};

inline void validate_analyzer(const AnalyzerSetting& a) {
  if (!(a.leak_probability >= 0.0 && a.leak_probability <= 0.05))
    throw std::invalid_argument("AnalyzerSetting: leak_probability must be in [0, 0.05]");
}

enum class TagKind { Signal, Leak, Dark };

inline std::string to_string(TagKind k) {
  switch (k) {
    case TagKind::Signal: return "signal";
    case TagKind::Leak: return "leak";
    case TagKind::Dark: return "dark";
  }
  return "?";
}

/// One detector click. kind is simulation ground truth and is stripped on
/// blind export.
struct TimeTag {
  std::int64_t frame_index = 0;
  Channel channel = Channel::A;
  double time_in_frame = 0.0;  // s
  double weight = 1.0;
  TagKind kind = TagKind::Signal;
};

struct PolarizationOutcome {
  bool passed = false;
  double pass_probability = 0.0;
  StateVector spin = basis_ket(BasisTag::SpinX, 0);
};

inline PhotonPol orthogonal_axis(PhotonPol pol) {
  switch (pol) {
    case PhotonPol::H: return PhotonPol::V;
    case PhotonPol::V: return PhotonPol::H;
    case PhotonPol::SigmaPlus: return PhotonPol::SigmaMinus;
    case PhotonPol::SigmaMinus: return PhotonPol::SigmaPlus;
  }
  return PhotonPol::H;
}

namespace detail {
/// Unnormalized spin amplitudes conditioned on the photon projecting onto
/// `axis`, using the record's selection-rule spin pairing.
inline Eigen::Vector2cd conditioned_spin(const PhotonRecord& photon, PhotonPol axis) {
  const Eigen::Vector2cd e = polarization_vector(axis);
  Eigen::Vector2cd spin = Eigen::Vector2cd::Zero();
  const auto h_branch = decay_branch(photon.source, PhotonPol::H);
  const auto v_branch = decay_branch(photon.source, PhotonPol::V);
  spin[level_index(h_branch.final_spin)] += std::conj(e[0]) * photon.amplitude_h;
  spin[level_index(v_branch.final_spin)] += std::conj(e[1]) * photon.amplitude_v;
  return spin;
}
}  // namespace detail

/// Projects a photon onto the analyzer axis. Returns the sampled outcome and
/// the spin state conditioned on it (the orthogonal port on failure).
inline PolarizationOutcome analyze_polarization(const PhotonRecord& photon,
                                                const AnalyzerSetting& setting,
                                                Rng& rng) {
  const double total =
      std::norm(photon.amplitude_h) + std::norm(photon.amplitude_v);
  if (total < 1e-24)
    throw std::invalid_argument("analyze_polarization: zero-norm photon");

  if (!setting.axis) {
    // Pass-through: no projection; collapse in the H/V basis.
    const double ph = std::norm(photon.amplitude_h) / total;
    const PhotonPol pol = rng.uniform() < ph ? PhotonPol::H : PhotonPol::V;
    const auto branch = decay_branch(photon.source, pol);
    PolarizationOutcome out;
    out.passed = true;
    out.pass_probability = 1.0;
    out.spin = basis_ket(BasisTag::SpinX, level_index(branch.final_spin));
    return out;
  }

  const Eigen::Vector2cd pass = detail::conditioned_spin(photon, *setting.axis);
  const double p_pass = pass.squaredNorm() / total;
  PolarizationOutcome out;
  out.pass_probability = p_pass;
  out.passed = rng.uniform() < p_pass;
  if (out.passed) {
    out.spin = StateVector(pass.normalized(), BasisTag::SpinX);
  } else {
    const Eigen::Vector2cd fail =
        detail::conditioned_spin(photon, orthogonal_axis(*setting.axis));
    out.spin = StateVector(fail.normalized(), BasisTag::SpinX);
  }
  return out;
}

/// 50-50 fiber splitter feeding the two detectors.
inline Channel hbt_route(Rng& rng) { return rng.bernoulli(0.5) ? Channel::A : Channel::B; }

struct Detection {
  double time = 0.0;
  double weight = 1.0;
};

/// Detector response for one arriving photon. Plain mode thins by the
/// efficiency; importance mode records every photon with weight = efficiency.
inline std::optional<Detection> detect(double true_time, const DetectorModel& detector,
                                       Rng& rng, bool importance_sampling = false) {
  double weight = 1.0;
  if (importance_sampling) {
    weight = detector.efficiency;
  } else if (!rng.bernoulli(detector.efficiency)) {
    return std::nullopt;
  }
  double t = true_time;
  if (detector.jitter_fwhm > 0.0)
    t += detector.jitter_fwhm * kFwhmToSigma * rng.normal();
  return Detection{t, weight};
}

}  // namespace spinphoton
