#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "spinphoton/detection.hpp"
#include "spinphoton/drive.hpp"
#include "spinphoton/pulses.hpp"
#include "spinphoton/qd_model.hpp"

namespace spinphoton {

/// The six measurement configurations: four x-basis conditionals and the
/// two circular-basis fringe measurements.
enum class PresetKind {
  XPlusGivenH,
  XMinusGivenH,
  XMinusGivenV,
  XPlusGivenV,
  ZSigmaPlus,
  ZSigmaMinus,
};

inline std::string to_string(PresetKind k) {
  switch (k) {
    case PresetKind::XPlusGivenH: return "x_plus_given_h";
    case PresetKind::XMinusGivenH: return "x_minus_given_h";
    case PresetKind::XMinusGivenV: return "x_minus_given_v";
    case PresetKind::XPlusGivenV: return "x_plus_given_v";
    case PresetKind::ZSigmaPlus: return "z_sigma_plus";
    case PresetKind::ZSigmaMinus: return "z_sigma_minus";
  }
  return "?";
}

inline PresetKind preset_from_string(const std::string& s) {
  if (s == "x_plus_given_h") return PresetKind::XPlusGivenH;
  if (s == "x_minus_given_h") return PresetKind::XMinusGivenH;
  if (s == "x_minus_given_v") return PresetKind::XMinusGivenV;
  if (s == "x_plus_given_v") return PresetKind::XPlusGivenV;
  if (s == "z_sigma_plus") return PresetKind::ZSigmaPlus;
  if (s == "z_sigma_minus") return PresetKind::ZSigmaMinus;
  throw std::invalid_argument("unknown preset: " + s);
}

constexpr bool is_z_basis(PresetKind k) {
  return k == PresetKind::ZSigmaPlus || k == PresetKind::ZSigmaMinus;
}
constexpr bool is_anticorrelation(PresetKind k) {
  return k == PresetKind::XMinusGivenH || k == PresetKind::XPlusGivenV;
}

/// Frame layout (picoseconds). The excitation pulse opens the frame, the
/// 4 ns pump at the end re-initializes the spin and reads out the current
/// frame; anticorrelation runs add a probe pulse between the two.
struct TimingConfig {
  double frame_period_ps = 1e12 / 76e6;
  double excitation_start_ps = 0.0;
  double excitation_duration_ps = 250.0;
  double raman_delay_ps = 900.0;  // after excitation pulse end
  double probe_start_ps = 1400.0;
  double probe_duration_ps = 250.0;
  double pump_start_ps = 8500.0;
  double pump_duration_ps = 4000.0;
  double pump_rabi_ghz = 1.0;  // Omega/2pi on the target transition
  double window_pad_ps = 10.0;
  double entangled_window_end_x_ps = 1350.0;
  double probe_window_end_ps = 2900.0;
};

struct MeasurementWindows {
  double entangled_lo = 0.0, entangled_hi = 0.0;  // s
  double readout_lo = 0.0, readout_hi = 0.0;      // s
  std::optional<double> raman_time;               // s
  std::optional<Channel> entangled_channel;       // restrict entangled tags
};

/// Everything needed to simulate one measurement.
struct ExperimentPlan {
  std::string name;
  PresetKind kind = PresetKind::XPlusGivenH;
  QdModel model;
  PulseSequence sequence;
  AnalyzerSetting analyzer;
  DetectorModel detector_a, detector_b;
  MeasurementWindows windows;
  PhysicsOptions physics;
  bool ideal_initialization = true;
  SpinState init_target = SpinState::XMinus;
  bool importance_sampling = true;
};

struct DetectorDefaults {
  double standard_efficiency = 4e-5;
  double standard_jitter_fwhm_ps = 350.0;
  double fast_efficiency = 4e-6;
  double fast_jitter_fwhm_ps = 48.0;
  double dark_rate_hz = 0.0;
};

inline ExperimentPlan make_plan(PresetKind kind, const QdModel& model,
                                const TimingConfig& timing = {},
                                const DetectorDefaults& det = {},
                                double leak_probability = 0.0,
                                const PhysicsOptions& physics = {},
                                bool ideal_initialization = true,
                                bool importance_sampling = true) {
  ExperimentPlan plan;
  plan.name = to_string(kind);
  plan.kind = kind;
  plan.model = model;
  plan.physics = physics;
  plan.ideal_initialization = ideal_initialization;
  plan.importance_sampling = importance_sampling;

  // V-polarized lasers drive V1/V4 for the H-axis measurements; H-polarized
  // lasers drive H2/H3 for the V-axis ones; circular drives for the z basis,
  // polarized orthogonally to the detection axis.
  const bool v_axis = kind == PresetKind::XMinusGivenV || kind == PresetKind::XPlusGivenV;
  const bool z = is_z_basis(kind);
  const PulseTarget pump_target = v_axis ? PulseTarget::H3 : PulseTarget::V1;
  const PulseTarget excite_target = v_axis ? PulseTarget::H2 : PulseTarget::V4;
  PhotonPol laser_pol = v_axis ? PhotonPol::H : PhotonPol::V;
  if (kind == PresetKind::ZSigmaPlus) laser_pol = PhotonPol::SigmaMinus;
  if (kind == PresetKind::ZSigmaMinus) laser_pol = PhotonPol::SigmaPlus;
  plan.init_target = v_axis ? SpinState::XPlus : SpinState::XMinus;

  switch (kind) {
    case PresetKind::XPlusGivenH: plan.analyzer.axis = PhotonPol::H; break;
    case PresetKind::XMinusGivenH: plan.analyzer.axis = PhotonPol::H; break;
    case PresetKind::XMinusGivenV: plan.analyzer.axis = PhotonPol::V; break;
    case PresetKind::XPlusGivenV: plan.analyzer.axis = PhotonPol::V; break;
    case PresetKind::ZSigmaPlus: plan.analyzer.axis = PhotonPol::SigmaPlus; break;
    case PresetKind::ZSigmaMinus: plan.analyzer.axis = PhotonPol::SigmaMinus; break;
  }
  plan.analyzer.leak_probability = leak_probability;
  validate_analyzer(plan.analyzer);

  PulseSequence seq;
  seq.frame_period = ps_to_s(timing.frame_period_ps);
  seq.label = z ? (kind == PresetKind::ZSigmaPlus ? SequenceLabel::ZBasisSigmaPlus
                                                  : SequenceLabel::ZBasisSigmaMinus)
                : (is_anticorrelation(kind) ? SequenceLabel::XBasisAnticorr
                                            : SequenceLabel::XBasisPositive);

  Pulse excite;
  excite.start = ps_to_s(timing.excitation_start_ps);
  excite.duration = ps_to_s(timing.excitation_duration_ps);
  excite.area = kPi;
  excite.target = excite_target;
  excite.polarization = laser_pol;
  seq.pulses.push_back(excite);

  const double excite_end_ps = timing.excitation_start_ps + timing.excitation_duration_ps;
  if (z) {
    Pulse raman;
    raman.start = ps_to_s(excite_end_ps + timing.raman_delay_ps);
    raman.duration = ps_to_s(2.0);
    raman.area = kPi / 2.0;
    raman.target = PulseTarget::Raman;
    // R_{sigma-+} follows the excitation laser handedness.
    raman.polarization = laser_pol;
    seq.pulses.push_back(raman);
    plan.windows.raman_time = raman.start;
  }

  if (is_anticorrelation(kind)) {
    Pulse probe;
    probe.start = ps_to_s(timing.probe_start_ps);
    probe.duration = ps_to_s(timing.probe_duration_ps);
    probe.area = kPi;
    probe.target = excite_target;
    probe.polarization = laser_pol;
    seq.pulses.push_back(probe);
  }

  Pulse pump;
  pump.start = ps_to_s(timing.pump_start_ps);
  pump.duration = ps_to_s(timing.pump_duration_ps);
  pump.rabi = ghz_to_angular(timing.pump_rabi_ghz);
  pump.target = pump_target;
  pump.polarization = laser_pol;
  seq.pulses.push_back(pump);

  validate_sequence(seq);
  plan.sequence = seq;

  plan.windows.entangled_lo = ps_to_s(excite_end_ps + timing.window_pad_ps);
  if (z) {
    plan.windows.entangled_hi =
        ps_to_s(excite_end_ps + timing.raman_delay_ps + 50.0);
  } else {
    plan.windows.entangled_hi = ps_to_s(timing.entangled_window_end_x_ps);
  }
  if (is_anticorrelation(kind)) {
    plan.windows.readout_lo = ps_to_s(timing.probe_start_ps + timing.window_pad_ps);
    plan.windows.readout_hi = ps_to_s(timing.probe_window_end_ps);
  } else {
    plan.windows.readout_lo = ps_to_s(timing.pump_start_ps);
    plan.windows.readout_hi = ps_to_s(timing.pump_start_ps + timing.pump_duration_ps);
  }

  DetectorModel standard{ps_to_s(det.standard_jitter_fwhm_ps), det.standard_efficiency,
                         det.dark_rate_hz, DetectorLabel::Standard};
  DetectorModel fast{ps_to_s(det.fast_jitter_fwhm_ps), det.fast_efficiency,
                     det.dark_rate_hz, DetectorLabel::FastTiming};
  plan.detector_b = standard;
  if (z) {
    plan.detector_a = fast;
    plan.windows.entangled_channel = Channel::A;
  } else {
    plan.detector_a = standard;
  }
  validate_detector(plan.detector_a);
  validate_detector(plan.detector_b);
  return plan;
}

}  // namespace spinphoton
