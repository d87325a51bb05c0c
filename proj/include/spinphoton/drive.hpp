#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "spinphoton/operators.hpp"
#include "spinphoton/pulses.hpp"
#include "spinphoton/qd_model.hpp"

namespace spinphoton {

/// Physics switches shared by the integrator and the trajectory sampler.
struct PhysicsOptions {
  /// When set, each pulse couples to every dipole-allowed transition with its
  /// polarization overlap and physical detuning. When clear, only the target
  /// transition is driven at the calibrated strength.
  bool off_resonant_coupling = false;
  /// Phenomenological ground-state pure-dephasing rate (1/s).
  double dephasing_rate = 0.0;
};

/// One raising term (Omega/2) kappa e^{-i w_rel t} |T><g| of a drive.
struct DriveCoupling {
  int ground;       // level index
  int trion;        // level index
  Complex kappa;    // relative coupling, |kappa| = 1 on the target
};

/// Drive couplings of one optical pulse. omega_rel is the laser frequency
/// relative to the rotating-frame carrier.
struct PulseDrive {
  double omega_rel = 0.0;
  double peak_rabi = 0.0;
  std::vector<DriveCoupling> couplings;
  const Pulse* pulse = nullptr;
  int pulse_index = -1;
};

/// Raising coupling of a polarized field to one transition: the conjugated
/// emission dipole contracted with the laser Jones vector.
inline Complex transition_coupling(Transition t, PhotonPol laser_pol) {
  const auto info = transition_info(t);
  const auto branch = decay_branch(info.trion, info.dipole_pol);
  const Eigen::Vector2cd e = polarization_vector(laser_pol);
  const int pol_idx = info.dipole_pol == PhotonPol::H ? 0 : 1;
  return std::conj(branch.amplitude) * e[pol_idx];
}

inline PulseDrive build_pulse_drive(const QdModel& model, const Pulse& p, int index,
                                    const PhysicsOptions& phys) {
  PulseDrive drive;
  drive.pulse = &p;
  drive.pulse_index = index;
  drive.peak_rabi = peak_rabi(p);
  const Transition target = [&] {
    switch (p.target) {
      case PulseTarget::V1: return Transition::V1;
      case PulseTarget::H2: return Transition::H2;
      case PulseTarget::H3: return Transition::H3;
      case PulseTarget::V4: return Transition::V4;
      default: throw std::invalid_argument("build_pulse_drive: not an optical pulse");
    }
  }();
  drive.omega_rel = transition_frequency(model, target) + p.detuning;

  const auto add = [&](Transition t, Complex kappa) {
    const auto info = transition_info(t);
    drive.couplings.push_back(
        {level_index(info.ground), level_index(info.trion), kappa});
  };

  if (!phys.off_resonant_coupling) {
    const Complex k = transition_coupling(target, p.polarization);
    // Idealized drive: the target transition only, at full strength.
    add(target, std::abs(k) > 0.0 ? k / std::abs(k) : Complex{1.0, 0.0});
    return drive;
  }

  const Complex k_target = transition_coupling(target, p.polarization);
  const double norm = std::abs(k_target);
  if (norm < 1e-12)
    throw std::invalid_argument(
        "build_pulse_drive: laser polarization does not couple to the target");
  for (Transition t : {Transition::V1, Transition::H2, Transition::H3, Transition::V4}) {
    const Complex k = transition_coupling(t, p.polarization) / norm;
    if (std::abs(k) > 1e-12) add(t, k);
  }
  return drive;
}

/// All optical drives of a sequence (Raman pulses are handled separately).
inline std::vector<PulseDrive> build_drives(const QdModel& model,
                                            const PulseSequence& seq,
                                            const PhysicsOptions& phys) {
  std::vector<PulseDrive> drives;
  for (std::size_t i = 0; i < seq.pulses.size(); ++i) {
    if (seq.pulses[i].target == PulseTarget::Raman) continue;
    drives.push_back(build_pulse_drive(model, seq.pulses[i],
                                       static_cast<int>(i), phys));
  }
  return drives;
}

/// Collapse channels: four radiative (per trion, per polarization) plus an
/// optional ground-state dephasing channel.
struct CollapseChannel {
  Eigen::Matrix4cd op;
  bool radiative = false;
  TrionState source = TrionState::TxMinus;
};

inline std::vector<CollapseChannel> build_collapse_channels(const QdModel& model,
                                                            const PhysicsOptions& phys) {
  std::vector<CollapseChannel> channels;
  for (TrionState t : {TrionState::TxMinus, TrionState::TxPlus}) {
    for (PhotonPol pol : {PhotonPol::H, PhotonPol::V}) {
      channels.push_back({collapse_operator(model, t, pol), true, t});
    }
  }
  if (phys.dephasing_rate > 0.0) {
    Eigen::Matrix4cd z = Eigen::Matrix4cd::Zero();
    z(kIdxXPlus, kIdxXPlus) = std::sqrt(0.5 * phys.dephasing_rate);
    z(kIdxXMinus, kIdxXMinus) = -std::sqrt(0.5 * phys.dephasing_rate);
    channels.push_back({z, false, TrionState::TxMinus});
  }
  return channels;
}

/// Static rotating-frame Hamiltonian (the level energies).
inline Eigen::Matrix4cd static_hamiltonian(const QdModel& model) {
  return level_energies(model).cast<Complex>().asDiagonal();
}

/// Full Hamiltonian at time t within the frame.
inline Eigen::Matrix4cd hamiltonian_at(const QdModel& model,
                                       const std::vector<PulseDrive>& drives,
                                       double t) {
  Eigen::Matrix4cd h = static_hamiltonian(model);
  for (const auto& d : drives) {
    const double env = pulse_envelope(*d.pulse, t);
    if (env == 0.0) continue;
    const Complex phase = std::polar(0.5 * d.peak_rabi * env, -d.omega_rel * t);
    for (const auto& c : d.couplings) {
      const Complex term = phase * c.kappa;
      h(c.trion, c.ground) += term;
      h(c.ground, c.trion) += std::conj(term);
    }
  }
  return h;
}

/// Maximum step allowed by the integrator's step rule.
inline double max_step(const QdModel& model) {
  const double by_gamma = 1.0 / (10.0 * model.gamma);
  if (model.delta_e <= 0.0) return by_gamma;
  return std::min(by_gamma, 0.02 * kTwoPi / model.delta_e);
}

/// 4x4 unitary applying a ground-state rotation, identity on the trions.
inline Eigen::Matrix4cd embed_spin_rotation(const Eigen::Matrix2cd& r) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  u.block<2, 2>(0, 0) = r;
  return u;
}

/// The rotation unitary a Raman pulse applies, from its polarization label.
inline Eigen::Matrix2cd raman_rotation(const Pulse& p) {
  if (p.target != PulseTarget::Raman)
    throw std::invalid_argument("raman_rotation: not a Raman pulse");
  const RotationAxis axis = p.polarization == PhotonPol::SigmaMinus
                                ? RotationAxis::SigmaMinus
                                : RotationAxis::SigmaPlus;
  const double angle = p.area.value_or(0.0);
  return rotation_operator(axis, angle).matrix();
}

}  // namespace spinphoton
