#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "spinphoton/bases.hpp"

namespace spinphoton {

using Complex = std::complex<double>;

/// Static parameters of the four-level charged-dot system.
///
/// delta_e and delta_h are angular frequencies (rad/s) of the electron
/// (ground) and hole (trion) Zeeman splittings; gamma is the trion
/// spontaneous-emission rate (1/s). b_field is informational only:
/// delta_e is the authoritative dynamical input.
struct QdModel {
  double delta_e = 0.0;
  double delta_h = 0.0;
  double gamma = 0.0;
  double b_field = 0.0;
};

inline QdModel build_qd_model(double delta_e, double delta_h, double gamma,
                              double b_field = 0.0) {
  if (!(std::isfinite(delta_e) && std::isfinite(delta_h) && std::isfinite(gamma)))
    throw std::invalid_argument("build_qd_model: parameters must be finite");
  if (gamma <= 0.0) throw std::invalid_argument("build_qd_model: gamma must be > 0");
  if (delta_e < 0.0) throw std::invalid_argument("build_qd_model: delta_e must be >= 0");
  if (delta_h < 0.0) throw std::invalid_argument("build_qd_model: delta_h must be >= 0");
  return QdModel{delta_e, delta_h, gamma, b_field};
}

/// Level energies in the frame rotating at the optical carrier, basis
/// {x+, x-, Tx-, Tx+}: diag(+De/2, -De/2, +Dh/2, -Dh/2).
inline Eigen::Vector4d level_energies(const QdModel& m) {
  return {0.5 * m.delta_e, -0.5 * m.delta_e, 0.5 * m.delta_h, -0.5 * m.delta_h};
}

/// The four optical transitions, labeled in order of increasing energy.
/// V1 = x+ <-> Tx+, H2 = x+ <-> Tx-, H3 = x- <-> Tx+, V4 = x- <-> Tx-.
enum class Transition { V1, H2, H3, V4 };

struct TransitionInfo {
  SpinState ground;
  TrionState trion;
  PhotonPol dipole_pol;  // H or V
};

constexpr TransitionInfo transition_info(Transition t) {
  switch (t) {
    case Transition::V1: return {SpinState::XPlus, TrionState::TxPlus, PhotonPol::V};
    case Transition::H2: return {SpinState::XPlus, TrionState::TxMinus, PhotonPol::H};
    case Transition::H3: return {SpinState::XMinus, TrionState::TxPlus, PhotonPol::H};
    case Transition::V4: return {SpinState::XMinus, TrionState::TxMinus, PhotonPol::V};
  }
  return {SpinState::XPlus, TrionState::TxPlus, PhotonPol::V};
}

/// Transition angular frequency relative to the rotating-frame carrier.
inline double transition_frequency(const QdModel& m, Transition t) {
  const auto info = transition_info(t);
  const auto e = level_energies(m);
  return e[level_index(info.trion)] - e[level_index(info.ground)];
}

/// Emission selection rules. Each trion decays through two polarization
/// channels at gamma/2 each; the V dipole carries a relative -i.
///   Tx- -> x+ (H, amp 1),  Tx- -> x- (V, amp -i)
///   Tx+ -> x- (H, amp 1),  Tx+ -> x+ (V, amp -i)
struct DecayBranch {
  SpinState final_spin;
  Complex amplitude;  // unit modulus
};

inline DecayBranch decay_branch(TrionState trion, PhotonPol pol) {
  const Complex minus_i{0.0, -1.0};
  if (trion == TrionState::TxMinus) {
    if (pol == PhotonPol::H) return {SpinState::XPlus, Complex{1.0, 0.0}};
    if (pol == PhotonPol::V) return {SpinState::XMinus, minus_i};
  } else {
    if (pol == PhotonPol::H) return {SpinState::XMinus, Complex{1.0, 0.0}};
    if (pol == PhotonPol::V) return {SpinState::XPlus, minus_i};
  }
  throw std::invalid_argument("decay_branch: polarization must be H or V");
}

/// Collapse operator for one (trion, polarization) radiative channel.
/// The four channels are kept separate: the two trions emit at optical
/// frequencies split by well over the linewidth, so their decay paths are
/// treated as distinguishable by the environment.
inline Eigen::Matrix4cd collapse_operator(const QdModel& m, TrionState trion,
                                          PhotonPol pol) {
  Eigen::Matrix4cd c = Eigen::Matrix4cd::Zero();
  const auto branch = decay_branch(trion, pol);
  c(level_index(branch.final_spin), level_index(trion)) =
      std::sqrt(0.5 * m.gamma) * branch.amplitude;
  return c;
}

}  // namespace spinphoton
