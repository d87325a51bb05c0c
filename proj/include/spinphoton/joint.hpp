#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "spinphoton/operators.hpp"
#include "spinphoton/qd_model.hpp"
#include "spinphoton/states.hpp"

namespace spinphoton {

/// Joint photon (x) spin state a time t after emission from Tx-:
/// (|H>|x+> - i e^{i De t} |V>|x->)/sqrt(2). At t = 0 this is the canonical
/// entangled state; the phase wraps with the ground-state precession period.
///
/// detection_time_resolution is accepted for interface completeness; timing
/// uncertainty is applied by the detection layer, not here.
inline StateVector conditional_joint_state(const QdModel& model, double emission_time,
                                           double detection_time_resolution = 0.0) {
  if (detection_time_resolution < 0.0)
    throw std::invalid_argument("conditional_joint_state: resolution must be >= 0");
  const double r = 1.0 / std::sqrt(2.0);
  const Complex v_phase =
      Complex{0.0, -1.0} * std::polar(1.0, model.delta_e * emission_time);
  Eigen::Vector4cd amps{Complex{r, 0.0}, 0.0, 0.0, r * v_phase};
  return StateVector(amps, BasisTag::JointLinearX);
}

/// Isometry mapping a trion level into the joint photon (x) spin space by the
/// selection rules: |Tx-> -> (|H x+> - i |V x->)/sqrt(2) and
/// |Tx+> -> (|H x-> - i |V x+>)/sqrt(2).
inline Eigen::Matrix<Complex, 4, 4> emission_isometry(TrionState source) {
  Eigen::Matrix<Complex, 4, 4> j = Eigen::Matrix<Complex, 4, 4>::Zero();
  const double r = 1.0 / std::sqrt(2.0);
  const int col = level_index(source);
  for (PhotonPol pol : {PhotonPol::H, PhotonPol::V}) {
    const auto branch = decay_branch(source, pol);
    const int pol_block = pol == PhotonPol::H ? 0 : 2;
    j(pol_block + level_index(branch.final_spin), col) = r * branch.amplitude;
  }
  return j;
}

/// Joint photon (x) spin density matrix conditioned on a fresh emission from
/// the four-level state rho. The two trions radiate at well-separated optical
/// frequencies, so their decay paths add incoherently.
inline DensityMatrix emission_conditioned_joint(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix4cd joint = Eigen::Matrix4cd::Zero();
  for (TrionState t : {TrionState::TxMinus, TrionState::TxPlus}) {
    const auto j = emission_isometry(t);
    joint += j * rho * j.adjoint();
  }
  const double tr = joint.trace().real();
  if (tr < 1e-15)
    throw std::invalid_argument("emission_conditioned_joint: no trion population");
  return DensityMatrix(joint / tr, BasisTag::JointLinearX);
}

/// Free propagation of a joint state: the photon polarization is stationary,
/// the spin precesses.
inline DensityMatrix propagate_joint(const QdModel& model, const DensityMatrix& joint,
                                     double tau) {
  if (joint.basis() != BasisTag::JointLinearX)
    throw std::invalid_argument("propagate_joint: expected joint_linear_x basis");
  const Eigen::Matrix2cd u2 = precession_operator(model, tau).matrix();
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  u.block<2, 2>(0, 0) = u2;
  u.block<2, 2>(2, 2) = u2;
  return DensityMatrix(u * joint.elements() * u.adjoint(), BasisTag::JointLinearX);
}

/// <psi| rho |psi> for a pure target state.
inline double state_fidelity(const DensityMatrix& rho, const StateVector& psi) {
  if (rho.basis() != psi.basis())
    throw std::invalid_argument("state_fidelity: basis mismatch");
  const Complex f = psi.amplitudes().adjoint() * rho.elements() * psi.amplitudes();
  return f.real();
}

}  // namespace spinphoton
