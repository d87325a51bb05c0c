#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "spinphoton/qd_model.hpp"
#include "spinphoton/states.hpp"
#include "spinphoton/units.hpp"

namespace spinphoton {

inline constexpr Complex kI{0.0, 1.0};

/// The post-emission joint photon (x) spin state
/// (|H>|x+> - i |V>|x->)/sqrt(2) in the {H x+, H x-, V x+, V x-} basis.
inline StateVector entangled_state() {
  const double r = 1.0 / std::sqrt(2.0);
  return make_state(BasisTag::JointLinearX, {Complex{r, 0}, 0.0, 0.0, Complex{0, -r}});
}

// Change-of-basis matrices. Rows are the target basis bras.

/// <z(+,-)| x(+,-)>: z+- = (x+ +- x-)/sqrt(2).
inline Eigen::Matrix2cd spin_x_to_z() {
  Eigen::Matrix2cd u;
  const double r = 1.0 / std::sqrt(2.0);
  u << r, r, r, -r;
  return u;
}

/// <sigma(+,-)| (H,V)>: sigma+- = (H +- iV)/sqrt(2).
inline Eigen::Matrix2cd photon_linear_to_circular() {
  Eigen::Matrix2cd u;
  const double r = 1.0 / std::sqrt(2.0);
  u << r, -kI * r, r, kI * r;
  return u;
}

namespace detail {
inline Eigen::MatrixXcd change_of_basis(BasisTag from, BasisTag to) {
  if (from == to) {
    return Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(basis_dimension(from)),
                                      static_cast<Eigen::Index>(basis_dimension(from)));
  }
  if (from == BasisTag::SpinX && to == BasisTag::SpinZ) return spin_x_to_z();
  if (from == BasisTag::SpinZ && to == BasisTag::SpinX) return spin_x_to_z().adjoint();
  if (from == BasisTag::PhotonLinear && to == BasisTag::PhotonCircular)
    return photon_linear_to_circular();
  if (from == BasisTag::PhotonCircular && to == BasisTag::PhotonLinear)
    return photon_linear_to_circular().adjoint();
  if (from == BasisTag::JointLinearX && to == BasisTag::JointCircularZ) {
    const Eigen::Matrix2cd p = photon_linear_to_circular();
    const Eigen::Matrix2cd s = spin_x_to_z();
    Eigen::MatrixXcd u(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) u.block<2, 2>(2 * i, 2 * j) = p(i, j) * s;
    return u;
  }
  if (from == BasisTag::JointCircularZ && to == BasisTag::JointLinearX) {
    return change_of_basis(BasisTag::JointLinearX, BasisTag::JointCircularZ).adjoint();
  }
  throw std::invalid_argument("basis_transform: unsupported basis pair " +
                              basis_name(from) + " -> " + basis_name(to));
}
}  // namespace detail

inline StateVector basis_transform(const StateVector& psi, BasisTag to) {
  const Eigen::MatrixXcd u = detail::change_of_basis(psi.basis(), to);
  return StateVector(u * psi.amplitudes(), to);
}

inline DensityMatrix basis_transform(const DensityMatrix& rho, BasisTag to) {
  const Eigen::MatrixXcd u = detail::change_of_basis(rho.basis(), to);
  return DensityMatrix(u * rho.elements() * u.adjoint(), to);
}

inline OperatorMatrix basis_transform(const OperatorMatrix& op, BasisTag to) {
  const Eigen::MatrixXcd u = detail::change_of_basis(op.basis(), to);
  return OperatorMatrix(u * op.matrix() * u.adjoint(), to, op.kind());
}

/// Which circularly polarized drive performs the spin rotation. The pi/2
/// rotation applied after detecting a sigma+- photon uses the opposite
/// handedness, R_{sigma-+}.
enum class RotationAxis { SigmaPlus, SigmaMinus };

/// Ground-state rotation generated by sigma_x: R(theta) = exp(+- i theta X / 2)
/// with + for the sigma- drive. At theta = pi/2 this is
/// (1/sqrt(2)) (|x+><x+| +- i|x+><x-| +- i|x-><x+| + |x-><x-|).
inline OperatorMatrix rotation_operator(RotationAxis axis, double angle) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const Complex is = (axis == RotationAxis::SigmaMinus ? kI : -kI) * s;
  Eigen::Matrix2cd r;
  r << c, is, is, c;
  return OperatorMatrix(r, BasisTag::SpinX, OperatorKind::Rotation);
}

/// Free ground-state precession U(tau) = diag(e^{-i De tau/2}, e^{+i De tau/2})
/// in the x basis; U(a) U(b) = U(a+b).
inline OperatorMatrix precession_operator(const QdModel& model, double tau) {
  if (tau < 0.0) throw std::invalid_argument("precession_operator: tau must be >= 0");
  const double phase = 0.5 * model.delta_e * tau;
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
  u(0, 0) = std::polar(1.0, -phase);
  u(1, 1) = std::polar(1.0, phase);
  return OperatorMatrix(u, BasisTag::SpinX, OperatorKind::Evolution);
}

/// Polarization analyzer axis as a Jones vector in the {H, V} basis.
inline Eigen::Vector2cd polarization_vector(PhotonPol pol) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (pol) {
    case PhotonPol::H: return {1.0, 0.0};
    case PhotonPol::V: return {0.0, 1.0};
    case PhotonPol::SigmaPlus: return {r, kI * r};
    case PhotonPol::SigmaMinus: return {r, -kI * r};
  }
  throw std::invalid_argument("polarization_vector: bad polarization");
}

/// Projects the photon half of a joint {H x+, H x-, V x+, V x-} state onto
/// a polarization axis. Returns the Born probability and the conditioned
/// (normalized) spin state in the x basis.
inline std::pair<double, StateVector> project_photon(const StateVector& joint,
                                                     PhotonPol axis) {
  if (joint.basis() != BasisTag::JointLinearX)
    throw std::invalid_argument("project_photon: expected joint_linear_x basis");
  const Eigen::Vector2cd e = polarization_vector(axis);
  const auto& a = joint.amplitudes();
  Eigen::Vector2cd spin;
  spin[0] = std::conj(e[0]) * a[0] + std::conj(e[1]) * a[2];  // x+ component
  spin[1] = std::conj(e[0]) * a[1] + std::conj(e[1]) * a[3];  // x- component
  const double prob = spin.squaredNorm();
  if (prob <= 0.0) {
    // Orthogonal projection; no conditioned state exists.
    return {0.0, basis_ket(BasisTag::SpinX, 0)};
  }
  return {prob, StateVector(spin / std::sqrt(prob), BasisTag::SpinX)};
}

}  // namespace spinphoton
