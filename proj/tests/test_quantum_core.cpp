#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "spinphoton/operators.hpp"
#include "spinphoton/qd_model.hpp"
#include "spinphoton/rng.hpp"
#include "spinphoton/states.hpp"
#include "spinphoton/units.hpp"

using namespace spinphoton;
using Catch::Approx;

namespace {

// Brute-force oracle: project the photon half of a 4-dim joint state with an
// explicit 4x4 projector |e><e| (x) I and extract the spin block by hand.
std::pair<double, Eigen::Vector2cd> projector_oracle(const Eigen::Vector4cd& joint,
                                                     const Eigen::Vector2cd& axis) {
  Eigen::Matrix2cd pol = axis * axis.adjoint();
  Eigen::Matrix4cd proj = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      proj.block<2, 2>(2 * i, 2 * j) = pol(i, j) * Eigen::Matrix2cd::Identity();
  const Eigen::Vector4cd projected = proj * joint;
  const double prob = projected.squaredNorm();
  // Conditioned spin amplitudes, expressed via the axis bra.
  Eigen::Vector2cd spin;
  spin[0] = std::conj(axis[0]) * joint[0] + std::conj(axis[1]) * joint[2];
  spin[1] = std::conj(axis[0]) * joint[1] + std::conj(axis[1]) * joint[3];
  return {prob, spin};
}

QdModel paper_model() {
  return build_qd_model(ghz_to_angular(7.35), ghz_to_angular(1.8), 1e9, 1.1);
}

}  // namespace

TEST_CASE("build_qd_model validates parameters") {
  const QdModel m = paper_model();
  CHECK(m.delta_e == Approx(kTwoPi * 7.35e9));
  CHECK(m.gamma == Approx(1e9));

  // Degenerate ground states are allowed (no precession).
  CHECK_NOTHROW(build_qd_model(0.0, 0.0, 1e9));

  CHECK_THROWS_AS(build_qd_model(kTwoPi * 7.35e9, 0.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_qd_model(kTwoPi * 7.35e9, 0.0, 0.0), std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(build_qd_model(inf, 0.0, 1e9), std::invalid_argument);
}

TEST_CASE("transition table matches the level diagram") {
  const QdModel m = paper_model();
  const double v1 = transition_frequency(m, Transition::V1);
  const double h2 = transition_frequency(m, Transition::H2);
  const double h3 = transition_frequency(m, Transition::H3);
  const double v4 = transition_frequency(m, Transition::V4);
  // Labels are in order of increasing energy.
  CHECK(v1 < h2);
  CHECK(h2 < h3);
  CHECK(h3 < v4);
  CHECK(v4 - v1 == Approx(m.delta_e + m.delta_h));
  CHECK(h3 - h2 == Approx(m.delta_e - m.delta_h));
}

TEST_CASE("entangled_state amplitudes and norm") {
  const StateVector psi = entangled_state();
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(psi.amplitudes().norm() == Approx(1.0));
  CHECK(psi[0] == std::complex<double>{r, 0.0});
  CHECK(psi[1] == std::complex<double>{0.0, 0.0});
  CHECK(psi[2] == std::complex<double>{0.0, 0.0});
  CHECK(std::abs(psi[3] - std::complex<double>{0.0, -r}) < 1e-15);
}

TEST_CASE("projecting the entangled state onto H collapses the spin to x+") {
  const StateVector psi = entangled_state();
  const auto [prob, spin] = project_photon(psi, PhotonPol::H);
  CHECK(prob == Approx(0.5));
  CHECK(std::abs(spin[0]) == Approx(1.0));
  CHECK(std::abs(spin[1]) == Approx(0.0).margin(1e-15));
}

TEST_CASE("projecting onto sigma+ yields the z- spin state up to phase") {
  const StateVector psi = entangled_state();
  const auto [prob, spin] = project_photon(psi, PhotonPol::SigmaPlus);
  CHECK(prob == Approx(0.5));

  // Independent check with the explicit 4x4 projector.
  const auto [oprob, ospin] =
      projector_oracle(psi.amplitudes(), polarization_vector(PhotonPol::SigmaPlus));
  CHECK(oprob == Approx(prob));
  CHECK(std::abs(ospin.normalized().dot(spin.amplitudes())) == Approx(1.0));

  // (x+ - x-)/sqrt(2) = |z->; compare in the z basis up to a global phase.
  const StateVector in_z = basis_transform(spin, BasisTag::SpinZ);
  const StateVector z_minus = basis_ket(BasisTag::SpinZ, 1);
  CHECK(in_z.equal_up_to_phase(z_minus));
}

TEST_CASE("basis_transform definitions and round trips") {
  const StateVector xp = basis_ket(BasisTag::SpinX, 0);
  const StateVector in_z = basis_transform(xp, BasisTag::SpinZ);
  CHECK(in_z[0].real() == Approx(1.0 / std::sqrt(2.0)));
  CHECK(in_z[1].real() == Approx(1.0 / std::sqrt(2.0)));

  // |sigma+> expressed in {H, V} is (1/sqrt2, i/sqrt2).
  const StateVector sp = basis_ket(BasisTag::PhotonCircular, 0);
  const StateVector in_lin = basis_transform(sp, BasisTag::PhotonLinear);
  CHECK(std::abs(in_lin[0] - std::complex<double>{1.0 / std::sqrt(2.0), 0.0}) < 1e-14);
  CHECK(std::abs(in_lin[1] - std::complex<double>{0.0, 1.0 / std::sqrt(2.0)}) < 1e-14);

  // The transform is unitary: U U^dag = I.
  const Eigen::Matrix2cd u = photon_linear_to_circular();
  CHECK((u * u.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-14);

  Rng rng(7u);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXcd amps(2);
    amps[0] = std::complex<double>{rng.normal(), rng.normal()};
    amps[1] = std::complex<double>{rng.normal(), rng.normal()};
    const StateVector psi(amps, BasisTag::SpinX);
    const StateVector back =
        basis_transform(basis_transform(psi, BasisTag::SpinZ), BasisTag::SpinX);
    CHECK((back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_AS(basis_transform(xp, BasisTag::PhotonLinear), std::invalid_argument);
}

TEST_CASE("rotation_operator pi/2 matches the quoted matrix") {
  const OperatorMatrix r_minus = rotation_operator(RotationAxis::SigmaMinus, kPi / 2.0);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(r_minus.matrix()(0, 0) - std::complex<double>{s, 0}) < 1e-15);
  CHECK(std::abs(r_minus.matrix()(0, 1) - std::complex<double>{0, s}) < 1e-15);
  CHECK(std::abs(r_minus.matrix()(1, 0) - std::complex<double>{0, s}) < 1e-15);
  CHECK(std::abs(r_minus.matrix()(1, 1) - std::complex<double>{s, 0}) < 1e-15);

  // Direct 2x2 matrix-vector product oracle for R_{sigma-}(pi/2) |z->.
  const std::complex<double> i{0.0, 1.0};
  const Eigen::Vector2cd z_minus{s, -s};
  Eigen::Vector2cd expect;
  expect[0] = s * (z_minus[0] + i * z_minus[1]);
  expect[1] = s * (i * z_minus[0] + z_minus[1]);
  const StateVector rotated = r_minus.apply(StateVector(z_minus, BasisTag::SpinX));
  CHECK(std::abs(rotated[0] - expect[0]) < 1e-14);
  CHECK(std::abs(rotated[1] - expect[1]) < 1e-14);
  CHECK(std::norm(rotated[0]) == Approx(std::norm(expect[0])));

  // Zero angle is the identity for either axis.
  for (auto axis : {RotationAxis::SigmaPlus, RotationAxis::SigmaMinus}) {
    const auto r0 = rotation_operator(axis, 0.0);
    CHECK((r0.matrix() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  }

  // Unitarity at random angles.
  Rng rng(11u);
  for (int trial = 0; trial < 25; ++trial) {
    const auto r = rotation_operator(RotationAxis::SigmaPlus, rng.uniform_in(-8.0, 8.0));
    const Eigen::Matrix2cd err =
        r.matrix().adjoint() * r.matrix() - Eigen::Matrix2cd::Identity();
    CHECK(err.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("precession_operator basics") {
  const QdModel m = paper_model();
  const auto u0 = precession_operator(m, 0.0);
  CHECK((u0.matrix() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);

  // One full period is -identity (a pure global phase); populations invariant.
  const double period = kTwoPi / m.delta_e;
  const auto u_full = precession_operator(m, period);
  CHECK((u_full.matrix() + Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  // Composition U(a) U(b) = U(a+b).
  const auto ua = precession_operator(m, 17e-12);
  const auto ub = precession_operator(m, 29e-12);
  const auto uab = precession_operator(m, 46e-12);
  CHECK((ua.matrix() * ub.matrix() - uab.matrix()).cwiseAbs().maxCoeff() < 1e-13);

  CHECK_THROWS_AS(precession_operator(m, -1e-12), std::invalid_argument);
}

TEST_CASE("rotated-basis signal reproduces (1/4)(1 + sin De tau)") {
  const QdModel m = paper_model();
  const StateVector psi = entangled_state();
  const double period = kTwoPi / m.delta_e;

  auto signal = [&](PhotonPol detect, RotationAxis rot, double tau) {
    const auto [prob, spin] = project_photon(psi, detect);
    const auto u = precession_operator(m, tau);
    const auto r = rotation_operator(rot, kPi / 2.0);
    const Eigen::Vector2cd amp =
        r.matrix() * (u.matrix() * (std::sqrt(prob) * spin.amplitudes()));
    return std::norm(amp[0]);
  };

  // Grid over three periods, both detection/rotation pairings.
  for (int k = 0; k <= 120; ++k) {
    const double tau = 3.0 * period * k / 120.0;
    const double expect = 0.25 * (1.0 + std::sin(m.delta_e * tau));
    CHECK(std::abs(signal(PhotonPol::SigmaPlus, RotationAxis::SigmaMinus, tau) - expect) <
          1e-10);
    CHECK(std::abs(signal(PhotonPol::SigmaMinus, RotationAxis::SigmaPlus, tau) - expect) <
          1e-10);
  }

  // 100 random tau values.
  Rng rng(23u);
  for (int trial = 0; trial < 100; ++trial) {
    const double tau = rng.uniform_in(0.0, 10.0 * period);
    const double expect = 0.25 * (1.0 + std::sin(m.delta_e * tau));
    CHECK(std::abs(signal(PhotonPol::SigmaPlus, RotationAxis::SigmaMinus, tau) - expect) <
          1e-10);
  }
}

TEST_CASE("entangled state is maximally entangled") {
  const StateVector psi = entangled_state();
  CHECK(concurrence(psi) == Approx(1.0).margin(1e-10));
  const Eigen::Vector2d sc = schmidt_coefficients(psi);
  CHECK(sc[0] == Approx(1.0 / std::sqrt(2.0)).margin(1e-10));
  CHECK(sc[1] == Approx(1.0 / std::sqrt(2.0)).margin(1e-10));
}

TEST_CASE("global-phase comparison") {
  const StateVector a = make_state(BasisTag::SpinX, {1.0, 0.0});
  const StateVector b = make_state(BasisTag::SpinX, {std::polar(1.0, 1.234), 0.0});
  const StateVector c = make_state(BasisTag::SpinX, {0.0, 1.0});
  CHECK(a.equal_up_to_phase(b));
  CHECK_FALSE(a.equal_up_to_phase(c));
}

TEST_CASE("state and operator serialization round-trips") {
  const StateVector psi = entangled_state();
  const auto j = psi.to_json();
  CHECK(j.at("labels")[0] == "H x+");
  const StateVector back = StateVector::from_json(j);
  CHECK(back.basis() == psi.basis());
  CHECK((back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);

  const DensityMatrix rho = DensityMatrix::from_pure(psi);
  const DensityMatrix rho_back = DensityMatrix::from_json(rho.to_json());
  CHECK((rho_back.elements() - rho.elements()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("density matrix construction rejects invalid inputs") {
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
  bad(0, 0) = 0.9;  // trace != 1
  CHECK_THROWS_AS(DensityMatrix(bad, BasisTag::SpinX), std::invalid_argument);

  Eigen::MatrixXcd neg = Eigen::MatrixXcd::Zero(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix(neg, BasisTag::SpinX), std::invalid_argument);
}
