#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "spinphoton/drive.hpp"
#include "spinphoton/pulses.hpp"
#include "spinphoton/qd_model.hpp"
#include "spinphoton/states.hpp"

namespace spinphoton {

struct LindbladOptions {
  double dt = 0.0;        // 0 selects max_step(model)/8
  int sample_stride = 8;  // record every N-th step
  PhysicsOptions physics;
  bool validate_samples = true;
  double evolve_until = -1.0;  // < 0: one full frame
};

struct LindbladResult {
  std::vector<double> times;
  std::vector<Eigen::Matrix4cd> states;

  const Eigen::Matrix4cd& final_state() const { return states.back(); }
  Eigen::Vector4d populations(std::size_t i) const {
    return states[i].diagonal().real();
  }
  /// Linear interpolation is not needed; samples land on step boundaries.
  Eigen::Vector4d populations_at(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-18);
    const auto idx = static_cast<std::size_t>(it - times.begin());
    return populations(std::min(idx, states.size() - 1));
  }
};

namespace detail {

inline Eigen::Matrix4cd lindblad_rhs(const Eigen::Matrix4cd& h,
                                     const std::vector<CollapseChannel>& channels,
                                     const Eigen::Matrix4cd& damp,
                                     const Eigen::Matrix4cd& rho) {
  const Complex i{0.0, 1.0};
  Eigen::Matrix4cd out = -i * (h * rho - rho * h);
  for (const auto& c : channels) out += c.op * rho * c.op.adjoint();
  out -= 0.5 * (damp * rho + rho * damp);
  return out;
}

inline void check_density(const Eigen::Matrix4cd& rho, double t) {
  if (std::abs(rho.trace().real() - 1.0) > 1e-8 || std::abs(rho.trace().imag()) > 1e-10)
    throw std::runtime_error("lindblad_evolve: trace drift at t=" + std::to_string(t));
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::runtime_error("lindblad_evolve: Hermiticity loss at t=" + std::to_string(t));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::runtime_error("lindblad_evolve: negative population at t=" +
                             std::to_string(t));
}

/// Event times within [0, horizon]: pulse edges and Raman pulses.
inline std::vector<double> event_grid(const PulseSequence& seq, double horizon,
                                      const std::vector<double>& extra = {}) {
  std::vector<double> events{0.0, horizon};
  for (const auto& p : seq.pulses) {
    if (p.target == PulseTarget::Raman) {
      events.push_back(p.start);
    } else {
      events.push_back(p.start);
      events.push_back(p.end());
    }
  }
  for (double t : extra) events.push_back(t);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-18; }),
               events.end());
  std::erase_if(events, [&](double t) { return t < -1e-18 || t > horizon + 1e-18; });
  return events;
}

}  // namespace detail

/// Fixed-step RK4 integration of the master equation over one frame.
/// Raman pulses act as instantaneous ground-state unitaries. Trace,
/// Hermiticity and positivity are checked at every recorded sample.
inline LindbladResult lindblad_evolve(const QdModel& model, const PulseSequence& seq,
                                      const DensityMatrix& initial, double dt = 0.0,
                                      const LindbladOptions& opts = {}) {
  validate_sequence(seq);
  if (initial.basis() != BasisTag::FourLevel)
    throw std::invalid_argument("lindblad_evolve: initial state must be four_level");
  const double dt_max = max_step(model);
  if (dt == 0.0) dt = opts.dt;
  if (dt == 0.0) dt = dt_max / 8.0;
  if (dt > dt_max * (1.0 + 1e-12))
    throw std::invalid_argument("lindblad_evolve: dt exceeds the step rule");

  const auto drives = build_drives(model, seq, opts.physics);
  const auto channels = build_collapse_channels(model, opts.physics);
  Eigen::Matrix4cd damp = Eigen::Matrix4cd::Zero();
  for (const auto& c : channels) damp += c.op.adjoint() * c.op;

  const double horizon = opts.evolve_until >= 0.0
                             ? std::min(opts.evolve_until, seq.frame_period)
                             : seq.frame_period;
  const auto events = detail::event_grid(seq, horizon);

  LindbladResult result;
  Eigen::Matrix4cd rho = initial.elements();
  auto record = [&](double t) {
    if (opts.validate_samples) detail::check_density(rho, t);
    result.times.push_back(t);
    result.states.push_back(rho);
  };
  record(0.0);

  auto rhs = [&](double t, const Eigen::Matrix4cd& r) {
    return detail::lindblad_rhs(hamiltonian_at(model, drives, t), channels, damp, r);
  };

  for (std::size_t e = 0; e + 1 < events.size(); ++e) {
    // Instantaneous rotations fire when the grid reaches their time.
    for (const auto& p : seq.pulses) {
      if (p.target == PulseTarget::Raman && std::abs(p.start - events[e]) < 1e-18) {
        const Eigen::Matrix4cd u = embed_spin_rotation(raman_rotation(p));
        rho = u * rho * u.adjoint();
        record(events[e]);
      }
    }
    const double t0 = events[e];
    const double t1 = events[e + 1];
    const auto steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-12));
    if (steps <= 0) continue;
    const double h = (t1 - t0) / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
      const double t = t0 + h * static_cast<double>(s);
      const Eigen::Matrix4cd k1 = rhs(t, rho);
      const Eigen::Matrix4cd k2 = rhs(t + 0.5 * h, rho + 0.5 * h * k1);
      const Eigen::Matrix4cd k3 = rhs(t + 0.5 * h, rho + 0.5 * h * k2);
      const Eigen::Matrix4cd k4 = rhs(t + h, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const bool last = s + 1 == steps;
      if (last || (s + 1) % opts.sample_stride == 0)
        record(last ? t1 : t + h);
    }
  }
  return result;
}

/// Convenience overload starting from a pure four-level or spin state.
inline LindbladResult lindblad_evolve(const QdModel& model, const PulseSequence& seq,
                                      const StateVector& initial, double dt = 0.0,
                                      const LindbladOptions& opts = {}) {
  Eigen::Vector4cd amps = Eigen::Vector4cd::Zero();
  if (initial.basis() == BasisTag::FourLevel) {
    amps = initial.amplitudes();
  } else if (initial.basis() == BasisTag::SpinX) {
    amps.head<2>() = initial.amplitudes();
  } else {
    throw std::invalid_argument("lindblad_evolve: initial basis must be spin_x or four_level");
  }
  return lindblad_evolve(model, seq,
                         DensityMatrix(amps * amps.adjoint(), BasisTag::FourLevel), dt,
                         opts);
}

}  // namespace spinphoton
