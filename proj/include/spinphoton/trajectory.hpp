#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "spinphoton/drive.hpp"
#include "spinphoton/pulses.hpp"
#include "spinphoton/qd_model.hpp"
#include "spinphoton/rng.hpp"
#include "spinphoton/states.hpp"

namespace spinphoton {

/// One spontaneous emission. amplitude_h/amplitude_v are the joint
/// amplitudes of the photon with the selection-rule final spin of the
/// source trion (H pairs x+ and V pairs x- for Tx-, swapped for Tx+).
struct PhotonRecord {
  double emission_time = 0.0;  // s, within the frame
  Complex amplitude_h{0.0, 0.0};
  Complex amplitude_v{0.0, 0.0};
  TrionState source = TrionState::TxMinus;
  int origin_pulse = -1;
  std::optional<PhotonPol> collapsed_pol;  // set by the raw H/V unraveling

  bool operator==(const PhotonRecord&) const = default;
};

struct TrajectoryOptions {
  double dt = 0.0;  // used by shaped-pulse stepping; validated against the step rule
  PhysicsOptions physics;
  std::vector<double> checkpoints;  // times at which populations are recorded
};

struct TrajectoryResult {
  std::vector<PhotonRecord> photons;
  StateVector final_spin = basis_ket(BasisTag::SpinX, 0);
  StateVector final_state = basis_ket(BasisTag::FourLevel, 0);
  double final_trion_population = 0.0;
  std::uint64_t rng_seed = 0;
  std::vector<Eigen::Vector4d> checkpoint_populations;
};

/// Evolves single quantum trajectories of the driven four-level system over
/// one frame. Piecewise-constant Hamiltonians (square pulses and free decay)
/// are propagated exactly through an eigendecomposition of the non-Hermitian
/// no-jump generator; shaped pulses fall back to RK4 stepping.
class FrameEngine {
 public:
  /// Returns the post-jump spin amplitudes; may sample measurement outcomes.
  using JumpPolicy = std::function<Eigen::Vector2cd(PhotonRecord&, Rng&)>;

  FrameEngine(const QdModel& model, PulseSequence sequence, TrajectoryOptions opts)
      : model_(model), seq_(std::move(sequence)), opts_(std::move(opts)) {
    validate_sequence(seq_);
    const double dt_max = max_step(model_);
    if (opts_.dt == 0.0) opts_.dt = dt_max / 8.0;
    if (opts_.dt > dt_max * (1.0 + 1e-12))
      throw std::invalid_argument("FrameEngine: dt exceeds the step rule");
    channels_ = build_collapse_channels(model_, opts_.physics);
    damp_ = Eigen::Matrix4cd::Zero();
    for (const auto& c : channels_) damp_ += c.op.adjoint() * c.op;
    drives_ = build_drives(model_, seq_, opts_.physics);
    compile_segments();
  }

  struct FrameResult {
    std::vector<PhotonRecord> photons;
    Eigen::Vector4cd final_state;
    std::vector<Eigen::Vector4d> checkpoint_populations;
  };

  const PulseSequence& sequence() const { return seq_; }
  const TrajectoryOptions& options() const { return opts_; }

  FrameResult run_frame(const Eigen::Vector4cd& psi_in, Rng& rng,
                        const JumpPolicy& policy = {}) const {
    FrameResult out;
    out.checkpoint_populations.reserve(opts_.checkpoints.size());
    Eigen::Vector4cd psi = psi_in.normalized();
    double r = rng.uniform_positive();

    for (const auto& seg : segments_) {
      for (const auto& rot : seg.rotations_at_start) psi = rot * psi;
      if (seg.checkpoint_at_start) {
        const Eigen::Vector4cd n = psi.normalized();
        out.checkpoint_populations.push_back(n.cwiseAbs2());
      }
      if (seg.t1 <= seg.t0) continue;

      double t_cur = seg.t0;
      while (t_cur < seg.t1 - 1e-18) {
        double jump_time = 0.0;
        Eigen::Vector4cd psi_end;
        const bool jumped = seg.stepped
                                ? advance_stepped(seg, psi, t_cur, r, psi_end, jump_time)
                                : advance_exact(seg, psi, t_cur, r, psi_end, jump_time);
        if (!jumped) {
          psi = psi_end;
          t_cur = seg.t1;
          break;
        }
        Eigen::Vector4cd pre = psi_end.normalized();
        apply_jump(pre, jump_time, seg.origin_pulse, rng, policy, out.photons, psi);
        r = rng.uniform_positive();
        t_cur = jump_time;
      }
    }
    out.final_state = psi.normalized();
    return out;
  }

 private:
  struct Propagator {
    bool diagonal = true;
    double omega_rel = 0.0;
    Eigen::Vector4cd lambda;
    Eigen::Matrix4cd v, vinv;

    Eigen::Vector4cd apply(const Eigen::Vector4cd& psi, double dt) const {
      if (diagonal) {
        Eigen::Vector4cd out;
        for (int i = 0; i < 4; ++i)
          out[i] = psi[i] * std::exp(Complex{0.0, -1.0} * lambda[i] * dt);
        return out;
      }
      Eigen::Vector4cd c = vinv * psi;
      for (int i = 0; i < 4; ++i) c[i] *= std::exp(Complex{0.0, -1.0} * lambda[i] * dt);
      return v * c;
    }
  };

  struct Segment {
    double t0 = 0.0, t1 = 0.0;
    int prop_index = -1;        // into props_; -1 when stepped
    int drive_index = -1;       // into drives_; -1 for free evolution
    int origin_pulse = -1;      // most recent optical pulse at or before t0
    bool stepped = false;       // RK4 path (shaped pulses, solver fallback)
    bool checkpoint_at_start = false;
    std::vector<Eigen::Matrix4cd> rotations_at_start;
  };

  void compile_segments() {
    std::vector<double> bounds{0.0, seq_.frame_period};
    for (const auto& p : seq_.pulses) {
      if (p.target == PulseTarget::Raman) {
        bounds.push_back(p.start);
      } else {
        bounds.push_back(p.start);
        bounds.push_back(p.end());
      }
    }
    for (double c : opts_.checkpoints) {
      if (c < 0.0 || c > seq_.frame_period)
        throw std::invalid_argument("FrameEngine: checkpoint outside the frame");
      bounds.push_back(c);
    }
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-18; }),
                 bounds.end());

    free_prop_index_ = make_free_propagator();
    for (std::size_t i = 0; i + 1 <= bounds.size(); ++i) {
      Segment seg;
      seg.t0 = bounds[i];
      seg.t1 = i + 1 < bounds.size() ? bounds[i + 1] : bounds[i];
      for (const auto& p : seq_.pulses) {
        if (p.target == PulseTarget::Raman && std::abs(p.start - seg.t0) < 1e-18)
          seg.rotations_at_start.push_back(embed_spin_rotation(raman_rotation(p)));
      }
      for (double c : opts_.checkpoints)
        if (std::abs(c - seg.t0) < 1e-18) seg.checkpoint_at_start = true;

      const double mid = 0.5 * (seg.t0 + seg.t1);
      seg.drive_index = -1;
      for (std::size_t d = 0; d < drives_.size(); ++d) {
        const Pulse& p = *drives_[d].pulse;
        if (mid >= p.start && mid <= p.end()) {
          seg.drive_index = static_cast<int>(d);
          break;
        }
      }
      seg.origin_pulse = -1;
      for (std::size_t pi = 0; pi < seq_.pulses.size(); ++pi) {
        const Pulse& p = seq_.pulses[pi];
        if (p.target != PulseTarget::Raman && p.start <= mid)
          seg.origin_pulse = static_cast<int>(pi);
      }
      if (seg.drive_index < 0) {
        seg.prop_index = free_prop_index_;
      } else if (drives_[seg.drive_index].pulse->shape == PulseShape::Square) {
        seg.prop_index = drive_propagator(seg.drive_index);
        seg.stepped = seg.prop_index < 0;
      } else {
        seg.stepped = true;
      }
      segments_.push_back(std::move(seg));
    }
  }

  int make_free_propagator() {
    Propagator prop;
    prop.diagonal = true;
    const Eigen::Vector4d e = level_energies(model_);
    for (int i = 0; i < 4; ++i)
      prop.lambda[i] = Complex{e[i], -0.5 * damp_(i, i).real()};
    props_.push_back(std::move(prop));
    return static_cast<int>(props_.size()) - 1;
  }

  /// Eigendecomposition of the no-jump generator in the laser frame.
  /// Returns -1 when the eigenbasis reconstruction is poor.
  int drive_propagator(int drive_index) {
    auto it = drive_props_.find(drive_index);
    if (it != drive_props_.end()) return it->second;
    const PulseDrive& d = drives_[drive_index];
    Eigen::Matrix4cd h = static_hamiltonian(model_);
    h(kIdxTxMinus, kIdxTxMinus) -= d.omega_rel;
    h(kIdxTxPlus, kIdxTxPlus) -= d.omega_rel;
    for (const auto& c : d.couplings) {
      const Complex term = 0.5 * d.peak_rabi * c.kappa;
      h(c.trion, c.ground) += term;
      h(c.ground, c.trion) += std::conj(term);
    }
    h -= Complex{0.0, 0.5} * damp_;

    Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(h);
    Propagator prop;
    prop.diagonal = false;
    prop.omega_rel = d.omega_rel;
    prop.lambda = es.eigenvalues();
    prop.v = es.eigenvectors();
    const double condish = std::abs(prop.v.determinant());
    if (condish < 1e-9) {
      drive_props_[drive_index] = -1;
      return -1;
    }
    prop.vinv = prop.v.inverse();
    const double err = (prop.v * prop.lambda.asDiagonal() * prop.vinv - h)
                           .cwiseAbs()
                           .maxCoeff();
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (err > 1e-8 * scale) {
      drive_props_[drive_index] = -1;
      return -1;
    }
    props_.push_back(std::move(prop));
    const int idx = static_cast<int>(props_.size()) - 1;
    drive_props_[drive_index] = idx;
    return idx;
  }

  Eigen::Vector4cd to_laser_frame(const Eigen::Vector4cd& psi, double omega_rel,
                                  double t) const {
    Eigen::Vector4cd out = psi;
    const Complex phase = std::polar(1.0, omega_rel * t);
    out[kIdxTxMinus] *= phase;
    out[kIdxTxPlus] *= phase;
    return out;
  }

  Eigen::Vector4cd from_laser_frame(const Eigen::Vector4cd& psi, double omega_rel,
                                    double t) const {
    return to_laser_frame(psi, -omega_rel, t);
  }

  /// Exact no-jump propagation over [t_cur, seg.t1]; on a jump, returns true
  /// with the pre-jump state and time. psi carries relative norm since the
  /// last jump; the jump fires when its squared norm reaches r.
  bool advance_exact(const Segment& seg, const Eigen::Vector4cd& psi, double t_cur,
                     double r, Eigen::Vector4cd& psi_out, double& jump_time) const {
    const Propagator& prop = props_[seg.prop_index];
    const Eigen::Vector4cd psi_l =
        prop.diagonal ? psi : to_laser_frame(psi, prop.omega_rel, t_cur);
    const double span = seg.t1 - t_cur;
    Eigen::Vector4cd end = prop.apply(psi_l, span);
    if (end.squaredNorm() >= r) {
      psi_out = prop.diagonal ? end : from_laser_frame(end, prop.omega_rel, seg.t1);
      return false;
    }
    double lo = 0.0, hi = span;
    for (int iter = 0; iter < 200 && hi - lo > 1e-16; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (prop.apply(psi_l, mid).squaredNorm() >= r) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double dt_jump = 0.5 * (lo + hi);
    Eigen::Vector4cd pre = prop.apply(psi_l, dt_jump);
    jump_time = t_cur + dt_jump;
    psi_out = prop.diagonal ? pre : from_laser_frame(pre, prop.omega_rel, jump_time);
    return true;
  }

  /// RK4 stepping for shaped pulses; the jump time within the crossing step
  /// is located by bisection on the step fraction.
  bool advance_stepped(const Segment& seg, const Eigen::Vector4cd& psi, double t_cur,
                       double r, Eigen::Vector4cd& psi_out, double& jump_time) const {
    const double span = seg.t1 - t_cur;
    const long steps = std::max(1L, static_cast<long>(std::ceil(span / opts_.dt)));
    const double h = span / static_cast<double>(steps);
    Eigen::Vector4cd cur = psi;
    for (long s = 0; s < steps; ++s) {
      const double t = t_cur + h * static_cast<double>(s);
      const Eigen::Vector4cd next = rk4_step(cur, t, h);
      if (next.squaredNorm() < r) {
        double lo = 0.0, hi = h;
        Eigen::Vector4cd at_hi = next;
        for (int iter = 0; iter < 60 && hi - lo > 1e-16; ++iter) {
          const double mid = 0.5 * (lo + hi);
          const Eigen::Vector4cd probe = rk4_step(cur, t, mid);
          if (probe.squaredNorm() >= r) {
            lo = mid;
          } else {
            hi = mid;
            at_hi = probe;
          }
        }
        jump_time = t + hi;
        psi_out = at_hi;
        return true;
      }
      cur = next;
    }
    psi_out = cur;
    return false;
  }

  Eigen::Vector4cd nonhermitian_rhs(const Eigen::Vector4cd& psi, double t) const {
    const Eigen::Matrix4cd h =
        hamiltonian_at(model_, drives_, t) - Complex{0.0, 0.5} * damp_;
    return Complex{0.0, -1.0} * (h * psi);
  }

  Eigen::Vector4cd rk4_step(const Eigen::Vector4cd& psi, double t, double h) const {
    const Eigen::Vector4cd k1 = nonhermitian_rhs(psi, t);
    const Eigen::Vector4cd k2 = nonhermitian_rhs(psi + 0.5 * h * k1, t + 0.5 * h);
    const Eigen::Vector4cd k3 = nonhermitian_rhs(psi + 0.5 * h * k2, t + 0.5 * h);
    const Eigen::Vector4cd k4 = nonhermitian_rhs(psi + h * k3, t + h);
    return psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  void apply_jump(const Eigen::Vector4cd& pre, double t, int origin_pulse, Rng& rng,
                  const JumpPolicy& policy, std::vector<PhotonRecord>& photons,
                  Eigen::Vector4cd& psi) const {
    const double p_tm = model_.gamma * std::norm(pre[kIdxTxMinus]);
    const double p_tp = model_.gamma * std::norm(pre[kIdxTxPlus]);
    const double p_deph = opts_.physics.dephasing_rate > 0.0
                              ? 0.5 * opts_.physics.dephasing_rate *
                                    (std::norm(pre[kIdxXPlus]) + std::norm(pre[kIdxXMinus]))
                              : 0.0;
    const double total = p_tm + p_tp + p_deph;
    double u = rng.uniform() * total;

    if (p_deph > 0.0 && u >= p_tm + p_tp) {
      psi = Eigen::Vector4cd{pre[kIdxXPlus], -pre[kIdxXMinus], 0.0, 0.0};
      psi.normalize();
      return;
    }
    const TrionState source = u < p_tm ? TrionState::TxMinus : TrionState::TxPlus;

    const double rsqrt2 = 1.0 / std::sqrt(2.0);
    PhotonRecord record;
    record.emission_time = t;
    record.amplitude_h = Complex{rsqrt2, 0.0};
    record.amplitude_v = Complex{0.0, -rsqrt2};
    record.source = source;
    record.origin_pulse = origin_pulse;

    Eigen::Vector2cd spin;
    if (policy) {
      spin = policy(record, rng);
    } else {
      // Raw unraveling: Born-rule polarization collapse in the H/V basis.
      const double ph = std::norm(record.amplitude_h);
      const double pv = std::norm(record.amplitude_v);
      const PhotonPol pol =
          rng.uniform() * (ph + pv) < ph ? PhotonPol::H : PhotonPol::V;
      record.collapsed_pol = pol;
      const auto branch = decay_branch(source, pol);
      spin = Eigen::Vector2cd::Zero();
      spin[level_index(branch.final_spin)] = 1.0;
    }
    photons.push_back(record);
    psi = Eigen::Vector4cd{spin[0], spin[1], 0.0, 0.0};
    psi.normalize();
  }

  QdModel model_;
  PulseSequence seq_;
  TrajectoryOptions opts_;
  std::vector<PulseDrive> drives_;
  std::vector<CollapseChannel> channels_;
  Eigen::Matrix4cd damp_;
  std::vector<Propagator> props_;
  std::vector<Segment> segments_;
  std::map<int, int> drive_props_;
  int free_prop_index_ = -1;
};

/// Spec-level entry point: one trajectory, raw H/V jump records,
/// reproducible bit-for-bit from (sequence, seed).
inline TrajectoryResult sample_trajectory(const QdModel& model,
                                          const PulseSequence& sequence,
                                          const StateVector& initial,
                                          std::uint64_t seed,
                                          const TrajectoryOptions& opts = {}) {
  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  if (initial.basis() == BasisTag::FourLevel) {
    psi = initial.amplitudes();
  } else if (initial.basis() == BasisTag::SpinX) {
    psi.head<2>() = initial.amplitudes();
  } else {
    throw std::invalid_argument("sample_trajectory: initial basis must be spin_x or four_level");
  }
  const FrameEngine engine(model, sequence, opts);
  Rng rng(seed);
  auto frame = engine.run_frame(psi, rng);

  TrajectoryResult result;
  result.photons = std::move(frame.photons);
  result.rng_seed = seed;
  result.checkpoint_populations = std::move(frame.checkpoint_populations);
  result.final_state = StateVector(frame.final_state, BasisTag::FourLevel);
  result.final_trion_population =
      std::norm(frame.final_state[kIdxTxMinus]) + std::norm(frame.final_state[kIdxTxPlus]);
  Eigen::Vector2cd ground = frame.final_state.head<2>();
  if (ground.squaredNorm() > 1e-12) {
    result.final_spin = StateVector(ground.normalized(), BasisTag::SpinX);
  } else {
    result.final_spin = basis_ket(BasisTag::SpinX, 0);
  }
  return result;
}

/// Delegates to rotation_operator; the Raman pulse is short enough relative
/// to the precession period to act as an instantaneous unitary.
inline StateVector apply_instantaneous_rotation(const StateVector& spin, double angle,
                                                RotationAxis axis) {
  return rotation_operator(axis, angle).apply(spin);
}

struct EnsembleStats {
  std::vector<Eigen::Vector4d> mean_populations;
  std::vector<Eigen::Vector4d> population_stderr;
  std::uint64_t h_jumps = 0;
  std::uint64_t v_jumps = 0;
  std::vector<double> emission_times;  // filled when requested
  std::uint64_t trajectories = 0;
};

/// Averages raw-unraveling trajectories. Trajectory i uses the stream
/// derived from (master_seed, i), so results do not depend on threading.
inline EnsembleStats run_trajectory_ensemble(const QdModel& model,
                                             const PulseSequence& sequence,
                                             const StateVector& initial,
                                             std::uint64_t n_trajectories,
                                             std::uint64_t master_seed,
                                             const TrajectoryOptions& opts = {},
                                             bool collect_emission_times = false,
                                             unsigned n_threads = 0) {
  Eigen::Vector4cd psi0 = Eigen::Vector4cd::Zero();
  if (initial.basis() == BasisTag::FourLevel) {
    psi0 = initial.amplitudes();
  } else {
    psi0.head<2>() = initial.amplitudes();
  }
  const FrameEngine engine(model, sequence, opts);
  const std::size_t n_checkpoints = opts.checkpoints.size();

  struct Partial {
    std::vector<Eigen::Vector4d> sum, sumsq;
    std::uint64_t h = 0, v = 0;
    std::vector<double> times;
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t chunk = 4096;
  const std::uint64_t n_chunks = (n_trajectories + chunk - 1) / chunk;
  std::vector<Partial> partials(n_chunks);

  auto run_chunk = [&](std::uint64_t ci) {
    Partial& part = partials[ci];
    part.sum.assign(n_checkpoints, Eigen::Vector4d::Zero());
    part.sumsq.assign(n_checkpoints, Eigen::Vector4d::Zero());
    const std::uint64_t lo = ci * chunk;
    const std::uint64_t hi = std::min(n_trajectories, lo + chunk);
    for (std::uint64_t i = lo; i < hi; ++i) {
      Rng rng(derive_seed(master_seed, i));
      auto frame = engine.run_frame(psi0, rng);
      for (std::size_t c = 0; c < n_checkpoints; ++c) {
        part.sum[c] += frame.checkpoint_populations[c];
        part.sumsq[c] += frame.checkpoint_populations[c].cwiseAbs2();
      }
      for (const auto& ph : frame.photons) {
        if (!ph.collapsed_pol) continue;
        if (*ph.collapsed_pol == PhotonPol::H) ++part.h;
        else ++part.v;
        if (collect_emission_times) part.times.push_back(ph.emission_time);
      }
    }
  };

  if (n_threads <= 1 || n_chunks <= 1) {
    for (std::uint64_t ci = 0; ci < n_chunks; ++ci) run_chunk(ci);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::uint64_t> next{0};
    for (unsigned t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::uint64_t ci = next.fetch_add(1); ci < n_chunks; ci = next.fetch_add(1))
          run_chunk(ci);
      });
    }
    for (auto& th : pool) th.join();
  }

  EnsembleStats stats;
  stats.trajectories = n_trajectories;
  stats.mean_populations.assign(n_checkpoints, Eigen::Vector4d::Zero());
  stats.population_stderr.assign(n_checkpoints, Eigen::Vector4d::Zero());
  std::vector<Eigen::Vector4d> sum(n_checkpoints, Eigen::Vector4d::Zero());
  std::vector<Eigen::Vector4d> sumsq(n_checkpoints, Eigen::Vector4d::Zero());
  for (const auto& part : partials) {
    for (std::size_t c = 0; c < n_checkpoints; ++c) {
      sum[c] += part.sum[c];
      sumsq[c] += part.sumsq[c];
    }
    stats.h_jumps += part.h;
    stats.v_jumps += part.v;
    stats.emission_times.insert(stats.emission_times.end(), part.times.begin(),
                                part.times.end());
  }
  const double n = static_cast<double>(n_trajectories);
  for (std::size_t c = 0; c < n_checkpoints; ++c) {
    stats.mean_populations[c] = sum[c] / n;
    const Eigen::Vector4d var =
        (sumsq[c] / n - stats.mean_populations[c].cwiseAbs2()).cwiseMax(0.0);
    stats.population_stderr[c] = (var / n).cwiseSqrt();
  }
  return stats;
}

}  // namespace spinphoton
