#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "spinphoton/detection.hpp"
#include "spinphoton/presets.hpp"
#include "spinphoton/trajectory.hpp"
#include "spinphoton/units.hpp"

namespace spinphoton {

/// Tag stream plus the run metadata carried in the file header.
struct TagStream {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<TimeTag> tags;
  double frame_period = 0.0;  // s
  std::uint64_t n_frames = 0;

  void set_meta(const std::string& key, const std::string& value) {
    for (auto& [k, v] : metadata) {
      if (k == key) {
        v = value;
        return;
      }
    }
    metadata.emplace_back(key, value);
  }

  const std::string* find_meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
      if (k == key) return &v;
    return nullptr;
  }
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct FrameBlockResult {
  std::vector<TimeTag> tags;
};

/// Simulates frames [lo, hi). Frames chain the spin state; every random
/// draw comes from the block's derived stream, so results are independent
/// of threading.
inline FrameBlockResult run_frame_block(const ExperimentPlan& plan,
                                        const FrameEngine& engine, std::uint64_t lo,
                                        std::uint64_t hi, std::uint64_t master_seed,
                                        std::uint64_t block_index,
                                        std::uint64_t n_frames) {
  FrameBlockResult out;
  Rng rng = Rng::stream(master_seed, block_index);
  const double period = plan.sequence.frame_period;
  const Eigen::Vector4cd init = [&] {
    Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
    v[level_index(plan.init_target)] = 1.0;
    return v;
  }();

  auto emit_tag = [&](std::uint64_t frame, double true_time, TagKind kind, Rng& r) {
    const Channel channel = hbt_route(r);
    const DetectorModel& det =
        channel == Channel::A ? plan.detector_a : plan.detector_b;
    const auto hit = detect(true_time, det, r, plan.importance_sampling);
    if (!hit) return;
    // Jitter can push a tag across the frame boundary; fold it into the
    // neighboring frame to keep 0 <= time < period.
    double t = hit->time;
    std::int64_t f = static_cast<std::int64_t>(frame);
    const auto shift = static_cast<std::int64_t>(std::floor(t / period));
    f += shift;
    t -= static_cast<double>(shift) * period;
    if (f < 0 || f >= static_cast<std::int64_t>(n_frames)) return;
    out.tags.push_back(TimeTag{f, channel, t, hit->weight, kind});
  };

  Eigen::Vector4cd psi = init;
  for (std::uint64_t frame = lo; frame < hi; ++frame) {
    if (plan.ideal_initialization) psi = init;

    FrameEngine::JumpPolicy policy = [&](PhotonRecord& record, Rng& r) {
      const auto outcome = analyze_polarization(record, plan.analyzer, r);
      if (outcome.passed) emit_tag(frame, record.emission_time, TagKind::Signal, r);
      return Eigen::Vector2cd(outcome.spin.amplitudes());
    };

    auto result = engine.run_frame(psi, rng, policy);
    psi = result.final_state;

    if (plan.analyzer.leak_probability > 0.0 &&
        rng.bernoulli(plan.analyzer.leak_probability)) {
      const double t =
          rng.uniform_in(plan.windows.entangled_lo, plan.windows.entangled_hi);
      emit_tag(frame, t, TagKind::Leak, rng);
    }
    for (Channel channel : {Channel::A, Channel::B}) {
      const DetectorModel& det =
          channel == Channel::A ? plan.detector_a : plan.detector_b;
      if (det.dark_rate <= 0.0) continue;
      const std::uint64_t n = rng.poisson(det.dark_rate * period);
      for (std::uint64_t k = 0; k < n; ++k) {
        out.tags.push_back(TimeTag{static_cast<std::int64_t>(frame), channel,
                                   rng.uniform_in(0.0, period), 1.0, TagKind::Dark});
      }
    }
  }
  return out;
}

}  // namespace detail

/// Simulates n_frames repetitions of the plan's pulse sequence and returns
/// the detector tag stream, sorted by (frame, time). Deterministic for a
/// fixed seed regardless of thread count.
inline TagStream run_experiment(const ExperimentPlan& plan, std::uint64_t n_frames,
                                std::uint64_t seed, unsigned n_threads = 0) {
  TrajectoryOptions topts;
  topts.physics = plan.physics;
  const FrameEngine engine(plan.model, plan.sequence, topts);

  constexpr std::uint64_t kBlock = 4096;
  const std::uint64_t n_blocks = n_frames == 0 ? 0 : (n_frames + kBlock - 1) / kBlock;
  std::vector<detail::FrameBlockResult> blocks(n_blocks);

  auto run_block = [&](std::uint64_t b) {
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(n_frames, lo + kBlock);
    blocks[b] = detail::run_frame_block(plan, engine, lo, hi, seed, b, n_frames);
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  if (n_threads <= 1 || n_blocks <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::uint64_t> next{0};
    for (unsigned t = 0; t < std::min<std::uint64_t>(n_threads, n_blocks); ++t) {
      pool.emplace_back([&] {
        for (std::uint64_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1))
          run_block(b);
      });
    }
    for (auto& th : pool) th.join();
  }

  TagStream stream;
  stream.frame_period = plan.sequence.frame_period;
  stream.n_frames = n_frames;
  for (auto& b : blocks) {
    stream.tags.insert(stream.tags.end(), b.tags.begin(), b.tags.end());
    b.tags.clear();
  }
  std::stable_sort(stream.tags.begin(), stream.tags.end(),
                   [](const TimeTag& a, const TimeTag& b) {
                     return a.frame_index != b.frame_index
                                ? a.frame_index < b.frame_index
                                : a.time_in_frame < b.time_in_frame;
                   });

  stream.set_meta("preset", plan.name);
  stream.set_meta("sequence", to_string(plan.sequence.label));
  stream.set_meta("axis", plan.analyzer.axis ? to_string(*plan.analyzer.axis) : "none");
  stream.set_meta("mode", plan.importance_sampling ? "importance" : "plain");
  stream.set_meta("seed", std::to_string(seed));
  stream.set_meta("frames", std::to_string(n_frames));
  stream.set_meta("frame_period_ps", detail::format_double(s_to_ps(plan.sequence.frame_period)));
  stream.set_meta("delta_e_ghz", detail::format_double(angular_to_ghz(plan.model.delta_e)));
  stream.set_meta("delta_h_ghz", detail::format_double(angular_to_ghz(plan.model.delta_h)));
  stream.set_meta("gamma_per_s", detail::format_double(plan.model.gamma));
  stream.set_meta("entangled_window_ps",
                  detail::format_double(s_to_ps(plan.windows.entangled_lo)) + ":" +
                      detail::format_double(s_to_ps(plan.windows.entangled_hi)));
  stream.set_meta("readout_window_ps",
                  detail::format_double(s_to_ps(plan.windows.readout_lo)) + ":" +
                      detail::format_double(s_to_ps(plan.windows.readout_hi)));
  if (plan.windows.raman_time)
    stream.set_meta("raman_time_ps", detail::format_double(s_to_ps(*plan.windows.raman_time)));
  if (plan.windows.entangled_channel)
    stream.set_meta("entangled_channel",
                    *plan.windows.entangled_channel == Channel::A ? "A" : "B");
  stream.set_meta("leak_probability", detail::format_double(plan.analyzer.leak_probability));
  stream.set_meta("ideal_initialization", plan.ideal_initialization ? "1" : "0");
  stream.set_meta("off_resonant_coupling",
                  plan.physics.off_resonant_coupling ? "1" : "0");
  return stream;
}

}  // namespace spinphoton
