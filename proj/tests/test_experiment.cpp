#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <sstream>

#include "spinphoton/experiment.hpp"
#include "spinphoton/lindblad.hpp"
#include "spinphoton/tagio.hpp"
#include "spinphoton/units.hpp"

using namespace spinphoton;
using Catch::Approx;

namespace {

QdModel paper_model(double gamma = 1e9) {
  return build_qd_model(ghz_to_angular(7.35), ghz_to_angular(1.8), gamma, 1.1);
}

struct WindowSums {
  std::map<std::int64_t, double> entangled, readout;
};

WindowSums window_sums(const TagStream& stream, const MeasurementWindows& w) {
  WindowSums sums;
  for (const auto& tag : stream.tags) {
    if (tag.time_in_frame >= w.entangled_lo && tag.time_in_frame < w.entangled_hi) {
      if (!w.entangled_channel || tag.channel == *w.entangled_channel)
        sums.entangled[tag.frame_index] += tag.weight;
    }
    if (tag.time_in_frame >= w.readout_lo && tag.time_in_frame < w.readout_hi)
      sums.readout[tag.frame_index] += tag.weight;
  }
  return sums;
}

}  // namespace

TEST_CASE("no decay and no leak produce an empty stream") {
  auto plan = make_plan(PresetKind::XPlusGivenH, paper_model(1.0));
  plan.analyzer.leak_probability = 0.0;
  const auto stream = run_experiment(plan, 2000, 11, 1);
  CHECK(stream.tags.empty());
  CHECK(stream.n_frames == 2000);
}

TEST_CASE("runs are deterministic for a fixed seed") {
  auto plan = make_plan(PresetKind::XPlusGivenH, paper_model());
  const auto a = run_experiment(plan, 1500, 77, 1);
  const auto b = run_experiment(plan, 1500, 77, 1);
  std::ostringstream sa, sb;
  write_tag_stream(sa, a);
  write_tag_stream(sb, b);
  CHECK(sa.str() == sb.str());

  const auto c = run_experiment(plan, 1500, 78, 1);
  std::ostringstream sc;
  write_tag_stream(sc, c);
  CHECK(sa.str() != sc.str());
}

TEST_CASE("x-basis coincidence structure follows the spin collapse") {
  // Ideal detectors: every analyzer-passed photon is tagged with no jitter.
  DetectorDefaults det;
  det.standard_efficiency = 1.0;
  det.standard_jitter_fwhm_ps = 0.0;
  const QdModel model = paper_model();
  auto plan = make_plan(PresetKind::XPlusGivenH, model, {}, det);
  plan.importance_sampling = false;

  const std::uint64_t frames = 20000;
  const auto stream = run_experiment(plan, frames, 4321, 1);
  const auto sums = window_sums(stream, plan.windows);

  // Entangled-photon tag probability: analyzer passes half of the window's
  // emission flux. The flux comes from an independent master-equation run.
  const auto lind = lindblad_evolve(model, plan.sequence,
                                    basis_ket(BasisTag::SpinX, 1));
  double flux = 0.0;
  for (std::size_t i = 1; i < lind.times.size(); ++i) {
    const double t = lind.times[i];
    if (t <= plan.windows.entangled_lo || t > plan.windows.entangled_hi) continue;
    const double dt = lind.times[i] - lind.times[i - 1];
    flux += model.gamma * lind.populations(i)[kIdxTxMinus] * dt;
  }
  const double p_tag_expected = 0.5 * flux;
  const double p_tag = static_cast<double>(sums.entangled.size()) / frames;
  const double sigma = std::sqrt(p_tag_expected * (1 - p_tag_expected) / frames);
  CHECK(std::abs(p_tag - p_tag_expected) < 3.0 * sigma + 0.003);

  // Frames with an H tag hold the spin in x+, so the readout pulse scatters;
  // frames without one were projected to x- and stay dark.
  std::uint64_t with_both = 0, without_e_but_r = 0, with_e = 0;
  for (std::uint64_t f = 0; f < frames; ++f) {
    const bool e = sums.entangled.count(static_cast<std::int64_t>(f)) > 0;
    const bool r = sums.readout.count(static_cast<std::int64_t>(f)) > 0;
    if (e) {
      ++with_e;
      if (r) ++with_both;
    } else if (r) {
      ++without_e_but_r;
    }
  }
  const double p_r_given_e = static_cast<double>(with_both) / with_e;
  const double p_r_given_not_e =
      static_cast<double>(without_e_but_r) / (frames - with_e);
  CHECK(p_r_given_e > 0.5);
  CHECK(p_r_given_not_e < 0.1);
  CHECK(p_r_given_e > 10.0 * p_r_given_not_e);
}

TEST_CASE("entangled-photon tag rate matches efficiency x frame rate") {
  // Pass-through analyzer and a window covering the full decay; the pump is
  // left out so the only photon per frame is the entangled one.
  const QdModel model = paper_model();
  auto plan = make_plan(PresetKind::XPlusGivenH, model);
  plan.analyzer.axis.reset();
  plan.analyzer.leak_probability = 0.0;
  plan.importance_sampling = false;
  plan.sequence.pulses.resize(1);  // excitation only
  plan.windows.entangled_lo = ps_to_s(260.0);
  plan.windows.entangled_hi = ps_to_s(8400.0);
  DetectorModel det{0.0, 4e-5, 0.0, DetectorLabel::Standard};
  plan.detector_a = plan.detector_b = det;

  const std::uint64_t frames = 1000000;
  const auto stream = run_experiment(plan, frames, 20240, 1);
  double tags = 0;
  for (const auto& tag : stream.tags)
    if (tag.time_in_frame >= plan.windows.entangled_lo &&
        tag.time_in_frame < plan.windows.entangled_hi)
      tags += 1.0;

  const double p_window = std::exp(-model.gamma * (plan.windows.entangled_lo - ps_to_s(250.0)));
  const double expected = frames * 4e-5 * p_window;
  CHECK(std::abs(tags - expected) <= 3.0 * std::sqrt(expected));

  const double rate = tags / (static_cast<double>(frames) * stream.frame_period);
  const double paper_rate = 4e-5 * 76e6;
  CHECK(rate == Approx(paper_rate).epsilon(0.5));
}

TEST_CASE("importance weights reproduce plain-mode statistics") {
  const QdModel model = paper_model();
  DetectorDefaults det;
  det.standard_efficiency = 0.1;
  det.standard_jitter_fwhm_ps = 0.0;
  auto plan = make_plan(PresetKind::XPlusGivenH, model, {}, det);

  const std::uint64_t frames = 100000;
  plan.importance_sampling = false;
  const auto plain = run_experiment(plan, frames, 5150, 1);
  plan.importance_sampling = true;
  const auto weighted = run_experiment(plan, frames, 5151, 1);
  CHECK(*weighted.find_meta("mode") == std::string("importance"));

  // Compare weighted totals in four coarse windows.
  const double period = plan.sequence.frame_period;
  auto weighted_counts = [&](const TagStream& s) {
    std::array<double, 4> bins{};
    std::array<double, 4> var{};
    for (const auto& tag : s.tags) {
      const auto b = std::min<std::size_t>(
          3, static_cast<std::size_t>(4.0 * tag.time_in_frame / period));
      bins[b] += tag.weight;
      var[b] += tag.weight * tag.weight;
    }
    return std::pair{bins, var};
  };
  const auto [pb, pv] = weighted_counts(plain);
  const auto [wb, wv] = weighted_counts(weighted);
  for (std::size_t b = 0; b < 4; ++b) {
    const double sigma = std::sqrt(pv[b] + wv[b]);
    CHECK(std::abs(pb[b] - wb[b]) <= 3.0 * sigma + 1e-9);
  }
}

TEST_CASE("leak events appear at the configured per-frame probability") {
  auto plan = make_plan(PresetKind::XPlusGivenH, paper_model(1.0));  // no QD emission
  plan.analyzer.leak_probability = 0.04;
  plan.importance_sampling = false;
  DetectorModel det{0.0, 1.0, 0.0, DetectorLabel::Standard};
  plan.detector_a = plan.detector_b = det;
  const std::uint64_t frames = 50000;
  const auto stream = run_experiment(plan, frames, 31, 1);
  double leaks = 0;
  for (const auto& tag : stream.tags) {
    CHECK(tag.kind == TagKind::Leak);
    CHECK(tag.time_in_frame >= plan.windows.entangled_lo);
    CHECK(tag.time_in_frame < plan.windows.entangled_hi);
    leaks += 1.0;
  }
  const double expected = 0.04 * frames;
  CHECK(std::abs(leaks - expected) < 3.0 * std::sqrt(expected));
}

TEST_CASE("tag files round-trip and reject malformed lines") {
  auto plan = make_plan(PresetKind::ZSigmaPlus, paper_model(), {}, {}, 0.0);
  const auto stream = run_experiment(plan, 3000, 99, 1);
  REQUIRE(!stream.tags.empty());

  std::ostringstream os;
  write_tag_stream(os, stream, /*blind=*/false);
  std::istringstream is(os.str());
  const auto back = read_tag_stream(is);
  REQUIRE(back.tags.size() == stream.tags.size());
  CHECK(back.frame_period == Approx(stream.frame_period));
  CHECK(back.n_frames == stream.n_frames);
  CHECK(*back.find_meta("preset") == std::string("z_sigma_plus"));
  for (std::size_t i = 0; i < back.tags.size(); ++i) {
    CHECK(back.tags[i].frame_index == stream.tags[i].frame_index);
    CHECK(back.tags[i].channel == stream.tags[i].channel);
    CHECK(back.tags[i].kind == stream.tags[i].kind);
    CHECK(back.tags[i].time_in_frame ==
          Approx(stream.tags[i].time_in_frame).margin(1e-15));
  }

  // Blind export strips the truth column.
  std::ostringstream blind;
  write_tag_stream(blind, stream, /*blind=*/true);
  CHECK(blind.str().find("signal") == std::string::npos);

  std::istringstream bad("# spinphoton-tags v1\n0\tA\t12.0\n");
  try {
    read_tag_stream(bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line_number == 2);
  }

  std::istringstream bad_channel("0\tQ\t12.0\t1.0\n");
  CHECK_THROWS_AS(read_tag_stream(bad_channel), DataError);

  // An empty stream is a valid file.
  TagStream empty;
  empty.set_meta("frames", "0");
  empty.set_meta("frame_period_ps", "13157.894737");
  std::ostringstream eos;
  write_tag_stream(eos, empty);
  std::istringstream eis(eos.str());
  const auto eback = read_tag_stream(eis);
  CHECK(eback.tags.empty());
}

TEST_CASE("z-basis stream carries the fast channel and Raman metadata") {
  auto plan = make_plan(PresetKind::ZSigmaPlus, paper_model());
  const auto stream = run_experiment(plan, 100, 1, 1);
  REQUIRE(stream.find_meta("raman_time_ps") != nullptr);
  CHECK(*stream.find_meta("entangled_channel") == std::string("A"));
  CHECK(*stream.find_meta("axis") == std::string("s+"));
  CHECK(plan.detector_a.label == DetectorLabel::FastTiming);
  CHECK(plan.detector_a.efficiency == Approx(4e-6));
}
