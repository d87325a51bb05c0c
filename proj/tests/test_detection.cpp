#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "spinphoton/detection.hpp"
#include "spinphoton/stats.hpp"
#include "spinphoton/units.hpp"

using namespace spinphoton;
using Catch::Approx;

namespace {

PhotonRecord entangled_photon(TrionState source = TrionState::TxMinus) {
  PhotonRecord record;
  record.emission_time = 0.0;
  record.amplitude_h = Complex{1.0 / std::sqrt(2.0), 0.0};
  record.amplitude_v = Complex{0.0, -1.0 / std::sqrt(2.0)};
  record.source = source;
  return record;
}

}  // namespace

TEST_CASE("analyzer H passes half the photons and projects the spin to x+") {
  Rng rng(1u);
  AnalyzerSetting setting{PhotonPol::H, 0.0};
  const auto record = entangled_photon();
  int passes = 0;
  const int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    const auto outcome = analyze_polarization(record, setting, rng);
    CHECK(outcome.pass_probability == Approx(0.5));
    if (outcome.passed) {
      ++passes;
      CHECK(std::abs(outcome.spin[0]) == Approx(1.0));
    } else {
      CHECK(std::abs(outcome.spin[1]) == Approx(1.0));
    }
  }
  CHECK(static_cast<double>(passes) / trials == Approx(0.5).margin(0.02));
}

TEST_CASE("analyzer sigma+ projects the spin onto z-") {
  Rng rng(2u);
  AnalyzerSetting setting{PhotonPol::SigmaPlus, 0.0};
  const auto record = entangled_photon();
  const auto outcome = analyze_polarization(record, setting, rng);
  CHECK(outcome.pass_probability == Approx(0.5));

  // 2-dim projection oracle: <axis|joint> accumulated by hand.
  const Eigen::Vector2cd axis = polarization_vector(PhotonPol::SigmaPlus);
  Eigen::Vector2cd oracle = Eigen::Vector2cd::Zero();
  oracle[0] += std::conj(axis[0]) * record.amplitude_h;  // H pairs x+
  oracle[1] += std::conj(axis[1]) * record.amplitude_v;  // V pairs x-
  CHECK(oracle.squaredNorm() == Approx(0.5));

  const StateVector z_minus = basis_transform(basis_ket(BasisTag::SpinZ, 1), BasisTag::SpinX);
  StateVector conditioned = outcome.passed
                                ? outcome.spin
                                : StateVector(oracle.normalized(), BasisTag::SpinX);
  CHECK(StateVector(oracle.normalized(), BasisTag::SpinX).equal_up_to_phase(z_minus));
  if (outcome.passed) CHECK(conditioned.equal_up_to_phase(z_minus));
}

TEST_CASE("orthogonal analyzer never passes and zero photons are rejected") {
  Rng rng(3u);
  PhotonRecord pure_h;
  pure_h.amplitude_h = 1.0;
  pure_h.amplitude_v = 0.0;
  AnalyzerSetting v_axis{PhotonPol::V, 0.0};
  for (int i = 0; i < 100; ++i) {
    const auto outcome = analyze_polarization(pure_h, v_axis, rng);
    CHECK(outcome.pass_probability == Approx(0.0).margin(1e-15));
    CHECK_FALSE(outcome.passed);
  }

  PhotonRecord zero;
  zero.amplitude_h = zero.amplitude_v = 0.0;
  CHECK_THROWS_AS(analyze_polarization(zero, v_axis, rng), std::invalid_argument);
}

TEST_CASE("analyzer Born probabilities for all four axes") {
  const auto record = entangled_photon();
  for (PhotonPol axis : {PhotonPol::H, PhotonPol::V, PhotonPol::SigmaPlus,
                         PhotonPol::SigmaMinus}) {
    Rng rng(17u + static_cast<unsigned>(axis));
    AnalyzerSetting setting{axis, 0.0};
    const int trials = 40000;
    int passes = 0;
    for (int i = 0; i < trials; ++i)
      if (analyze_polarization(record, setting, rng).passed) ++passes;
    const double sigma = std::sqrt(0.25 / trials);
    CHECK(std::abs(static_cast<double>(passes) / trials - 0.5) < 3.0 * sigma);
  }
}

TEST_CASE("HBT routing is an unbiased coin") {
  Rng rng(5u);
  const int n = 1000000;
  int a = 0;
  for (int i = 0; i < n; ++i)
    if (hbt_route(rng) == Channel::A) ++a;
  CHECK(static_cast<double>(a) / n == Approx(0.5).margin(0.002));

  Rng r1(99u), r2(99u);
  for (int i = 0; i < 1000; ++i) CHECK(hbt_route(r1) == hbt_route(r2));
}

TEST_CASE("ideal detector reproduces the emission time exactly") {
  Rng rng(6u);
  DetectorModel ideal{0.0, 1.0, 0.0, DetectorLabel::Standard};
  const auto hit = detect(ps_to_s(123.456), ideal, rng);
  REQUIRE(hit.has_value());
  CHECK(hit->time == ps_to_s(123.456));
  CHECK(hit->weight == 1.0);
}

TEST_CASE("48 ps FWHM jitter has sigma 20.4 ps and zero mean") {
  Rng rng(7u);
  DetectorModel fast{ps_to_s(48.0), 1.0, 0.0, DetectorLabel::FastTiming};
  const int n = 1000000;
  std::vector<double> errors_ps;
  errors_ps.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto hit = detect(0.0, fast, rng);
    errors_ps.push_back(s_to_ps(hit->time));
  }
  const auto ms = stats::mean_std(errors_ps);
  CHECK(ms.stddev == Approx(48.0 * kFwhmToSigma).epsilon(0.02));
  CHECK(std::abs(ms.mean) < 0.5);
}

TEST_CASE("detection thinning is binomial") {
  DetectorModel dim{0.0, 4e-5, 0.0, DetectorLabel::Standard};
  Rng rng(8u);
  const int offered = 10000000;
  int tags = 0;
  for (int i = 0; i < offered; ++i)
    if (detect(0.0, dim, rng)) ++tags;
  CHECK(std::abs(tags - 400) <= 60);  // 3 sigma of Binomial(1e7, 4e-5)

  // Counts across repeated seeds match the binomial variance.
  DetectorModel mid{0.0, 0.3, 0.0, DetectorLabel::Standard};
  const int n = 2000, seeds = 200;
  std::vector<double> counts;
  for (int s = 0; s < seeds; ++s) {
    Rng r(1000u + s);
    int k = 0;
    for (int i = 0; i < n; ++i)
      if (detect(0.0, mid, r)) ++k;
    counts.push_back(static_cast<double>(k));
  }
  const double expected_var = n * 0.3 * 0.7;
  CHECK(stats::variance_chi2_two_sided_pvalue(counts, expected_var) > 0.01);
}

TEST_CASE("importance mode records every photon with weight = efficiency") {
  Rng rng(9u);
  DetectorModel dim{0.0, 4e-5, 0.0, DetectorLabel::Standard};
  for (int i = 0; i < 1000; ++i) {
    const auto hit = detect(ps_to_s(1.0), dim, rng, true);
    REQUIRE(hit.has_value());
    CHECK(hit->weight == 4e-5);
  }
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(validate_detector(DetectorModel{0.0, 1.5, 0.0, DetectorLabel::Standard}),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_detector(DetectorModel{-1.0, 0.5, 0.0, DetectorLabel::Standard}),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_analyzer(AnalyzerSetting{PhotonPol::H, 0.2}),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_analyzer(AnalyzerSetting{PhotonPol::H, 0.05}));
}
