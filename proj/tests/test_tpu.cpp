#include <doctest.h>

#include <cmath>

#include "fpp/phase.hpp"
#include "fpp/rng.hpp"
#include "fpp/sim.hpp"
#include "fpp/tpu.hpp"

using namespace fpp;

namespace {

AbsolutePhaseMap const_abs(double value, int period = 1, std::size_t n = 2) {
  return {Grid(n, n, value), period};
}

PhaseMap const_wrapped(double value, int period, std::size_t n = 2) {
  return {Grid(n, n, value), period};
}

// DF-TPU error rate under Gaussian noise on the unit phase, sampled away
// from the clamp bands at both ends.
double dftpu_error_rate(double sigma, int ratio, int samples, Rng& rng) {
  int errors = 0;
  for (int i = 0; i < samples; ++i) {
    const double phi_low = rng.uniform(0.2, 2.0 * M_PI - 0.8);
    const double phi_abs_high = ratio * phi_low;
    const double phi_high = phase::wrap(phi_abs_high);
    const double k_true = std::round((phi_abs_high - phi_high) / (2.0 * M_PI));

    const double noisy_low = phi_low + rng.gaussian(0.0, sigma);
    double k = std::round((ratio * noisy_low - phi_high) / (2.0 * M_PI));
    k = std::clamp(k, 0.0, static_cast<double>(ratio - 1));
    if (k != k_true) ++errors;
  }
  return static_cast<double>(errors) / samples;
}

}  // namespace

TEST_CASE("frequency set validation") {
  CHECK_NOTHROW(FrequencySet::of({1, 4, 16, 64}));
  CHECK_NOTHROW(FrequencySet::of({1, 64}));
  CHECK_THROWS_AS(FrequencySet::of({4, 16}), std::invalid_argument);
  CHECK_THROWS_AS(FrequencySet::of({1, 16, 4}), std::invalid_argument);
  CHECK_THROWS_AS(FrequencySet::of({1, 3, 16}), std::invalid_argument);  // 16/3
  CHECK_THROWS_AS(FrequencySet::of({}), std::invalid_argument);
}

TEST_CASE("unwrap_two_freq closed-form examples") {
  SUBCASE("zero everywhere") {
    const tpu::TwoFreqResult r =
        tpu::unwrap_two_freq(const_abs(0.0), const_wrapped(0.0, 64), 64);
    CHECK(r.order.values(0, 0) == 0.0);
    CHECK(r.absolute.values(0, 0) == 0.0);
    CHECK(r.absolute.period_number == 64);
  }
  SUBCASE("Phi_low = 0.1 lifts the high map by one period") {
    const double phi_high = phase::wrap(6.4);
    const tpu::TwoFreqResult r =
        tpu::unwrap_two_freq(const_abs(0.1), const_wrapped(phi_high, 64), 64);
    CHECK(r.order.values(0, 0) == 1.0);
    CHECK(r.absolute.values(0, 0) == doctest::Approx(6.4).epsilon(1e-9));
  }
  SUBCASE("size mismatch") {
    AbsolutePhaseMap low{Grid(2, 3, 0.0), 1};
    CHECK_THROWS_AS(tpu::unwrap_two_freq(low, const_wrapped(0.0, 64), 64),
                    std::invalid_argument);
  }
  SUBCASE("noise beyond pi/ratio flips the order") {
    // |ratio*eps_low - eps_high| > pi  =>  k off by one
    const double eps = 1.2 * M_PI / 64.0;
    const double phi_high = phase::wrap(6.4);
    const tpu::TwoFreqResult r = tpu::unwrap_two_freq(
        const_abs(0.1 + eps), const_wrapped(phi_high, 64), 64);
    CHECK(r.order.values(0, 0) == 2.0);
  }
}

TEST_CASE("unit_absolute_phase shifts (-pi, pi] to [0, 2pi)") {
  PhaseMap unit{Grid(1, 3), 1};
  unit.values(0, 0) = -3.0;
  unit.values(0, 1) = 0.5;
  unit.values(0, 2) = M_PI;
  const AbsolutePhaseMap abs = tpu::unit_absolute_phase(unit);
  CHECK(abs.values(0, 0) == doctest::Approx(2.0 * M_PI - 3.0));
  CHECK(abs.values(0, 1) == 0.5);
  CHECK(abs.values(0, 2) == doctest::Approx(M_PI));
  CHECK_THROWS_AS(tpu::unit_absolute_phase(const_wrapped(0.0, 4)),
                  std::invalid_argument);
}

TEST_CASE("unwrap_hierarchical on a noiseless simulated scene is exact") {
  SystemGeometry geom;
  geom.camera_width = 48;
  geom.camera_height = 48;
  geom.period_number = 64;
  const FrequencySet freqs = FrequencySet::of({1, 4, 16, 64});

  SceneParams params;
  params.radius = 2.0;
  params.z0 = 0.5;
  const SceneSpec scene = sim::make_scene(SceneKind::Hemisphere, params, geom, 5);
  const sim::CameraPhase truth = sim::camera_absolute_phase(scene, geom, 64);

  std::vector<PhaseMap> wrapped;
  for (int p : freqs.periods)
    wrapped.push_back(
        phase::extract_wrapped_phase(sim::render_scene(scene, geom, p, 4, 11)));

  const tpu::HierarchicalResult r = tpu::unwrap_hierarchical(freqs, wrapped);
  std::size_t valid = 0;
  for (std::size_t i = 0; i < truth.valid.size(); ++i) {
    if (!truth.valid[i]) continue;
    ++valid;
    CHECK(std::abs(r.absolute.values[i] - truth.phase.values[i]) < 1e-6);
    const double k_true = std::round(
        (truth.phase.values[i] - phase::wrap(truth.phase.values[i])) / (2.0 * M_PI));
    CHECK(r.order.values[i] == k_true);
  }
  CHECK(valid > 1000);
}

TEST_CASE("a two-element chain reduces to DF-TPU exactly") {
  Rng rng(3);
  PhaseMap unit{Grid(6, 6), 1}, high{Grid(6, 6), 64};
  for (std::size_t i = 0; i < unit.values.size(); ++i) {
    const double phi = rng.uniform(0.0, 2.0 * M_PI * 0.95);
    unit.values[i] = phase::wrap(phi);
    high.values[i] = phase::wrap(64.0 * phi);
  }
  const tpu::HierarchicalResult chain =
      tpu::unwrap_hierarchical(FrequencySet::of({1, 64}), {unit, high});
  const tpu::TwoFreqResult direct =
      tpu::unwrap_two_freq(tpu::unit_absolute_phase(unit), high, 64);
  CHECK(chain.absolute.values == direct.absolute.values);
  CHECK(chain.order.values == direct.order.values);
}

TEST_CASE("all-zero wrapped maps unwrap to zero") {
  std::vector<PhaseMap> wrapped = {const_wrapped(0.0, 1, 4),
                                   const_wrapped(0.0, 4, 4),
                                   const_wrapped(0.0, 16, 4)};
  const tpu::HierarchicalResult r =
      tpu::unwrap_hierarchical(FrequencySet::of({1, 4, 16}), wrapped);
  for (double v : r.absolute.values) CHECK(v == 0.0);
  for (double v : r.order.values) CHECK(v == 0.0);
}

TEST_CASE("round_order clamps and rounds half to even") {
  FringeOrderMap soft{Grid(1, 4), FringeOrderMap::Kind::Soft};
  soft.values(0, 0) = 31.4;
  soft.values(0, 1) = 64.0;
  soft.values(0, 2) = 2.5;
  soft.values(0, 3) = -0.4;
  const FringeOrderMap k = tpu::round_order(soft, 64);
  CHECK(k.values(0, 0) == 31.0);
  CHECK(k.values(0, 1) == 63.0);  // clamp
  CHECK(k.values(0, 2) == 2.0);   // half to even
  CHECK(k.values(0, 3) == 0.0);

  FringeOrderMap integer{Grid(1, 1, 0.0), FringeOrderMap::Kind::Integer};
  CHECK_THROWS_AS(tpu::round_order(integer, 64), std::invalid_argument);
}

TEST_CASE("DF-TPU order-error rate vs unit-phase noise") {
  Rng rng(2024);
  const int samples = 20000;

  SUBCASE("failure threshold around r*sigma ~ pi") {
    const double high = dftpu_error_rate(M_PI / 32.0, 64, samples, rng);
    const double low = dftpu_error_rate(M_PI / 640.0, 64, samples, rng);
    CHECK(high > 0.01);
    CHECK(low < 0.001);
  }

  SUBCASE("monotone degradation over a sigma grid") {
    // Allow two-sigma Monte-Carlo slack per step.
    double prev = -1.0;
    for (const double sigma :
         {M_PI / 640.0, M_PI / 128.0, M_PI / 64.0, M_PI / 32.0, M_PI / 16.0}) {
      const double rate = dftpu_error_rate(sigma, 64, samples, rng);
      const double slack =
          2.0 * std::sqrt(std::max(rate, 1e-4) * (1.0 - rate) / samples);
      CHECK(rate >= prev - slack);
      prev = rate;
    }
  }
}
