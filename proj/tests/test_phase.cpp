#include <doctest.h>

#include <cmath>

#include "fpp/phase.hpp"
#include "fpp/rng.hpp"

using namespace fpp;

namespace {

// Independent wrap oracle: repeated subtraction instead of fmod.
double wrap_by_subtraction(double x) {
  while (x > M_PI) x -= 2.0 * M_PI;
  while (x <= -M_PI) x += 2.0 * M_PI;
  return x;
}

FringeImageSet images_from_phase(const Grid& phi, double a_bg, double b_mod,
                                 int n_steps, int period_number = 1) {
  FringeImageSet set;
  set.steps = n_steps;
  set.period_number = period_number;
  for (int n = 0; n < n_steps; ++n) {
    Grid img(phi.rows(), phi.cols());
    for (std::size_t i = 0; i < phi.size(); ++i)
      img[i] = a_bg + b_mod * std::cos(phi[i] + 2.0 * M_PI * n / n_steps);
    set.images.push_back(std::move(img));
  }
  return set;
}

}  // namespace

TEST_CASE("generate_patterns evaluates the cosine model") {
  const FringeImageSet set = phase::generate_patterns(4, 2, 1, 4, 128.0, 100.0);
  REQUIRE(set.images.size() == 4);
  const Grid& img0 = set.images[0];
  CHECK(img0(0, 0) == doctest::Approx(228.0).epsilon(1e-12));
  CHECK(img0(0, 1) == doctest::Approx(128.0).epsilon(1e-9));
  CHECK(img0(0, 2) == doctest::Approx(28.0).epsilon(1e-12));
  CHECK(img0(0, 3) == doctest::Approx(128.0).epsilon(1e-9));
}

TEST_CASE("generate_patterns rejects bad arguments") {
  CHECK_THROWS_AS(phase::generate_patterns(4, 4, 0, 4, 128, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(phase::generate_patterns(4, 4, 1, 2, 128, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(phase::generate_patterns(0, 4, 1, 4, 128, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(phase::generate_patterns(4, 4, 1, 4, 100, 128),
                  std::invalid_argument);
}

TEST_CASE("generate_patterns period shows up as the autocorrelation peak") {
  // 64 periods over 684 columns: exact self-similarity at 171 columns
  // (16 whole fringes), and the best fractional lag is where 64*L/684 is
  // closest to an integer.
  const FringeImageSet set = phase::generate_patterns(684, 1, 64, 4, 128, 100);
  const Grid& img = set.images[0];

  for (std::size_t x = 0; x + 171 < 684; ++x)
    CHECK(img(0, x) == doctest::Approx(img(0, x + 171)).epsilon(1e-9));

  int best_lag = 0;
  double best_closeness = 1.0;
  for (int lag = 1; lag <= 100; ++lag) {
    const double cycles = 64.0 * lag / 684.0;
    const double closeness = std::abs(cycles - std::round(cycles));
    if (closeness < best_closeness) {
      best_closeness = closeness;
      best_lag = lag;
    }
  }

  int best_corr_lag = 0;
  double best_corr = -1e300;
  for (int lag = 1; lag <= 100; ++lag) {
    double corr = 0.0;
    for (std::size_t x = 0; x + 100 < 684; ++x)
      corr += (img(0, x) - 128.0) *
              (img(0, x + static_cast<std::size_t>(lag)) - 128.0);
    if (corr > best_corr) {
      best_corr = corr;
      best_corr_lag = lag;
    }
  }
  CHECK(best_corr_lag == best_lag);
}

TEST_CASE("extract_wrapped_phase matches the arctangent examples") {
  SUBCASE("phase zero") {
    Grid phi(1, 1, 0.0);
    const PhaseMap out =
        phase::extract_wrapped_phase(images_from_phase(phi, 128, 100, 4));
    CHECK(out.values(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("phase pi/2 from the symbolic substitution") {
    FringeImageSet set;
    set.steps = 4;
    set.period_number = 1;
    for (double v : {128.0, 28.0, 128.0, 228.0})
      set.images.push_back(Grid(1, 1, v));
    const PhaseMap out = phase::extract_wrapped_phase(set);
    CHECK(out.values(0, 0) == doctest::Approx(M_PI / 2).epsilon(1e-12));
  }
  SUBCASE("constant images are degenerate, not an error") {
    FringeImageSet set;
    set.steps = 4;
    set.period_number = 1;
    for (int n = 0; n < 4; ++n) set.images.push_back(Grid(2, 2, 128.0));
    const PhaseMap out = phase::extract_wrapped_phase(set);
    const ModulationMap mod = phase::extract_modulation(set);
    CHECK(out.values(0, 0) == 0.0);
    CHECK(mod.modulation(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mod.background(0, 0) == doctest::Approx(128.0).epsilon(1e-12));
  }
}

TEST_CASE("extract_modulation recovers A and B") {
  Grid phi(1, 1, M_PI / 2);
  const ModulationMap mod =
      phase::extract_modulation(images_from_phase(phi, 128, 100, 4));
  CHECK(mod.modulation(0, 0) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(mod.background(0, 0) == doctest::Approx(128.0).epsilon(1e-12));

  const FringeImageSet flat = phase::generate_patterns(8, 2, 1, 4, 128.0, 0.0);
  const ModulationMap mod_flat = phase::extract_modulation(flat);
  for (std::size_t i = 0; i < mod_flat.modulation.size(); ++i)
    CHECK(mod_flat.modulation[i] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("wrap maps into (-pi, pi] with -pi -> pi") {
  CHECK(phase::wrap(0.0) == 0.0);
  CHECK(phase::wrap(6.4) == doctest::Approx(6.4 - 2 * M_PI).epsilon(1e-12));
  CHECK(phase::wrap(-M_PI) == doctest::Approx(M_PI));
  CHECK(phase::wrap(M_PI) == doctest::Approx(M_PI));

  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-50.0, 50.0);
    const double w = phase::wrap(x);
    CHECK(w > -M_PI);
    CHECK(w <= M_PI);
    CHECK(w == doctest::Approx(wrap_by_subtraction(x)).epsilon(1e-9));
    CHECK(phase::wrap(w) == w);  // idempotent
    CHECK(std::remainder(w - x, 2.0 * M_PI) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  }
}

TEST_CASE("projector_phase_maps gives the two plane ramps") {
  SystemGeometry geom;
  geom.period_number = 64;
  auto [low, high] = phase::projector_phase_maps(geom);
  CHECK(low.values(0, 0) == 0.0);
  CHECK(high.values(0, 0) == 0.0);
  CHECK(low.values(10, 342) == doctest::Approx(M_PI));
  CHECK(high.values(10, 342) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  // constant along rows
  CHECK(low.values(0, 100) == low.values(607, 100));
  // monotone before the wrap boundary
  for (std::size_t x = 0; x < 341; ++x)
    CHECK(low.values(0, x) < low.values(0, x + 1));
}

TEST_CASE("round trip: noiseless N-step images reproduce wrap(Phi) to 1e-9") {
  Rng rng(99);
  const int a = 16;
  Grid phi(24, 24);
  for (double& v : phi) v = rng.uniform(0.0, 2.0 * M_PI * a);
  const double a_bg = rng.uniform(50.0, 200.0);
  const double b_mod = rng.uniform(10.0, a_bg);
  const PhaseMap out =
      phase::extract_wrapped_phase(images_from_phase(phi, a_bg, b_mod, 4, a));
  for (std::size_t i = 0; i < phi.size(); ++i)
    CHECK(std::abs(phase::wrap(out.values[i] - phi[i])) < 1e-9);
}

TEST_CASE("phase extraction invariances") {
  Rng rng(7);
  Grid phi(8, 8);
  for (double& v : phi) v = rng.uniform(-3.0, 3.0);
  const FringeImageSet base = images_from_phase(phi, 128, 77, 5);
  const PhaseMap ref = phase::extract_wrapped_phase(base);
  const ModulationMap ref_mod = phase::extract_modulation(base);

  SUBCASE("scaling by a power of two is exact") {
    FringeImageSet scaled = base;
    for (Grid& img : scaled.images)
      for (double& v : img) v *= 4.0;
    const PhaseMap out = phase::extract_wrapped_phase(scaled);
    for (std::size_t i = 0; i < phi.size(); ++i)
      CHECK(out.values[i] == ref.values[i]);
    const ModulationMap mod = phase::extract_modulation(scaled);
    for (std::size_t i = 0; i < phi.size(); ++i)
      CHECK(mod.modulation[i] ==
            doctest::Approx(4.0 * ref_mod.modulation[i]).epsilon(1e-12));
  }
  SUBCASE("generic positive scaling within double rounding") {
    FringeImageSet scaled = base;
    for (Grid& img : scaled.images)
      for (double& v : img) v *= 1.7;
    const PhaseMap out = phase::extract_wrapped_phase(scaled);
    for (std::size_t i = 0; i < phi.size(); ++i)
      CHECK(out.values[i] == doctest::Approx(ref.values[i]).epsilon(1e-12));
  }
  SUBCASE("constant offset cancels in the sums") {
    FringeImageSet shifted = base;
    for (Grid& img : shifted.images)
      for (double& v : img) v += 1000.0;
    const PhaseMap out = phase::extract_wrapped_phase(shifted);
    for (std::size_t i = 0; i < phi.size(); ++i)
      CHECK(out.values[i] == doctest::Approx(ref.values[i]).epsilon(1e-9));
    const ModulationMap mod = phase::extract_modulation(shifted);
    for (std::size_t i = 0; i < phi.size(); ++i)
      CHECK(mod.modulation[i] ==
            doctest::Approx(ref_mod.modulation[i]).epsilon(1e-6));
  }
}

TEST_CASE("fringe set validation") {
  FringeImageSet set;
  set.steps = 3;
  set.images.push_back(Grid(2, 2, 0.0));
  set.images.push_back(Grid(2, 2, 0.0));
  CHECK_THROWS_AS(set.validate(), std::invalid_argument);  // count mismatch
  set.images.push_back(Grid(2, 3, 0.0));
  CHECK_THROWS_AS(set.validate(), std::invalid_argument);  // shape mismatch
  set.images.back() = Grid(2, 2, 0.0);
  CHECK_NOTHROW(set.validate());
}
