#include <doctest.h>

#include <cmath>

#include "fpp/eval.hpp"
#include "fpp/rng.hpp"

using namespace fpp;

TEST_CASE("preprocess_mask pipeline") {
  SUBCASE("uniform modulation above threshold keeps everything") {
    ModulationMap mod{Grid(16, 16, 0.0), Grid(16, 16, 100.0)};
    const Mask mask = eval::preprocess_mask(mod);
    CHECK(count_true(mask) == 256);
  }
  SUBCASE("a single isolated pixel dies in the opening") {
    ModulationMap mod{Grid(16, 16, 0.0), Grid(16, 16, 0.0)};
    mod.modulation(8, 8) = 50.0;
    const Mask mask = eval::preprocess_mask(mod);
    CHECK(count_true(mask) == 0);
  }
  SUBCASE("components below the area fraction are dropped") {
    // 64x64 image: 1% is ~41 pixels. A 6x6 block (36 px) survives opening
    // but falls under the area cut; a 10x10 block (100 px) stays.
    ModulationMap mod{Grid(64, 64, 0.0), Grid(64, 64, 0.0)};
    for (std::size_t y = 4; y < 10; ++y)
      for (std::size_t x = 4; x < 10; ++x) mod.modulation(y, x) = 50.0;
    for (std::size_t y = 30; y < 40; ++y)
      for (std::size_t x = 30; x < 40; ++x) mod.modulation(y, x) = 50.0;
    const Mask mask = eval::preprocess_mask(mod);
    CHECK(mask(6, 6) == 0);
    CHECK(mask(35, 35) == 1);
  }
  SUBCASE("thresholding alone is monotone in the threshold") {
    Rng rng(12);
    Grid modulation(24, 24);
    for (double& v : modulation) v = rng.uniform(0.0, 20.0);
    const double thresholds[] = {0.0, 2.0, 4.0, 8.0, 16.0};
    for (std::size_t t = 1; t < std::size(thresholds); ++t) {
      const Mask lo = eval::threshold_mask(modulation, thresholds[t - 1]);
      const Mask hi = eval::threshold_mask(modulation, thresholds[t]);
      for (std::size_t i = 0; i < lo.size(); ++i)
        if (hi[i]) CHECK(lo[i] == 1);  // raising never adds pixels
    }
  }
  SUBCASE("morphological opening removes thin protrusions only") {
    Mask m(12, 12, 0);
    for (std::size_t y = 2; y < 9; ++y)
      for (std::size_t x = 2; x < 9; ++x) m(y, x) = 1;
    m(5, 10) = 1;  // lone spur
    const Mask opened = eval::morphological_open3x3(m);
    CHECK(opened(5, 10) == 0);
    CHECK(opened(5, 5) == 1);
  }
}

TEST_CASE("depth_rmse") {
  Grid truth(8, 8, 1.0);
  const Mask mask(8, 8, 1);
  SUBCASE("identical maps give zero") {
    CHECK(eval::depth_rmse(truth, truth, mask) == 0.0);
  }
  SUBCASE("a uniform 0.1 mm offset gives 0.1") {
    Grid pred = truth;
    for (double& v : pred) v += 0.1;
    CHECK(eval::depth_rmse(pred, truth, mask) == doctest::Approx(0.1));
  }
  SUBCASE("shared translation leaves the error unchanged") {
    Rng rng(8);
    Grid pred = truth;
    for (double& v : pred) v += rng.uniform(-0.3, 0.3);
    const double base = eval::depth_rmse(pred, truth, mask);
    Grid pred_shift = pred, truth_shift = truth;
    for (double& v : pred_shift) v += 7.0;
    for (double& v : truth_shift) v += 7.0;
    CHECK(eval::depth_rmse(pred_shift, truth_shift, mask) ==
          doctest::Approx(base).epsilon(1e-12));
  }
  SUBCASE("valid range filters on the truth") {
    Grid pred = truth;
    Grid wild = truth;
    wild(0, 0) = 1000.0;  // outside the valid range; excluded
    pred(0, 0) = -1000.0;
    CHECK(eval::depth_rmse(pred, wild, mask) == 0.0);
  }
  SUBCASE("no qualifying pixels is an error") {
    CHECK_THROWS_AS(eval::depth_rmse(truth, truth, Mask(8, 8, 0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(eval::depth_rmse(truth, truth, mask, {2.0, 3.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(eval::depth_rmse(truth, truth, mask, {3.0, 2.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("fringe_order_accuracy") {
  Grid truth(4, 4, 5.0);
  const Mask mask(4, 4, 1);
  SUBCASE("exact match") {
    CHECK(eval::fringe_order_accuracy(truth, truth, mask) == 1.0);
  }
  SUBCASE("uniform off-by-one") {
    Grid pred = truth;
    for (double& v : pred) v += 1.0;
    CHECK(eval::fringe_order_accuracy(pred, truth, mask) == 0.0);
  }
  SUBCASE("empty mask") {
    CHECK_THROWS_AS(eval::fringe_order_accuracy(truth, truth, Mask(4, 4, 0)),
                    std::invalid_argument);
  }
}

TEST_CASE("fit_sphere") {
  SUBCASE("five exact points on a radius-5 sphere") {
    const std::vector<std::array<double, 3>> points = {
        {5, 0, 0}, {-5, 0, 0}, {0, 5, 0}, {0, -5, 0}, {0, 0, 5}};
    const eval::SphereFit fit = eval::fit_sphere(points);
    CHECK(fit.diameter == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(fit.rms_residual < 1e-12);
    CHECK(std::abs(fit.center[0]) < 1e-12);
  }
  SUBCASE("exact on random noise-free spheres of any radius and center") {
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
      const double r = rng.uniform(0.5, 30.0);
      const std::array<double, 3> c = {rng.uniform(-10, 10), rng.uniform(-10, 10),
                                       rng.uniform(-10, 10)};
      std::vector<std::array<double, 3>> points;
      for (int i = 0; i < 25; ++i) {
        const double theta = rng.uniform(0.0, M_PI);
        const double lambda = rng.uniform(0.0, 2.0 * M_PI);
        points.push_back({c[0] + r * std::sin(theta) * std::cos(lambda),
                          c[1] + r * std::sin(theta) * std::sin(lambda),
                          c[2] + r * std::cos(theta)});
      }
      const eval::SphereFit fit = eval::fit_sphere(points);
      CHECK(fit.diameter == doctest::Approx(2.0 * r).epsilon(1e-9));
      CHECK(fit.rms_residual < 1e-9);
      for (int axis = 0; axis < 3; ++axis)
        CHECK(fit.center[static_cast<std::size_t>(axis)] ==
              doctest::Approx(c[static_cast<std::size_t>(axis)]).scale(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("too few or coplanar points are rejected") {
    CHECK_THROWS_AS(
        eval::fit_sphere({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}),
        std::invalid_argument);
    // 12 points, all in the z = 0 plane
    std::vector<std::array<double, 3>> flat;
    for (int i = 0; i < 12; ++i)
      flat.push_back({std::cos(i * 0.5), std::sin(i * 0.5), 0.0});
    CHECK_THROWS_AS(eval::fit_sphere(flat), std::invalid_argument);
  }
}

TEST_CASE("masked_variance") {
  Grid values(4, 4, 3.0);
  CHECK(eval::masked_variance(values, Mask(4, 4, 1)) == doctest::Approx(0.0));
  values(0, 0) = 7.0;
  CHECK(eval::masked_variance(values, Mask(4, 4, 1)) > 0.0);
  CHECK_THROWS_AS(eval::masked_variance(values, Mask(4, 4, 0)),
                  std::invalid_argument);
}
