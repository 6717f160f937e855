#pragma once

#include <array>
#include <string>
#include <vector>

#include "fpp/grid.hpp"
#include "fpp/phase.hpp"

namespace fpp::eval {

struct PreprocessParams {
  double modulation_threshold = 4.0;
  double min_area_fraction = 0.01;
};

/// Thresholding stage alone: mask = (B >= threshold).
Mask threshold_mask(const Grid& modulation, double threshold);

/// 3x3 square erosion followed by dilation.
Mask morphological_open3x3(const Mask& mask);

/// Drops 8-connected components smaller than min_fraction of total pixels.
Mask remove_small_components(const Mask& mask, double min_fraction);

/// Full pipeline: threshold, opening, small-component removal.
Mask preprocess_mask(const ModulationMap& modulation,
                     const PreprocessParams& params = {});

/// RMSE over pixels that are masked-in and whose truth lies inside
/// valid_range. Throws when no pixel qualifies.
double depth_rmse(const Grid& pred, const Grid& truth, const Mask& mask,
                  std::pair<double, double> valid_range = {-50.0, 50.0});

/// Fraction of masked pixels with pred == truth (integer order maps).
double fringe_order_accuracy(const Grid& pred_k, const Grid& truth_k,
                             const Mask& mask);

/// Variance of an order map over masked pixels (constant-output diagnostic).
double masked_variance(const Grid& values, const Mask& mask);

struct SphereFit {
  std::array<double, 3> center{};  // mm
  double diameter = 0.0;           // mm
  double rms_residual = 0.0;       // mm
};

/// Linear least squares on x^2+y^2+z^2 = 2cx*x + 2cy*y + 2cz*z + d.
/// Needs >= 4 non-coplanar points.
SphereFit fit_sphere(const std::vector<std::array<double, 3>>& points);

}  // namespace fpp::eval
