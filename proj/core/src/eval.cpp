#include "fpp/eval.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace fpp::eval {

Mask threshold_mask(const Grid& modulation, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("threshold must be >= 0");
  Mask mask(modulation.rows(), modulation.cols());
  for (std::size_t i = 0; i < modulation.size(); ++i)
    mask[i] = modulation[i] >= threshold ? 1 : 0;
  return mask;
}

namespace {

Mask erode3x3(const Mask& mask) {
  const auto h = static_cast<std::ptrdiff_t>(mask.rows());
  const auto w = static_cast<std::ptrdiff_t>(mask.cols());
  Mask out(mask.rows(), mask.cols(), 0);
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      bool all = true;
      for (std::ptrdiff_t dy = -1; dy <= 1 && all; ++dy)
        for (std::ptrdiff_t dx = -1; dx <= 1 && all; ++dx) {
          const std::ptrdiff_t yy = y + dy, xx = x + dx;
          // Outside the image counts as background.
          if (yy < 0 || yy >= h || xx < 0 || xx >= w ||
              !mask(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)))
            all = false;
        }
      out(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = all ? 1 : 0;
    }
  return out;
}

Mask dilate3x3(const Mask& mask) {
  const auto h = static_cast<std::ptrdiff_t>(mask.rows());
  const auto w = static_cast<std::ptrdiff_t>(mask.cols());
  Mask out(mask.rows(), mask.cols(), 0);
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      bool any = false;
      for (std::ptrdiff_t dy = -1; dy <= 1 && !any; ++dy)
        for (std::ptrdiff_t dx = -1; dx <= 1 && !any; ++dx) {
          const std::ptrdiff_t yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w &&
              mask(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)))
            any = true;
        }
      out(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = any ? 1 : 0;
    }
  return out;
}

}  // namespace

Mask morphological_open3x3(const Mask& mask) { return dilate3x3(erode3x3(mask)); }

Mask remove_small_components(const Mask& mask, double min_fraction) {
  const auto h = static_cast<std::ptrdiff_t>(mask.rows());
  const auto w = static_cast<std::ptrdiff_t>(mask.cols());
  const auto min_area = static_cast<std::size_t>(
      min_fraction * static_cast<double>(mask.size()));

  Mask out = mask;
  std::vector<std::int32_t> labels(mask.size(), 0);
  std::vector<std::size_t> stack;
  std::int32_t next_label = 0;

  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || labels[start] != 0) continue;
    ++next_label;
    std::vector<std::size_t> component;
    stack.push_back(start);
    labels[start] = next_label;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      component.push_back(i);
      const auto y = static_cast<std::ptrdiff_t>(i / mask.cols());
      const auto x = static_cast<std::ptrdiff_t>(i % mask.cols());
      for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
        for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const std::ptrdiff_t yy = y + dy, xx = x + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          const std::size_t j =
              static_cast<std::size_t>(yy) * mask.cols() + static_cast<std::size_t>(xx);
          if (mask[j] && labels[j] == 0) {
            labels[j] = next_label;
            stack.push_back(j);
          }
        }
    }
    if (component.size() < min_area)
      for (std::size_t i : component) out[i] = 0;
  }
  return out;
}

Mask preprocess_mask(const ModulationMap& modulation, const PreprocessParams& params) {
  Mask mask = threshold_mask(modulation.modulation, params.modulation_threshold);
  mask = morphological_open3x3(mask);
  return remove_small_components(mask, params.min_area_fraction);
}

double depth_rmse(const Grid& pred, const Grid& truth, const Mask& mask,
                  std::pair<double, double> valid_range) {
  require_same_shape(pred, truth, "depth_rmse");
  if (pred.rows() != mask.rows() || pred.cols() != mask.cols())
    throw std::invalid_argument("depth_rmse: mask size mismatch");
  if (valid_range.first >= valid_range.second)
    throw std::invalid_argument("depth_rmse: valid range must satisfy min < max");

  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    if (truth[i] < valid_range.first || truth[i] > valid_range.second) continue;
    const double d = pred[i] - truth[i];
    acc += d * d;
    ++count;
  }
  if (count == 0)
    throw std::invalid_argument("depth_rmse: no pixel qualifies");
  return std::sqrt(acc / static_cast<double>(count));
}

double fringe_order_accuracy(const Grid& pred_k, const Grid& truth_k, const Mask& mask) {
  require_same_shape(pred_k, truth_k, "fringe_order_accuracy");
  if (pred_k.rows() != mask.rows() || pred_k.cols() != mask.cols())
    throw std::invalid_argument("fringe_order_accuracy: mask size mismatch");
  std::size_t count = 0, hits = 0;
  for (std::size_t i = 0; i < pred_k.size(); ++i) {
    if (!mask[i]) continue;
    ++count;
    if (pred_k[i] == truth_k[i]) ++hits;
  }
  if (count == 0)
    throw std::invalid_argument("fringe_order_accuracy: empty mask");
  return static_cast<double>(hits) / static_cast<double>(count);
}

double masked_variance(const Grid& values, const Mask& mask) {
  double sum = 0.0, sum2 = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) continue;
    sum += values[i];
    sum2 += values[i] * values[i];
    ++count;
  }
  if (count == 0) throw std::invalid_argument("masked_variance: empty mask");
  const double mean = sum / static_cast<double>(count);
  return sum2 / static_cast<double>(count) - mean * mean;
}

SphereFit fit_sphere(const std::vector<std::array<double, 3>>& points) {
  if (points.size() < 4)
    throw std::invalid_argument("fit_sphere needs at least 4 points");

  Eigen::MatrixXd a(static_cast<Eigen::Index>(points.size()), 4);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [x, y, z] = points[i];
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = 2.0 * x;
    a(r, 1) = 2.0 * y;
    a(r, 2) = 2.0 * z;
    a(r, 3) = 1.0;
    rhs(r) = x * x + y * y + z * z;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double cond_cutoff = 1e-10 * svd.singularValues()(0);
  if (svd.singularValues().minCoeff() <= cond_cutoff)
    throw std::invalid_argument("fit_sphere: degenerate (coplanar) point set");
  const Eigen::Vector4d sol = svd.solve(rhs);

  SphereFit fit;
  fit.center = {sol(0), sol(1), sol(2)};
  const double r2 = sol(0) * sol(0) + sol(1) * sol(1) + sol(2) * sol(2) + sol(3);
  if (r2 <= 0.0) throw std::invalid_argument("fit_sphere: negative radius squared");
  const double radius = std::sqrt(r2);
  fit.diameter = 2.0 * radius;

  double acc = 0.0;
  for (const auto& [x, y, z] : points) {
    const double dist = std::sqrt((x - sol(0)) * (x - sol(0)) +
                                  (y - sol(1)) * (y - sol(1)) +
                                  (z - sol(2)) * (z - sol(2)));
    acc += (dist - radius) * (dist - radius);
  }
  fit.rms_residual = std::sqrt(acc / static_cast<double>(points.size()));
  return fit;
}

}  // namespace fpp::eval
