#pragma once

#include "fpp/grid.hpp"
#include "fpp/tensor.hpp"

namespace fpp::nn {

// Elementwise; shapes must match exactly.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);

Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double negative_slope);
Tensor sigmoid(const Tensor& a);

/// Hard clamp to [lo, hi]; gradient is identity strictly inside, zero at and
/// beyond the bounds.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor sum(const Tensor& a);

/// Same-padding stride-1 convolution. x: Cin x H x W, w: Cout x Cin x K x K
/// (K odd), bias: Cout.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias);

/// 2x2 average pooling; H and W must be even.
Tensor avg_pool2(const Tensor& x);

/// Nearest-neighbor 2x upsampling.
Tensor upsample2(const Tensor& x);

/// Channel concatenation of CxHxW tensors.
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// Samples a wrapped-phase table at real-valued coordinates with circular
/// bilinear interpolation: the four neighbors combine through wrapped
/// differences (interpolation along the circle), so the scheme crosses 2*pi
/// seams correctly, reproduces grid values exactly at integer coordinates,
/// and is exact everywhere for a phase field linear between grid columns.
/// Output lies in (-pi, pi]. Differentiable in x_p; y_p has no gradient
/// path. Pixels outside the table or with mask 0 produce 0 with zero
/// gradient. x_p: 1xHxW tensor of column coordinates; y_p: HxW rows.
Tensor circular_bilinear_sample(const Grid& phase_table, const Tensor& x_p,
                                const Grid& y_p, const Mask& mask);

/// Mean absolute difference over masked pixels. With `circular`, the residual
/// is wrap(pred - target), i.e. circular distance. pred: 1xHxW.
Tensor masked_l1_mean(const Tensor& pred, const Grid& target, const Mask& mask,
                      bool circular);

}  // namespace fpp::nn
