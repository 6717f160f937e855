#pragma once

#include <utility>

#include "fpp/geometry.hpp"
#include "fpp/ops.hpp"
#include "fpp/phase.hpp"
#include "fpp/tensor.hpp"
#include "fpp/tpu.hpp"

namespace fpp::selfsup {

struct LossWeights {
  double w1 = 1.0;
  double w2 = 2.0;

  void validate() const {
    if (w1 < 0.0 || w2 < 0.0 || (w1 == 0.0 && w2 == 0.0))
      throw std::invalid_argument("loss weights must be >= 0 and not both zero");
  }
};

/// Projector coordinates hit by each camera pixel under a predicted absolute
/// phase; in_bounds is false outside [0, W_p-1] x [0, H_p-1].
struct CorrespondenceField {
  nn::Tensor x_p;  // 1xHxW, differentiable
  Grid y_p;        // fixed by the rectified epipolar model
  Mask in_bounds;
};

/// Discrete projector wrapped-phase grids, the sampling target for phase
/// re-synthesis.
struct ProjectorTables {
  Grid phase_low;
  Grid phase_high;
  int period_number = 1;
  int projector_width = 0;
  int projector_height = 0;

  static ProjectorTables build(const SystemGeometry& geometry);
};

/// k_soft = sigmoid(k_o) * a, elementwise and differentiable.
nn::Tensor soft_fringe_order(const nn::Tensor& k_o, int period_number);

/// Phi' = phi_h + 2*pi*k_soft.
nn::Tensor compose_absolute(const PhaseMap& phi_h, const nn::Tensor& k_soft);

/// Non-differentiable variant for integer orders (evaluation/inference).
AbsolutePhaseMap compose_absolute(const PhaseMap& phi_h, const FringeOrderMap& order);

/// x_p = Phi' * W_p / (2*pi*a); y_p = row * H_p / H_c.
CorrespondenceField correspond(const nn::Tensor& phi_abs, int period_number,
                               const SystemGeometry& geometry);

/// Wrapped one-period and a-period phase re-synthesized at the projector
/// correspondence, via circular bilinear interpolation.
std::pair<nn::Tensor, nn::Tensor> synthesize_phases(const CorrespondenceField& field,
                                                    const ProjectorTables& tables);

struct LossTerms {
  nn::Tensor total;  // scalar, differentiable
  double loss1 = 0.0;
  double loss2 = 0.0;
};

/// L = w1 * L1(phi_l, synth_l) + w2 * L1(phi_h, synth_h) over masked pixels.
/// Both residuals default to circular distance. For the one-period term the
/// circle spans the whole pattern, so circular distance is still an absolute
/// positional error for any correspondence within half a pattern width; it
/// avoids the 2*pi cliffs of plain differences on wrapped values. Plain L1
/// is available through the flags.
LossTerms self_supervised_loss(const PhaseMap& phi_l, const nn::Tensor& synth_l,
                               const PhaseMap& phi_h, const nn::Tensor& synth_h,
                               const Mask& mask, const LossWeights& weights,
                               bool circular_high = true, bool circular_low = true);

}  // namespace fpp::selfsup
