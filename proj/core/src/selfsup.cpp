#include "fpp/selfsup.hpp"

#include <cmath>

namespace fpp::selfsup {

ProjectorTables ProjectorTables::build(const SystemGeometry& geometry) {
  auto [low, high] = phase::projector_phase_maps(geometry);
  ProjectorTables t;
  t.period_number = geometry.period_number;
  t.projector_width = geometry.projector_width;
  t.projector_height = geometry.projector_height;
  t.phase_low = std::move(low.values);
  t.phase_high = std::move(high.values);
  return t;
}

nn::Tensor soft_fringe_order(const nn::Tensor& k_o, int period_number) {
  if (period_number < 1) throw std::invalid_argument("period number must be >= 1");
  return nn::mul_scalar(nn::sigmoid(k_o), static_cast<double>(period_number));
}

nn::Tensor compose_absolute(const PhaseMap& phi_h, const nn::Tensor& k_soft) {
  const nn::Tensor phi = nn::Tensor::from_grid(phi_h.values);
  if (phi.shape() != k_soft.shape())
    throw std::invalid_argument("compose_absolute: size mismatch");
  return nn::add(phi, nn::mul_scalar(k_soft, 2.0 * M_PI));
}

AbsolutePhaseMap compose_absolute(const PhaseMap& phi_h, const FringeOrderMap& order) {
  require_same_shape(phi_h.values, order.values, "compose_absolute");
  AbsolutePhaseMap abs;
  abs.period_number = phi_h.period_number;
  abs.values = phi_h.values;
  for (std::size_t i = 0; i < abs.values.size(); ++i)
    abs.values[i] += 2.0 * M_PI * order.values[i];
  return abs;
}

CorrespondenceField correspond(const nn::Tensor& phi_abs, int period_number,
                               const SystemGeometry& geometry) {
  geometry.validate();
  if (phi_abs.shape().size() != 3 || phi_abs.shape()[0] != 1)
    throw std::invalid_argument("correspond expects a 1xHxW phase tensor");
  const std::size_t h = phi_abs.shape()[1], w = phi_abs.shape()[2];

  CorrespondenceField field;
  const double scale =
      geometry.projector_width / (2.0 * M_PI * period_number);
  field.x_p = nn::mul_scalar(phi_abs, scale);
  field.y_p = Grid(h, w);
  field.in_bounds = Mask(h, w, 0);

  const double row_scale =
      static_cast<double>(geometry.projector_height) / geometry.camera_height;
  const double x_max = geometry.projector_width - 1;
  const double y_max = geometry.projector_height - 1;
  for (std::size_t y = 0; y < h; ++y) {
    const double yp = static_cast<double>(y) * row_scale;
    for (std::size_t x = 0; x < w; ++x) {
      field.y_p(y, x) = yp;
      const double xp = field.x_p.data()[y * w + x];
      field.in_bounds(y, x) =
          (xp >= 0.0 && xp <= x_max && yp >= 0.0 && yp <= y_max) ? 1 : 0;
    }
  }
  return field;
}

std::pair<nn::Tensor, nn::Tensor> synthesize_phases(const CorrespondenceField& field,
                                                    const ProjectorTables& tables) {
  nn::Tensor low = nn::circular_bilinear_sample(tables.phase_low, field.x_p,
                                                field.y_p, field.in_bounds);
  nn::Tensor high = nn::circular_bilinear_sample(tables.phase_high, field.x_p,
                                                 field.y_p, field.in_bounds);
  return {std::move(low), std::move(high)};
}

LossTerms self_supervised_loss(const PhaseMap& phi_l, const nn::Tensor& synth_l,
                               const PhaseMap& phi_h, const nn::Tensor& synth_h,
                               const Mask& mask, const LossWeights& weights,
                               bool circular_high, bool circular_low) {
  weights.validate();
  if (count_true(mask) == 0)
    throw std::invalid_argument("self_supervised_loss: empty mask");

  LossTerms terms;
  nn::Tensor l1 = nn::masked_l1_mean(synth_l, phi_l.values, mask, circular_low);
  nn::Tensor l2 = nn::masked_l1_mean(synth_h, phi_h.values, mask, circular_high);
  terms.loss1 = l1.item();
  terms.loss2 = l2.item();
  terms.total = nn::add(nn::mul_scalar(l1, weights.w1), nn::mul_scalar(l2, weights.w2));
  return terms;
}

}  // namespace fpp::selfsup
