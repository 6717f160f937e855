#include "fpp/tpu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpp {

void FrequencySet::validate() const {
  if (periods.empty() || periods.front() != 1)
    throw std::invalid_argument("frequency set must start at period 1");
  for (std::size_t i = 1; i < periods.size(); ++i) {
    if (periods[i] <= periods[i - 1])
      throw std::invalid_argument("frequency set must be strictly increasing");
    if (periods[i] % periods[i - 1] != 0 || periods[i] / periods[i - 1] < 2)
      throw std::invalid_argument("successive period ratios must be integers >= 2");
  }
}

FrequencySet FrequencySet::of(std::initializer_list<int> periods) {
  FrequencySet f{std::vector<int>(periods)};
  f.validate();
  return f;
}

namespace tpu {

namespace {

double round_half_even(double v) {
  const double r = std::nearbyint(v);  // FE_TONEAREST ties-to-even
  return r;
}

}  // namespace

TwoFreqResult unwrap_two_freq(const AbsolutePhaseMap& phi_low,
                              const PhaseMap& phi_high, int ratio) {
  if (ratio < 2) throw std::invalid_argument("frequency ratio must be >= 2");
  require_same_shape(phi_low.values, phi_high.values, "unwrap_two_freq");

  const int k_max = ratio * phi_low.period_number - 1;
  TwoFreqResult result;
  result.order.kind = FringeOrderMap::Kind::Integer;
  result.order.values = Grid(phi_low.values.rows(), phi_low.values.cols());
  result.absolute.period_number = ratio * phi_low.period_number;
  result.absolute.values = Grid(phi_low.values.rows(), phi_low.values.cols());

  for (std::size_t i = 0; i < phi_low.values.size(); ++i) {
    const double predicted = ratio * phi_low.values[i];
    const double k_raw =
        round_half_even((predicted - phi_high.values[i]) / (2.0 * M_PI));
    double k = k_raw;
    if (k < 0.0 || k > k_max) {
      result.out_of_range++;
      k = std::clamp(k, 0.0, static_cast<double>(k_max));
    }
    result.order.values[i] = k;
    result.absolute.values[i] = phi_high.values[i] + 2.0 * M_PI * k;
  }
  return result;
}

AbsolutePhaseMap unit_absolute_phase(const PhaseMap& unit_wrapped) {
  if (unit_wrapped.period_number != 1)
    throw std::invalid_argument("unit_absolute_phase expects a one-period map");
  AbsolutePhaseMap abs;
  abs.period_number = 1;
  abs.values = unit_wrapped.values;
  for (std::size_t i = 0; i < abs.values.size(); ++i)
    if (abs.values[i] < 0.0) abs.values[i] += 2.0 * M_PI;
  return abs;
}

HierarchicalResult unwrap_hierarchical(const FrequencySet& freqs,
                                       const std::vector<PhaseMap>& wrapped) {
  freqs.validate();
  if (wrapped.size() != freqs.periods.size())
    throw std::invalid_argument("need one wrapped map per frequency");
  for (const PhaseMap& m : wrapped)
    require_same_shape(m.values, wrapped.front().values, "unwrap_hierarchical");

  HierarchicalResult result;
  AbsolutePhaseMap current = unit_absolute_phase(wrapped.front());
  if (freqs.periods.size() == 1) {
    result.absolute = std::move(current);
    result.order.kind = FringeOrderMap::Kind::Integer;
    result.order.values = Grid(wrapped.front().values.rows(),
                               wrapped.front().values.cols(), 0.0);
    return result;
  }

  for (std::size_t level = 1; level < freqs.periods.size(); ++level) {
    const int ratio = freqs.periods[level] / freqs.periods[level - 1];
    TwoFreqResult step = unwrap_two_freq(current, wrapped[level], ratio);
    result.out_of_range += step.out_of_range;
    current = std::move(step.absolute);
    if (level + 1 == freqs.periods.size()) result.order = std::move(step.order);
  }
  result.absolute = std::move(current);
  return result;
}

FringeOrderMap round_order(const FringeOrderMap& soft, int period_number) {
  if (soft.kind == FringeOrderMap::Kind::Integer)
    throw std::invalid_argument("round_order expects a soft or raw order map");
  if (period_number < 1) throw std::invalid_argument("period number must be >= 1");

  FringeOrderMap out;
  out.kind = FringeOrderMap::Kind::Integer;
  out.values = Grid(soft.values.rows(), soft.values.cols());
  const double k_max = period_number - 1;
  for (std::size_t i = 0; i < soft.values.size(); ++i)
    out.values[i] = std::clamp(round_half_even(soft.values[i]), 0.0, k_max);
  return out;
}

}  // namespace tpu
}  // namespace fpp
