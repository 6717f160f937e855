#pragma once

#include <utility>
#include <vector>

#include "fpp/phase.hpp"

namespace fpp {

/// Per-pixel fringe order. Raw network output is unbounded, soft orders
/// live in [0, a], integer orders in [0, a-1].
struct FringeOrderMap {
  enum class Kind { Raw, Soft, Integer };
  Grid values;
  Kind kind = Kind::Integer;
};

/// Strictly increasing period numbers starting at 1; successive ratios are
/// integers >= 2, e.g. {1, 4, 16, 64}.
struct FrequencySet {
  std::vector<int> periods;

  void validate() const;
  static FrequencySet of(std::initializer_list<int> periods);
};

namespace tpu {

struct TwoFreqResult {
  FringeOrderMap order;          // integer orders, clamped to [0, ratio*a_low-1]
  AbsolutePhaseMap absolute;     // phi_high + 2*pi*k
  std::size_t out_of_range = 0;  // raw k outside the clamp range (diagnostic)
};

/// Dual-frequency unwrap: k = round((ratio*Phi_low - phi_high)/(2*pi)).
TwoFreqResult unwrap_two_freq(const AbsolutePhaseMap& phi_low,
                              const PhaseMap& phi_high, int ratio);

struct HierarchicalResult {
  AbsolutePhaseMap absolute;     // highest-frequency absolute phase
  FringeOrderMap order;          // integer order of the final step
  std::size_t out_of_range = 0;  // summed over all chain steps
};

/// Chains unwrap_two_freq from the unit frequency upward (MF-TPU).
/// wrapped[i] must correspond to freqs.periods[i].
HierarchicalResult unwrap_hierarchical(const FrequencySet& freqs,
                                       const std::vector<PhaseMap>& wrapped);

/// Shifts a unit-frequency wrapped map from (-pi, pi] to [0, 2*pi); a
/// one-period map is unambiguous, so this is already absolute phase.
AbsolutePhaseMap unit_absolute_phase(const PhaseMap& unit_wrapped);

/// round(k_soft) with round-half-even, clamped to [0, a-1].
FringeOrderMap round_order(const FringeOrderMap& soft, int period_number);

}  // namespace tpu
}  // namespace fpp
