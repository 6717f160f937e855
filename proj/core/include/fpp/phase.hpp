#pragma once

#include <utility>
#include <vector>

#include "fpp/geometry.hpp"
#include "fpp/grid.hpp"

namespace fpp {

/// N phase-shifted intensity images of one fringe frequency.
struct FringeImageSet {
  std::vector<Grid> images;
  int steps = 0;          // == images.size(), >= 3
  int period_number = 1;  // fringe periods across the projector width

  void validate() const;
};

/// Wrapped phase, every value in (-pi, pi].
struct PhaseMap {
  Grid values;
  int period_number = 1;
};

/// Continuous phase; a noiseless a-period map lies in [0, 2*pi*a).
struct AbsolutePhaseMap {
  Grid values;
  int period_number = 1;
};

/// Background A and modulation B per pixel, intensity units.
struct ModulationMap {
  Grid background;
  Grid modulation;
};

namespace phase {

/// Maps any finite angle into (-pi, pi], with -pi landing on +pi.
double wrap(double radians);

/// Vertical sinusoidal fringe patterns: image n at column x is
/// background + amplitude*cos(2*pi*a*x/width + 2*pi*n/n_steps).
FringeImageSet generate_patterns(int width, int height, int period_number,
                                 int n_steps, double background,
                                 double amplitude);

/// N-step phase-shifting arctangent. Degenerate pixels (both sums zero)
/// come out as 0 and are flagged by zero modulation, not by an error.
PhaseMap extract_wrapped_phase(const FringeImageSet& set);

ModulationMap extract_modulation(const FringeImageSet& set);

/// One-period and a-period wrapped phase of the projector plane, constant
/// along rows.
std::pair<PhaseMap, PhaseMap> projector_phase_maps(const SystemGeometry& geometry);

}  // namespace phase
}  // namespace fpp
