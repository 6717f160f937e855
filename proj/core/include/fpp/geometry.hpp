#pragma once

#include <stdexcept>

namespace fpp {

/// Rectified crossed-axis camera/projector model. Absolute phase is affine
/// in projector column and depth; epipolar lines are image rows.
struct SystemGeometry {
  int projector_width = 684;
  int projector_height = 608;
  int camera_width = 1024;
  int camera_height = 1024;
  int period_number = 64;        // periods across the projector width
  double height_coeff = 10.0;    // projector pixels per depth unit (mm)
  double reference_offset = 0.0; // projector pixels
  double pixel_pitch = 0.1;      // mm per camera pixel, lateral
  // Right-edge fraction of the projector treated as unusable. Keeps every
  // fringe order along the unwrapping chain inside [0, a-1]; 1/8 covers
  // chains whose first frequency ratio is >= 4.
  double usable_margin = 0.125;

  void validate() const {
    if (projector_width <= 0 || projector_height <= 0 || camera_width <= 0 ||
        camera_height <= 0)
      throw std::invalid_argument("geometry dimensions must be positive");
    if (period_number < 1)
      throw std::invalid_argument("period number must be >= 1");
    if (height_coeff == 0.0)
      throw std::invalid_argument("height coefficient must be nonzero");
    if (usable_margin < 0.0 || usable_margin >= 1.0)
      throw std::invalid_argument("usable margin must lie in [0, 1)");
  }

  double usable_projector_width() const {
    return static_cast<double>(projector_width) * (1.0 - usable_margin);
  }
};

}  // namespace fpp
