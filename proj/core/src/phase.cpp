#include "fpp/phase.hpp"

#include <cmath>
#include <stdexcept>

namespace fpp {

void FringeImageSet::validate() const {
  if (steps < 3) throw std::invalid_argument("phase shifting needs at least 3 steps");
  if (images.size() != static_cast<std::size_t>(steps))
    throw std::invalid_argument("fringe set image count does not match steps");
  if (period_number < 1) throw std::invalid_argument("period number must be >= 1");
  for (const Grid& img : images)
    if (!img.same_shape(images.front()))
      throw std::invalid_argument("fringe images must share one size");
}

namespace phase {

double wrap(double radians) {
  double r = std::fmod(radians + M_PI, 2.0 * M_PI);
  if (r <= 0.0) r += 2.0 * M_PI;
  return r - M_PI;
}

FringeImageSet generate_patterns(int width, int height, int period_number,
                                 int n_steps, double background,
                                 double amplitude) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("pattern dimensions must be positive");
  if (n_steps < 3) throw std::invalid_argument("phase shifting needs at least 3 steps");
  if (period_number < 1) throw std::invalid_argument("period number must be >= 1");
  if (amplitude < 0.0 || background < 0.0 || amplitude > background)
    throw std::invalid_argument("need 0 <= amplitude <= background");

  FringeImageSet set;
  set.steps = n_steps;
  set.period_number = period_number;
  set.images.reserve(n_steps);

  const auto w = static_cast<std::size_t>(width);
  const auto h = static_cast<std::size_t>(height);
  for (int n = 0; n < n_steps; ++n) {
    Grid img(h, w);
    const double shift = 2.0 * M_PI * n / n_steps;
    std::vector<double> row(w);
    for (std::size_t x = 0; x < w; ++x)
      row[x] = background +
               amplitude * std::cos(2.0 * M_PI * period_number *
                                        static_cast<double>(x) / width +
                                    shift);
    for (std::size_t y = 0; y < h; ++y)
      std::copy(row.begin(), row.end(), img.row(y));
    set.images.push_back(std::move(img));
  }
  return set;
}

namespace {

// The phase-shifting sums num = sum I_n sin(2*pi*n/N), den = sum I_n
// cos(2*pi*n/N), computed on mean-subtracted intensities. The mean term is
// exactly zero in the mathematics; dropping it before the sums keeps
// constant (degenerate) pixels at exactly num = den = 0 instead of leaving
// rounding residue in atan2, and makes the sums exactly invariant under a
// constant intensity offset.
void phase_sums(const FringeImageSet& set, Grid& num, Grid& den) {
  const Grid& first = set.images.front();
  num = Grid(first.rows(), first.cols(), 0.0);
  den = Grid(first.rows(), first.cols(), 0.0);
  Grid mean(first.rows(), first.cols(), 0.0);
  for (const Grid& img : set.images)
    for (std::size_t i = 0; i < img.size(); ++i) mean[i] += img[i];
  const double inv_n = 1.0 / set.steps;
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] *= inv_n;

  for (int n = 0; n < set.steps; ++n) {
    const double s = std::sin(2.0 * M_PI * n / set.steps);
    const double c = std::cos(2.0 * M_PI * n / set.steps);
    const Grid& img = set.images[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < img.size(); ++i) {
      num[i] += (img[i] - mean[i]) * s;
      den[i] += (img[i] - mean[i]) * c;
    }
  }
}

}  // namespace

PhaseMap extract_wrapped_phase(const FringeImageSet& set) {
  set.validate();
  Grid num, den;
  phase_sums(set, num, den);

  PhaseMap out;
  out.period_number = set.period_number;
  out.values = Grid(num.rows(), num.cols());
  for (std::size_t i = 0; i < num.size(); ++i) {
    double phi = -std::atan2(num[i], den[i]);
    if (phi <= -M_PI) phi = M_PI;
    out.values[i] = phi;
  }
  return out;
}

ModulationMap extract_modulation(const FringeImageSet& set) {
  set.validate();
  Grid num, den;
  phase_sums(set, num, den);

  ModulationMap out;
  out.background = Grid(num.rows(), num.cols(), 0.0);
  out.modulation = Grid(num.rows(), num.cols());
  for (const Grid& img : set.images)
    for (std::size_t i = 0; i < img.size(); ++i) out.background[i] += img[i];
  const double inv_n = 1.0 / set.steps;
  for (std::size_t i = 0; i < num.size(); ++i) {
    out.background[i] *= inv_n;
    out.modulation[i] = 2.0 * inv_n * std::hypot(num[i], den[i]);
  }
  return out;
}

std::pair<PhaseMap, PhaseMap> projector_phase_maps(const SystemGeometry& geometry) {
  geometry.validate();
  const auto w = static_cast<std::size_t>(geometry.projector_width);
  const auto h = static_cast<std::size_t>(geometry.projector_height);

  PhaseMap low, high;
  low.period_number = 1;
  high.period_number = geometry.period_number;
  low.values = Grid(h, w);
  high.values = Grid(h, w);

  std::vector<double> low_row(w), high_row(w);
  for (std::size_t x = 0; x < w; ++x) {
    const double unit = 2.0 * M_PI * static_cast<double>(x) / geometry.projector_width;
    low_row[x] = wrap(unit);
    high_row[x] = wrap(unit * geometry.period_number);
  }
  for (std::size_t y = 0; y < h; ++y) {
    std::copy(low_row.begin(), low_row.end(), low.values.row(y));
    std::copy(high_row.begin(), high_row.end(), high.values.row(y));
  }
  return {std::move(low), std::move(high)};
}

}  // namespace phase
}  // namespace fpp
