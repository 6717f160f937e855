#include "fpp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fpp/io.hpp"
#include "fpp/rng.hpp"

namespace fpp {

namespace {
constexpr double kBackground = 128.0;  // A0
constexpr double kAmplitude = 100.0;   // B0
}  // namespace

void SceneSpec::validate() const {
  if (!depth.same_shape(reflectivity) || depth.rows() != validity.rows() ||
      depth.cols() != validity.cols())
    throw std::invalid_argument("scene rasters must share one size");
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (validity[i] && !std::isfinite(depth[i]))
      throw std::invalid_argument("scene depth must be finite on valid pixels");
    if (reflectivity[i] < 0.0 || reflectivity[i] > 1.0)
      throw std::invalid_argument("reflectivity must lie in [0, 1]");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
  if (blur_kernel && *blur_kernel < 1)
    throw std::invalid_argument("blur kernel length must be >= 1");
}

SceneKind scene_kind_from_string(const std::string& name) {
  if (name == "plane") return SceneKind::Plane;
  if (name == "hemisphere") return SceneKind::Hemisphere;
  if (name == "step") return SceneKind::Step;
  if (name == "isolated_blobs") return SceneKind::IsolatedBlobs;
  if (name == "low_reflectivity") return SceneKind::LowReflectivity;
  if (name == "motion_blur") return SceneKind::MotionBlur;
  throw std::invalid_argument("unknown scene kind: " + name);
}

std::string to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::Plane: return "plane";
    case SceneKind::Hemisphere: return "hemisphere";
    case SceneKind::Step: return "step";
    case SceneKind::IsolatedBlobs: return "isolated_blobs";
    case SceneKind::LowReflectivity: return "low_reflectivity";
    case SceneKind::MotionBlur: return "motion_blur";
  }
  throw std::invalid_argument("unknown scene kind");
}

namespace sim {

Grid projector_column(const SceneSpec& scene, const SystemGeometry& geom) {
  geom.validate();
  const double col_scale =
      static_cast<double>(geom.projector_width) / geom.camera_width;
  Grid xp(scene.depth.rows(), scene.depth.cols());
  for (std::size_t y = 0; y < xp.rows(); ++y)
    for (std::size_t x = 0; x < xp.cols(); ++x)
      xp(y, x) = static_cast<double>(x) * col_scale + geom.reference_offset +
                 geom.height_coeff * scene.depth(y, x);
  return xp;
}

CameraPhase camera_absolute_phase(const SceneSpec& scene,
                                  const SystemGeometry& geom, int period_number) {
  scene.validate();
  if (static_cast<int>(scene.depth.rows()) != geom.camera_height ||
      static_cast<int>(scene.depth.cols()) != geom.camera_width)
    throw std::invalid_argument("scene raster size must match camera size");

  const Grid xp = projector_column(scene, geom);
  const double usable = geom.usable_projector_width();

  CameraPhase out;
  out.phase.period_number = period_number;
  out.phase.values = Grid(xp.rows(), xp.cols());
  out.valid = Mask(xp.rows(), xp.cols(), 0);
  for (std::size_t i = 0; i < xp.size(); ++i) {
    const double unit = 2.0 * M_PI * xp[i] / geom.projector_width;
    out.phase.values[i] = unit * period_number;
    out.valid[i] = (scene.validity[i] && xp[i] >= 0.0 && xp[i] < usable) ? 1 : 0;
  }
  return out;
}

namespace {

// Horizontal box blur with clamped borders; shift slides the window to model
// per-image drift of a handheld rig.
void box_blur_rows(Grid& img, int length, int shift) {
  if (length <= 1 && shift == 0) return;
  const int w = static_cast<int>(img.cols());
  std::vector<double> src(static_cast<std::size_t>(w));
  const int half = length / 2;
  for (std::size_t y = 0; y < img.rows(); ++y) {
    std::copy(img.row(y), img.row(y) + w, src.begin());
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -half; t <= half; ++t) {
        int xs = std::clamp(x + t + shift, 0, w - 1);
        acc += src[static_cast<std::size_t>(xs)];
      }
      img(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
          acc / (2 * half + 1);
    }
  }
}

}  // namespace

FringeImageSet render_scene(const SceneSpec& scene, const SystemGeometry& geom,
                            int period_number, int n_steps, std::uint64_t seed) {
  if (n_steps < 3) throw std::invalid_argument("phase shifting needs at least 3 steps");
  const CameraPhase cam = camera_absolute_phase(scene, geom, period_number);

  FringeImageSet set;
  set.steps = n_steps;
  set.period_number = period_number;
  set.images.reserve(n_steps);

  Rng rng(seed);
  for (int n = 0; n < n_steps; ++n) {
    const double shift = 2.0 * M_PI * n / n_steps;
    Grid img(cam.phase.values.rows(), cam.phase.values.cols());
    for (std::size_t i = 0; i < img.size(); ++i) {
      double v = scene.reflectivity[i] *
                 (kBackground + kAmplitude * std::cos(cam.phase.values[i] + shift));
      if (scene.noise_sigma > 0.0) v += rng.gaussian(0.0, scene.noise_sigma);
      img[i] = v;
    }
    if (scene.blur_kernel) {
      const int drift = static_cast<int>(std::lround(scene.blur_drift * n));
      box_blur_rows(img, *scene.blur_kernel, drift);
    }
    if (scene.quantize)
      for (std::size_t i = 0; i < img.size(); ++i)
        img[i] = std::clamp(std::nearbyint(img[i]), 0.0, 255.0);
    set.images.push_back(std::move(img));
  }
  return set;
}

Grid phase_to_height(const AbsolutePhaseMap& unit_phase, const SystemGeometry& geom) {
  geom.validate();
  if (unit_phase.period_number != 1)
    throw std::invalid_argument(
        "phase_to_height expects unit-frequency phase; divide an a-period map by a");
  const double col_scale =
      static_cast<double>(geom.projector_width) / geom.camera_width;
  Grid depth(unit_phase.values.rows(), unit_phase.values.cols());
  for (std::size_t y = 0; y < depth.rows(); ++y)
    for (std::size_t x = 0; x < depth.cols(); ++x) {
      const double xp =
          unit_phase.values(y, x) * geom.projector_width / (2.0 * M_PI);
      depth(y, x) = (xp - static_cast<double>(x) * col_scale -
                     geom.reference_offset) /
                    geom.height_coeff;
    }
  return depth;
}

SceneSpec make_scene(SceneKind kind, const SceneParams& params,
                     const SystemGeometry& geom, std::uint64_t seed) {
  const auto h = static_cast<std::size_t>(geom.camera_height);
  const auto w = static_cast<std::size_t>(geom.camera_width);

  SceneSpec scene;
  scene.depth = Grid(h, w, params.z0);
  scene.reflectivity = Grid(h, w, 1.0);
  scene.validity = Mask(h, w, 1);
  scene.noise_sigma = params.noise_sigma;
  scene.quantize = params.quantize;

  Rng rng(seed);
  switch (kind) {
    case SceneKind::Plane:
      break;

    case SceneKind::Hemisphere: {
      // Spherical cap sitting on the z0 plane; depth stays continuous at the rim.
      const double r_mm = params.radius;
      const double cx = 0.5 * static_cast<double>(w - 1);
      const double cy = 0.5 * static_cast<double>(h - 1);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          const double dx = (static_cast<double>(x) - cx) * geom.pixel_pitch;
          const double dy = (static_cast<double>(y) - cy) * geom.pixel_pitch;
          const double d2 = dx * dx + dy * dy;
          if (d2 < r_mm * r_mm)
            scene.depth(y, x) = params.z0 + std::sqrt(r_mm * r_mm - d2);
        }
      break;
    }

    case SceneKind::Step: {
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = w / 2; x < w; ++x)
          scene.depth(y, x) = params.z0 + params.step_height;
      break;
    }

    case SceneKind::IsolatedBlobs: {
      // Disks on a dark background, laid out on a jittered diagonal so the
      // validity mask always has blob_count components.
      scene.validity = Mask(h, w, 0);
      scene.reflectivity = Grid(h, w, 0.0);
      const int count = std::max(2, params.blob_count);
      for (int b = 0; b < count; ++b) {
        const double fx = (b + 0.5) / count + rng.uniform(-0.08, 0.08);
        const double fy = (b + 0.5) / count + rng.uniform(-0.08, 0.08);
        const double cx = fx * static_cast<double>(w - 1);
        const double cy = fy * static_cast<double>(h - 1);
        const double radius = (0.35 / count) * static_cast<double>(std::min(h, w));
        const double zb = params.z0 + rng.uniform(0.0, params.step_height);
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t x = 0; x < w; ++x) {
            const double dx = static_cast<double>(x) - cx;
            const double dy = static_cast<double>(y) - cy;
            if (dx * dx + dy * dy < radius * radius) {
              scene.depth(y, x) = zb;
              scene.reflectivity(y, x) = 1.0;
              scene.validity(y, x) = 1;
            }
          }
      }
      break;
    }

    case SceneKind::LowReflectivity: {
      // Dark band across the middle; modulation there falls below the
      // preprocessing threshold.
      for (std::size_t y = h / 3; y < 2 * h / 3; ++y)
        for (std::size_t x = w / 4; x < 3 * w / 4; ++x)
          scene.reflectivity(y, x) = params.low_reflectivity;
      break;
    }

    case SceneKind::MotionBlur: {
      scene.blur_kernel = std::max(1, params.blur_length);
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = w / 2; x < w; ++x)
          scene.depth(y, x) = params.z0 + params.step_height;
      break;
    }
  }
  return scene;
}

std::vector<const ManifestEntry*> DatasetManifest::split(const std::string& name) const {
  std::vector<const ManifestEntry*> out;
  for (const ManifestEntry& e : entries)
    if (e.split == name) out.push_back(&e);
  return out;
}

DatasetManifest make_dataset(const std::vector<SceneRequest>& scenes,
                             const SystemGeometry& geom,
                             const FrequencySet& frequencies, int n_steps,
                             std::uint64_t seed,
                             const std::filesystem::path& out_dir) {
  geom.validate();
  frequencies.validate();
  std::filesystem::create_directories(out_dir);

  DatasetManifest manifest;
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const SceneRequest& req = scenes[si];
    const std::uint64_t scene_seed = mix_seed(seed, si);
    const SceneSpec scene = make_scene(req.kind, req.params, geom, scene_seed);

    ManifestEntry entry;
    entry.scene_id = req.id;
    entry.split = req.split;
    const std::filesystem::path scene_dir = out_dir / req.id;
    std::filesystem::create_directories(scene_dir);

    auto persist = [&](const std::string& role, const auto& grid) {
      const std::string rel = req.id + "/" + role + ".fpa";
      io::write_fpa(out_dir / rel, grid);
      entry.roles[role] = rel;
    };

    std::vector<PhaseMap> wrapped;
    for (std::size_t fi = 0; fi < frequencies.periods.size(); ++fi) {
      const int period = frequencies.periods[fi];
      const FringeImageSet set = render_scene(
          scene, geom, period, n_steps, mix_seed(scene_seed, fi));
      for (int n = 0; n < n_steps; ++n)
        persist("fringe_f" + std::to_string(period) + "_" + std::to_string(n),
                set.images[static_cast<std::size_t>(n)]);
      wrapped.push_back(phase::extract_wrapped_phase(set));
      persist("wrapped_f" + std::to_string(period), wrapped.back().values);
      if (fi + 1 == frequencies.periods.size())
        persist("modulation", phase::extract_modulation(set).modulation);
    }

    const tpu::HierarchicalResult gt = tpu::unwrap_hierarchical(frequencies, wrapped);
    persist("phi_gt", gt.absolute.values);
    persist("k_gt", gt.order.values);

    const int highest = frequencies.periods.back();
    const CameraPhase cam = camera_absolute_phase(scene, geom, highest);
    persist("validity", cam.valid);
    persist("depth_true", scene.depth);

    manifest.entries.push_back(std::move(entry));
  }

  write_manifest(out_dir / "manifest.tsv", manifest);
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ostringstream out;
  for (const ManifestEntry& e : manifest.entries) {
    out << e.scene_id << "\tsplit\t" << e.split << '\n';
    for (const auto& [role, rel] : e.roles)
      out << e.scene_id << '\t' << role << '\t' << rel << '\n';
  }
  io::write_text_file(path, out.str());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::istringstream in(io::read_text_file(path));
  DatasetManifest manifest;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string scene_id, role, value;
    if (!std::getline(ls, scene_id, '\t') || !std::getline(ls, role, '\t') ||
        !std::getline(ls, value))
      throw io::IoError(path.string(),
                        "malformed manifest line " + std::to_string(line_no));
    auto it = index.find(scene_id);
    if (it == index.end()) {
      index.emplace(scene_id, manifest.entries.size());
      manifest.entries.push_back(ManifestEntry{scene_id, "train", {}});
      it = index.find(scene_id);
    }
    ManifestEntry& entry = manifest.entries[it->second];
    if (role == "split")
      entry.split = value;
    else
      entry.roles[role] = value;
  }
  return manifest;
}

}  // namespace sim
}  // namespace fpp
