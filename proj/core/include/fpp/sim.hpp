#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpp/geometry.hpp"
#include "fpp/phase.hpp"
#include "fpp/tpu.hpp"

namespace fpp {

/// Depth scene plus its optical properties, camera-resolution rasters.
struct SceneSpec {
  Grid depth;          // mm
  Grid reflectivity;   // [0, 1]
  Mask validity;       // scene-level valid pixels
  double noise_sigma = 0.0;       // intensity units
  std::optional<int> blur_kernel; // horizontal box blur length, pixels
  double blur_drift = 0.0;        // extra per-image shift, pixels (experimental)
  bool quantize = false;          // round intensities to integers in [0, 255]

  void validate() const;
};

enum class SceneKind {
  Plane,
  Hemisphere,
  Step,
  IsolatedBlobs,
  LowReflectivity,
  MotionBlur,
};

SceneKind scene_kind_from_string(const std::string& name);
std::string to_string(SceneKind kind);

struct SceneParams {
  double z0 = 0.0;          // base depth, mm
  double radius = 5.0;      // hemisphere radius, mm
  double step_height = 2.0; // step dz, mm
  int blob_count = 3;
  double low_reflectivity = 0.02;
  int blur_length = 5;
  double noise_sigma = 0.0;
  bool quantize = false;
};

namespace sim {

/// Unit-frequency absolute phase of the camera view; the mask marks pixels
/// whose projector coordinate stays inside the usable projector range.
struct CameraPhase {
  AbsolutePhaseMap phase;  // period a
  Mask valid;
};

CameraPhase camera_absolute_phase(const SceneSpec& scene,
                                  const SystemGeometry& geom, int period_number);

/// Projector column hit by each camera pixel: x*W_p/W_c + offset + K*z.
Grid projector_column(const SceneSpec& scene, const SystemGeometry& geom);

FringeImageSet render_scene(const SceneSpec& scene, const SystemGeometry& geom,
                            int period_number, int n_steps, std::uint64_t seed);

Grid phase_to_height(const AbsolutePhaseMap& unit_phase, const SystemGeometry& geom);

SceneSpec make_scene(SceneKind kind, const SceneParams& params,
                     const SystemGeometry& geom, std::uint64_t seed);

/// One dataset entry: where each array of a scene lives on disk.
struct ManifestEntry {
  std::string scene_id;
  std::string split;  // train | val | test
  std::map<std::string, std::string> roles;  // role -> relative path
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(const std::string& name) const;
};

struct SceneRequest {
  std::string id;
  SceneKind kind = SceneKind::Plane;
  SceneParams params;
  std::string split = "train";
};

/// Renders each scene at every frequency and persists fringe images, wrapped
/// phases, modulation, MF-TPU ground truth, masks and true depth as FPA
/// arrays, plus a line-oriented manifest (scene_id<TAB>role<TAB>path).
DatasetManifest make_dataset(const std::vector<SceneRequest>& scenes,
                             const SystemGeometry& geom,
                             const FrequencySet& frequencies, int n_steps,
                             std::uint64_t seed,
                             const std::filesystem::path& out_dir);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace sim
}  // namespace fpp
