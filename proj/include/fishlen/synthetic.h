#pragma once

/// @file
/// Synthetic stereo scenes with exact ground truth.
///
/// Fish are planar five-keypoint bodies posed inside a tank volume and
/// projected through the refractive model of both cameras. Detections get
/// seeded Gaussian corruption; optional images are ray-cast so that texture is
/// consistent between the views.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fishlen/calibration.h"
#include "fishlen/detection.h"
#include "fishlen/image.h"
#include "fishlen/measurement.h"

namespace fishlen {

/// Axis-aligned tank volume in the rig frame, millimetres.
struct TankBox {
  Vec3 min;
  Vec3 max;
};

struct CorruptionModel {
  double keypoint_noise_sigma_px = 0.0;
  double bbox_noise_sigma_px = 0.0;
  double low_quality_fraction = 0.0;
  double low_quality_noise_multiplier = 1.0;
  std::uint64_t rng_seed = 0;
};

struct SceneOptions {
  int n_fish = 10;
  TankBox tank;
  double min_length_mm = 25.0;
  double max_length_mm = 80.0;
  double bbox_margin_px = 8.0;
  /// Keypoints stay this far inside both sensors.
  double border_margin_px = 40.0;
  /// Minimum box-centre distance between fish in each view.
  double min_center_separation_px = 60.0;
  /// Place fish in pairs sharing a height so their epipolar gates overlap.
  bool crowded_pairs = false;
  /// Reject placements after which greedy matching of the noiseless
  /// detections (default matching config) no longer pairs every fish correctly.
  bool require_recoverable_pairing = true;
  /// When positive, each true pair must also cost at least this much less than
  /// any other pairing of either of its detections (noiseless detections).
  double pairing_margin = 0.0;
  int max_retries = 2000;
  bool render_images = false;
  /// The back wall belongs to the tank, so it is shared by every frame.
  std::uint64_t wall_seed = 0x3A11;
};

struct SyntheticFish {
  double length_mm = 0.0;
  /// Canonical body frame: x towards the mouth, y dorsal, z lateral.
  std::array<Vec3, kNumKeypoints> body_keypoints;
  Mat3 rotation = Mat3::Identity();  ///< body to rig
  Vec3 translation = Vec3::Zero();   ///< body origin in rig frame
  QualityClass quality_truth = QualityClass::kHigh;
  std::uint64_t texture_seed = 0;

  Vec3 ToRig(const Vec3& body) const { return rotation * body + translation; }
  std::array<Vec3, kNumKeypoints> RigKeypoints() const;
};

/// Five keypoints of a fish of the given length; mouth-to-caudal == length.
std::array<Vec3, kNumKeypoints> CanonicalBody(double length_mm);

struct StereoBackdrop;

struct SyntheticScene {
  DetectionFrame left;
  DetectionFrame right;
  GroundTruthFrame truth;
  std::vector<SyntheticFish> fish;
  std::optional<GrayImage> left_image;
  std::optional<GrayImage> right_image;
};

/// `backdrop` is rendered on demand when images are requested and none is given.
SyntheticScene GenerateScene(int frame_id, const StereoRig& rig, const SceneOptions& options,
                             const CorruptionModel& corruption,
                             const StereoBackdrop* backdrop = nullptr);

/// Ray-cast image of the textured back wall, 15 mm behind the tank volume.
GrayImage RenderBackdrop(const FlatPortCamera& camera, const TankBox& tank,
                         std::uint64_t wall_seed);

struct StereoBackdrop {
  GrayImage left;
  GrayImage right;
};

StereoBackdrop RenderStereoBackdrop(const StereoRig& rig, const TankBox& tank,
                                    std::uint64_t wall_seed);

/// Ray-casts textured fish over `backdrop`. Fish texture is attached to the
/// body, so both views agree; `noise_seed` drives per-view sensor noise of +-2
/// grey levels.
GrayImage RenderView(const FlatPortCamera& camera, const std::vector<SyntheticFish>& fish,
                     const GrayImage& backdrop, std::uint64_t noise_seed);

/// Reference rig: two parallel cameras, 80 mm baseline, 40 mm from a 5 mm pane.
/// `tilt_deg` rotates the pane normal about the vertical axis.
StereoRig StandardRig(double tilt_deg = 0.0);
TankBox StandardTank();

struct BenchmarkProfile {
  std::string name;
  int frames = 0;
  SceneOptions scene;
  CorruptionModel corruption;
  /// Whether the suite ships images by default.
  bool images = false;
};

/// "clean", "noisy" or "crowded". Throws ConfigError for other names.
BenchmarkProfile GetBenchmarkProfile(const std::string& name);

struct SceneSuite {
  StereoRig rig;
  std::vector<SyntheticScene> scenes;
};

SceneSuite StandardBenchmark(const BenchmarkProfile& profile, bool render_images);
/// Uses the profile's default for images.
SceneSuite StandardBenchmark(const std::string& profile_name);

/// Writes rig.json, detections.jsonl, ground_truth.json and (when the scenes
/// carry images) images/NNNNNN_{left,right}.pgm under `out_dir`.
void WriteSceneSuite(const SceneSuite& suite, const std::string& out_dir);

}  // namespace fishlen
