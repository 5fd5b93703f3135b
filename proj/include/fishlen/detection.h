#pragma once

/// @file
/// Fish detection data model and the detection JSON-lines file format.
///
/// One frame per line:
///
///   {"camera":"left","detections":[...],"frame_id":0,
///    "image_path":"images/000000_left.pgm","schema_version":1}
///
/// and one detection per array element:
///
///   {"bbox":{"cx":..,"cy":..,"h":..,"w":..},"id":"7",
///    "keypoints":{"caudal_fin":{"conf":..,"u":..,"v":..},"dorsal_fin":{...},
///                 "eye":{...},"mouth":{...},"ventral_fin":{...}},
///    "quality":"high","quality_scores":[p_low,p_medium,p_high]}
///
/// Writers emit sorted keys and six fixed decimals so files diff cleanly.
/// Quality scores must already be normalized to sum to one; converters from
/// detectors that emit raw logits have to apply a softmax first.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fishlen/geometry.h"

namespace fishlen {

enum class KeypointName { kMouth = 0, kEye, kDorsalFin, kVentralFin, kCaudalFin };
inline constexpr int kNumKeypoints = 5;
inline constexpr std::array<KeypointName, kNumKeypoints> kAllKeypoints = {
    KeypointName::kMouth, KeypointName::kEye, KeypointName::kDorsalFin,
    KeypointName::kVentralFin, KeypointName::kCaudalFin};

std::string_view ToString(KeypointName k);
std::optional<KeypointName> KeypointFromString(std::string_view s);

enum class QualityClass { kLow = 0, kMedium = 1, kHigh = 2 };

std::string_view ToString(QualityClass q);
std::optional<QualityClass> QualityFromString(std::string_view s);

enum class CameraSide { kLeft, kRight };

std::string_view ToString(CameraSide c);

struct Keypoint {
  Pixel position;
  double confidence = 1.0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

/// Axis-aligned box stored as centre and size.
struct BoundingBox {
  Pixel center;
  double width = 0.0;
  double height = 0.0;

  double AspectRatio() const { return width / height; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct FishDetection {
  std::string id;
  BoundingBox bbox;
  std::array<Keypoint, kNumKeypoints> keypoints{};
  QualityClass quality = QualityClass::kHigh;
  /// Probabilities for (low, medium, high).
  std::array<double, 3> quality_scores{0.0, 0.0, 1.0};

  const Keypoint& keypoint(KeypointName k) const { return keypoints[static_cast<int>(k)]; }
  Keypoint& keypoint(KeypointName k) { return keypoints[static_cast<int>(k)]; }

  /// Throws ValidationError naming this detection and the broken invariant.
  void Validate() const;

  friend bool operator==(const FishDetection&, const FishDetection&) = default;
};

struct DetectionFrame {
  int frame_id = 0;
  CameraSide camera = CameraSide::kLeft;
  std::optional<std::string> image_path;
  std::vector<FishDetection> detections;

  void Validate() const;
  friend bool operator==(const DetectionFrame&, const DetectionFrame&) = default;
};

inline constexpr int kDetectionSchemaVersion = 1;

std::vector<DetectionFrame> ReadDetectionFile(const std::string& path);
std::vector<DetectionFrame> ParseDetectionLines(std::string_view text);

void WriteDetectionFile(const std::vector<DetectionFrame>& frames, const std::string& path);
std::string SerializeDetectionLines(const std::vector<DetectionFrame>& frames);

}  // namespace fishlen
