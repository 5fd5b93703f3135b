#pragma once

#include <optional>
#include <string_view>

#include "fishlen/detection.h"
#include "fishlen/geometry.h"
#include "fishlen/matching.h"
#include "fishlen/measurement.h"

namespace fishlen {

/// Filters in the order they are evaluated.
enum class FilterStage { kQuality, kAspect, kDirection };

std::string_view ToString(FilterStage s);

struct FilterConfig {
  QualityClass require_quality = QualityClass::kHigh;
  double min_aspect = 1.5;          ///< width / height, both views
  double min_axis_angle_deg = 45.0;
  bool quality_enabled = true;
  bool aspect_enabled = true;
  bool direction_enabled = true;

  void Validate() const;
};

struct FilterVerdict {
  bool kept = true;
  std::optional<FilterStage> rejected_by;

  static FilterVerdict Keep() { return {}; }
  static FilterVerdict Reject(FilterStage s) { return {false, s}; }
};

/// Both detections must reach the required quality class.
FilterVerdict FilterQuality(const MatchedPair& pair, const FilterConfig& cfg);

/// Both boxes must have width / height >= min_aspect.
FilterVerdict FilterAspect(const MatchedPair& pair, const FilterConfig& cfg);

/// Rejects fish whose mouth-to-caudal axis is within min_axis_angle_deg of the
/// camera's optical axis. Throws DegenerateBody.
FilterVerdict FilterDirection(const FishMeasurement& measurement, const FlatPortCamera& camera,
                              const FilterConfig& cfg);

/// Runs all enabled filters; reports the first failing one.
FilterVerdict ApplyFilters(const MatchedPair& pair, const FishMeasurement& measurement,
                           const FlatPortCamera& camera, const FilterConfig& cfg);

}  // namespace fishlen
