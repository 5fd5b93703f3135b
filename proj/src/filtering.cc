#include "fishlen/filtering.h"

#include "fishlen/error.h"

namespace fishlen {

std::string_view ToString(FilterStage s) {
  switch (s) {
    case FilterStage::kQuality:
      return "quality";
    case FilterStage::kAspect:
      return "aspect";
    case FilterStage::kDirection:
      return "direction";
  }
  return "unknown";
}

void FilterConfig::Validate() const {
  if (!(min_aspect > 0.0)) throw ConfigError("min_aspect must be positive");
  if (!(min_axis_angle_deg >= 0.0 && min_axis_angle_deg <= 90.0))
    throw ConfigError("min_axis_angle_deg must lie in [0, 90]");
}

FilterVerdict FilterQuality(const MatchedPair& pair, const FilterConfig& cfg) {
  if (!cfg.quality_enabled) return FilterVerdict::Keep();
  if (pair.left.quality < cfg.require_quality || pair.right.quality < cfg.require_quality)
    return FilterVerdict::Reject(FilterStage::kQuality);
  return FilterVerdict::Keep();
}

FilterVerdict FilterAspect(const MatchedPair& pair, const FilterConfig& cfg) {
  if (!cfg.aspect_enabled) return FilterVerdict::Keep();
  if (pair.left.bbox.AspectRatio() < cfg.min_aspect || pair.right.bbox.AspectRatio() < cfg.min_aspect)
    return FilterVerdict::Reject(FilterStage::kAspect);
  return FilterVerdict::Keep();
}

FilterVerdict FilterDirection(const FishMeasurement& measurement, const FlatPortCamera& camera,
                              const FilterConfig& cfg) {
  if (!cfg.direction_enabled) return FilterVerdict::Keep();
  const Vec3 body = measurement.keypoint(KeypointName::kCaudalFin) -
                    measurement.keypoint(KeypointName::kMouth);
  if (AxisAngleDeg(body, OpticalAxis(camera)) < cfg.min_axis_angle_deg)
    return FilterVerdict::Reject(FilterStage::kDirection);
  return FilterVerdict::Keep();
}

FilterVerdict ApplyFilters(const MatchedPair& pair, const FishMeasurement& measurement,
                           const FlatPortCamera& camera, const FilterConfig& cfg) {
  if (FilterVerdict v = FilterQuality(pair, cfg); !v.kept) return v;
  if (FilterVerdict v = FilterAspect(pair, cfg); !v.kept) return v;
  return FilterDirection(measurement, camera, cfg);
}

}  // namespace fishlen
