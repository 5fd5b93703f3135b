#include <doctest.h>

#include <cmath>

#include "fishlen/error.h"
#include "fishlen/filtering.h"
#include "test_support.h"

namespace fishlen {
namespace {

using test::Deg;
using test::MakeDetection;

MatchedPair Pair(double left_aspect, double right_aspect, QualityClass lq = QualityClass::kHigh,
                 QualityClass rq = QualityClass::kHigh) {
  return {MakeDetection("l", {500, 500}, 40 * left_aspect, 40, lq),
          MakeDetection("r", {400, 500}, 40 * right_aspect, 40, rq), {}, {}};
}

/// Measurement with the given mouth-to-tail vector.
FishMeasurement Body(const Vec3& axis) {
  FishMeasurement m;
  const Vec3 mouth(0, 0, 200);
  m.keypoints_3d[static_cast<int>(KeypointName::kMouth)] = mouth;
  m.keypoints_3d[static_cast<int>(KeypointName::kCaudalFin)] = mouth + axis;
  return m;
}

/// Measurement whose body axis makes `deg` degrees with +z.
FishMeasurement Body(double deg) { return Body(50.0 * Vec3(std::sin(Deg(deg)), 0, std::cos(Deg(deg)))); }

TEST_CASE("aspect boundary") {
  const FilterConfig cfg;
  CHECK(FilterAspect(Pair(1.5, 2.0), cfg).kept);
  CHECK(FilterAspect(Pair(2.0, 1.5), cfg).kept);
  CHECK(!FilterAspect(Pair(1.499, 2.0), cfg).kept);
  CHECK(!FilterAspect(Pair(2.0, 1.499), cfg).kept);
  CHECK(FilterAspect(Pair(2.0, 1.499), cfg).rejected_by == FilterStage::kAspect);
}

TEST_CASE("direction boundary against the left optical axis") {
  const StereoRig rig = StandardRig();
  const FilterConfig cfg;
  CHECK(FilterDirection(Body(Vec3(32, 0, 32)), rig.left, cfg).kept);
  CHECK(FilterDirection(Body(90.0), rig.left, cfg).kept);
  CHECK(!FilterDirection(Body(44.99), rig.left, cfg).kept);
  CHECK(!FilterDirection(Body(0.0), rig.left, cfg).kept);
  // The axis is unsigned: a fish facing away is as foreshortened as one facing the camera.
  CHECK(!FilterDirection(Body(170.0), rig.left, cfg).kept);
  CHECK(FilterDirection(Body(135.0), rig.left, cfg).kept);
}

TEST_CASE("axis angle") {
  CHECK(AxisAngleDeg(Vec3(1, 0, 0), Vec3::UnitZ()) == doctest::Approx(90.0));
  CHECK(AxisAngleDeg(Vec3(0, 0, -3), Vec3::UnitZ()) == doctest::Approx(0.0));
  CHECK(AxisAngleDeg(Vec3(1, 0, 1), Vec3(0, 0, 5)) == doctest::Approx(45.0));
  CHECK_THROWS_AS(AxisAngleDeg(Vec3::Zero(), Vec3::UnitZ()), DegenerateBody);
}

TEST_CASE("quality filter needs both views at the required class") {
  const FilterConfig cfg;
  CHECK(FilterQuality(Pair(2, 2), cfg).kept);
  CHECK(!FilterQuality(Pair(2, 2, QualityClass::kMedium), cfg).kept);
  CHECK(!FilterQuality(Pair(2, 2, QualityClass::kHigh, QualityClass::kLow), cfg).kept);
  FilterConfig medium;
  medium.require_quality = QualityClass::kMedium;
  CHECK(FilterQuality(Pair(2, 2, QualityClass::kMedium), medium).kept);
}

TEST_CASE("filters run in quality, aspect, direction order") {
  const StereoRig rig = StandardRig();
  const FilterConfig cfg;
  CHECK(ApplyFilters(Pair(1.0, 1.0, QualityClass::kLow), Body(0), rig.left, cfg).rejected_by ==
        FilterStage::kQuality);
  CHECK(ApplyFilters(Pair(1.0, 1.0), Body(0), rig.left, cfg).rejected_by == FilterStage::kAspect);
  CHECK(ApplyFilters(Pair(2.0, 2.0), Body(0), rig.left, cfg).rejected_by == FilterStage::kDirection);
  CHECK(ApplyFilters(Pair(2.0, 2.0), Body(80), rig.left, cfg).kept);
}

TEST_CASE("disabled stages keep everything") {
  const StereoRig rig = StandardRig();
  FilterConfig cfg;
  cfg.quality_enabled = cfg.aspect_enabled = cfg.direction_enabled = false;
  CHECK(ApplyFilters(Pair(1.0, 1.0, QualityClass::kLow), Body(0), rig.left, cfg).kept);
}

TEST_CASE("swapping views does not change the verdict") {
  const StereoRig rig = StandardRig();
  const FilterConfig cfg;
  for (double a : {1.2, 1.5, 2.5})
    for (double b : {1.4, 1.6})
      for (QualityClass q : {QualityClass::kLow, QualityClass::kHigh}) {
        const MatchedPair p = Pair(a, b, q, QualityClass::kHigh);
        const MatchedPair s{p.right, p.left, {}, {}};
        CHECK(ApplyFilters(p, Body(60), rig.left, cfg).rejected_by ==
              ApplyFilters(s, Body(60), rig.left, cfg).rejected_by);
      }
}

TEST_CASE("filter config validation") {
  FilterConfig cfg;
  cfg.min_axis_angle_deg = 91;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  cfg = {};
  cfg.min_aspect = 0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
}

}  // namespace
}  // namespace fishlen
