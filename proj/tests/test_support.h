#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fishlen/calibration.h"
#include "fishlen/detection.h"
#include "fishlen/geometry.h"
#include "fishlen/synthetic.h"

namespace fishlen::test {

inline double Deg(double d) { return d * std::numbers::pi / 180.0; }

inline Mat3 RotY(double deg) { return Eigen::AngleAxisd(Deg(deg), Vec3::UnitY()).toRotationMatrix(); }

inline Mat3 RandomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized().toRotationMatrix();
}

/// Standard rig with every refractive index set to 1.
inline StereoRig PinholeRig(double tilt_deg = 0.0) {
  StereoRig rig = StandardRig(tilt_deg);
  auto flatten = [](const FlatPortCamera& c) {
    RefractivePort p = c.port();
    p.n_air = p.n_glass = p.n_water = 1.0;
    return FlatPortCamera(c.intrinsics(), c.pose(), p);
  };
  rig.left = flatten(rig.left);
  rig.right = flatten(rig.right);
  return rig;
}

/// Classical pinhole projection K [R|t] P.
inline Pixel PinholeProject(const FlatPortCamera& cam, const Vec3& p) {
  const Vec3 c = cam.pose().rotation * p + cam.pose().translation;
  const PinholeIntrinsics& k = cam.intrinsics();
  return {k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy};
}

/// Rig-frame direction of the pinhole ray through an undistorted pixel.
inline Vec3 PinholeDirection(const FlatPortCamera& cam, Pixel px) {
  const PinholeIntrinsics& k = cam.intrinsics();
  const Vec3 d((px.u - k.cx) / k.fx, (px.v - k.cy) / k.fy, 1.0);
  return (cam.pose().rotation.transpose() * d).normalized();
}

/// Detection with a box and keypoints laid out around the box centre.
inline FishDetection MakeDetection(const std::string& id, Pixel center, double w, double h,
                                   QualityClass q = QualityClass::kHigh) {
  FishDetection d;
  d.id = id;
  d.bbox = {center, w, h};
  const double offsets[kNumKeypoints][2] = {
      {0.45, 0.0}, {0.32, -0.1}, {-0.05, -0.35}, {0.0, 0.3}, {-0.45, 0.0}};
  for (int i = 0; i < kNumKeypoints; ++i)
    d.keypoints[i].position = {center.u + offsets[i][0] * w, center.v + offsets[i][1] * h};
  d.quality = q;
  d.quality_scores = {0.0, 0.0, 0.0};
  d.quality_scores[static_cast<int>(q)] = 1.0;
  return d;
}

}  // namespace fishlen::test
