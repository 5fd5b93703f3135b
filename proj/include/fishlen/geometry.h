#pragma once

/// @file
/// Flat-port refractive camera model.
///
/// A pinhole camera looks through a planar stack air | glass | water. All
/// viewing rays in water pass through the line spanned by the camera centre
/// and the port normal (an axial camera), so every ray path is confined to the
/// plane containing that axis and the imaged point. Forward projection uses
/// this to reduce to a one-dimensional root find.
///
/// Units: millimetres for positions, pixels for image coordinates.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fishlen {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Undistorted image coordinate. Not clamped to the sensor.
struct Pixel {
  double u = 0.0;
  double v = 0.0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

inline Pixel operator+(Pixel a, Pixel b) { return {a.u + b.u, a.v + b.v}; }
inline Pixel operator-(Pixel a, Pixel b) { return {a.u - b.u, a.v - b.v}; }
inline Pixel operator*(double s, Pixel a) { return {s * a.u, s * a.v}; }
double Distance(Pixel a, Pixel b);

struct PinholeIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  /// Radial distortion; only used by DistortPixel / UndistortPixel.
  double k1 = 0.0;
  double k2 = 0.0;

  void Validate() const;
  /// Normalized image-plane coordinates (x/z, y/z) of an undistorted pixel.
  Eigen::Vector2d Normalize(Pixel p) const;
  Pixel FromNormalized(const Eigen::Vector2d& xy) const;
  bool Contains(Pixel p) const;
};

/// Maps an undistorted pixel to the raw sensor pixel under the radial model.
Pixel DistortPixel(const PinholeIntrinsics& k, Pixel undistorted);
/// Inverse of DistortPixel by fixed-point iteration.
Pixel UndistortPixel(const PinholeIntrinsics& k, Pixel distorted);

struct RefractivePort {
  double n_air = 1.0;
  double n_glass = 1.5;
  double n_water = 1.33;
  /// Camera centre to the air-side glass plane, along the normal.
  double d_glass = 0.0;
  double t_glass = 0.0;
  /// Unit normal in the rig frame, pointing from the camera into the water.
  Vec3 normal = Vec3::UnitZ();

  void Validate() const;
};

/// Rig-to-camera transform: x_cam = rotation * x_rig + translation.
struct CameraPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void Validate() const;
  Vec3 Center() const { return -rotation.transpose() * translation; }
};

class FlatPortCamera {
 public:
  FlatPortCamera() = default;
  FlatPortCamera(PinholeIntrinsics intrinsics, CameraPose pose, RefractivePort port);

  const PinholeIntrinsics& intrinsics() const { return intrinsics_; }
  const CameraPose& pose() const { return pose_; }
  const RefractivePort& port() const { return port_; }
  const Vec3& center() const { return center_; }

  /// Signed distance of `p` beyond the water-side glass plane, along the normal.
  double WaterDepth(const Vec3& p) const;

 private:
  PinholeIntrinsics intrinsics_;
  CameraPose pose_;
  RefractivePort port_;
  Vec3 center_ = Vec3::Zero();
};

/// A viewing ray after it has left the glass.
struct WaterRay {
  Vec3 origin;     ///< on the water-side glass plane
  Vec3 direction;  ///< unit, into the water
  Vec3 port_normal;
};

/// Snell refraction. `surface_normal` is oriented along the propagation
/// direction (incident . normal > 0). Throws TotalInternalReflection.
Vec3 RefractDirection(const Vec3& incident, const Vec3& surface_normal, double n1,
                      double n2);

/// Exact pixel to water-ray back projection through both interfaces.
WaterRay TracePixelRay(const FlatPortCamera& camera, Pixel pixel);

/// Point on `ray` whose distance beyond the outer glass plane is `depth`.
Vec3 PointAtDepth(const WaterRay& ray, double depth);

struct ProjectionOptions {
  int max_iterations = 50;
  double residual_tolerance_mm = 1e-9;
};

/// Water point to pixel. Solves for the in-air ray angle so that the refracted
/// path reaches the point's radial distance from the camera axis.
Pixel ForwardProject(const FlatPortCamera& camera, const Vec3& point,
                     const ProjectionOptions& options = {});

/// Viewing direction of the camera in the rig frame.
Vec3 OpticalAxis(const FlatPortCamera& camera);

}  // namespace fishlen
