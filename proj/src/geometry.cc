#include "fishlen/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fishlen/error.h"

namespace fishlen {

double Distance(Pixel a, Pixel b) { return std::hypot(a.u - b.u, a.v - b.v); }

void PinholeIntrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("intrinsics", "focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ValidationError("intrinsics", "image size must be positive");
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height))
    throw ValidationError("intrinsics", "principal point must lie inside the image");
  if (!std::isfinite(k1) || !std::isfinite(k2)) throw ValidationError("intrinsics", "distortion must be finite");
}

Eigen::Vector2d PinholeIntrinsics::Normalize(Pixel p) const {
  return {(p.u - cx) / fx, (p.v - cy) / fy};
}

Pixel PinholeIntrinsics::FromNormalized(const Eigen::Vector2d& xy) const {
  return {fx * xy.x() + cx, fy * xy.y() + cy};
}

bool PinholeIntrinsics::Contains(Pixel p) const {
  return p.u >= 0.0 && p.v >= 0.0 && p.u <= width - 1.0 && p.v <= height - 1.0;
}

Pixel DistortPixel(const PinholeIntrinsics& k, Pixel undistorted) {
  Eigen::Vector2d xy = k.Normalize(undistorted);
  const double r2 = xy.squaredNorm();
  return k.FromNormalized(xy * (1.0 + k.k1 * r2 + k.k2 * r2 * r2));
}

Pixel UndistortPixel(const PinholeIntrinsics& k, Pixel distorted) {
  const Eigen::Vector2d xd = k.Normalize(distorted);
  Eigen::Vector2d xy = xd;
  for (int i = 0; i < 50; ++i) {
    const double r2 = xy.squaredNorm();
    const Eigen::Vector2d next = xd / (1.0 + k.k1 * r2 + k.k2 * r2 * r2);
    if ((next - xy).norm() < 1e-15) {
      xy = next;
      break;
    }
    xy = next;
  }
  return k.FromNormalized(xy);
}

void RefractivePort::Validate() const {
  if (!(n_air >= 1.0) || !(n_glass >= 1.0) || !(n_water >= 1.0))
    throw ValidationError("port", "refractive indices must be >= 1");
  if (!(d_glass > 0.0)) throw ValidationError("port", "d_glass must be positive");
  if (!(t_glass > 0.0)) throw ValidationError("port", "t_glass must be positive");
  if (std::abs(normal.norm() - 1.0) > 1e-9) throw ValidationError("port", "normal must be a unit vector");
}

void CameraPose::Validate() const {
  if (!rotation.allFinite() || !translation.allFinite())
    throw ValidationError("pose", "pose must be finite");
  if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw ValidationError("pose", "rotation must be orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw ValidationError("pose", "rotation must have determinant +1");
}

FlatPortCamera::FlatPortCamera(PinholeIntrinsics intrinsics, CameraPose pose,
                               RefractivePort port)
    : intrinsics_(intrinsics), pose_(pose), port_(port) {
  intrinsics_.Validate();
  pose_.Validate();
  port_.Validate();
  center_ = pose_.Center();
  if (OpticalAxis(*this).dot(port_.normal) <= 0.0)
    throw ValidationError("camera", "camera must face the port");
}

double FlatPortCamera::WaterDepth(const Vec3& p) const {
  return port_.normal.dot(p - center_) - port_.d_glass - port_.t_glass;
}

Vec3 RefractDirection(const Vec3& incident, const Vec3& surface_normal, double n1,
                      double n2) {
  const double cos1 = incident.dot(surface_normal);
  if (!(cos1 > 0.0))
    throw std::invalid_argument("RefractDirection: normal must point along propagation");
  const double ratio = n1 / n2;
  // |i x n|^2 keeps precision near grazing and near the critical angle.
  const double sin1_sq = incident.cross(surface_normal).squaredNorm();
  const double sin2_sq = ratio * ratio * sin1_sq;
  if (sin2_sq > 1.0) throw TotalInternalReflection();
  const double cos2 = std::sqrt(1.0 - sin2_sq);
  return (ratio * incident + (cos2 - ratio * cos1) * surface_normal).normalized();
}

WaterRay TracePixelRay(const FlatPortCamera& camera, Pixel pixel) {
  if (!std::isfinite(pixel.u) || !std::isfinite(pixel.v))
    throw std::invalid_argument("TracePixelRay: pixel must be finite");
  const RefractivePort& port = camera.port();
  const Vec3& n = port.normal;

  const Eigen::Vector2d xy = camera.intrinsics().Normalize(pixel);
  const Vec3 in_air =
      (camera.pose().rotation.transpose() * Vec3(xy.x(), xy.y(), 1.0)).normalized();
  const double cos_air = in_air.dot(n);
  if (cos_air <= 1e-12) throw RayParallelToPort();

  const Vec3 inner = camera.center() + (port.d_glass / cos_air) * in_air;
  const Vec3 in_glass = RefractDirection(in_air, n, port.n_air, port.n_glass);
  const Vec3 outer = inner + (port.t_glass / in_glass.dot(n)) * in_glass;
  const Vec3 in_water = RefractDirection(in_glass, n, port.n_glass, port.n_water);
  return {outer, in_water, n};
}

Vec3 PointAtDepth(const WaterRay& ray, double depth) {
  if (depth < 0.0) throw std::invalid_argument("PointAtDepth: depth must be non-negative");
  return ray.origin + (depth / ray.direction.dot(ray.port_normal)) * ray.direction;
}

namespace {

// tan(asin(s)) and its derivative.
inline double TanOfSin(double s) { return s / std::sqrt(1.0 - s * s); }
inline double TanOfSinPrime(double s) {
  const double c2 = 1.0 - s * s;
  return 1.0 / (c2 * std::sqrt(c2));
}

}  // namespace

Pixel ForwardProject(const FlatPortCamera& camera, const Vec3& point,
                     const ProjectionOptions& options) {
  const RefractivePort& port = camera.port();
  const Vec3& n = port.normal;
  const Vec3 v = point - camera.center();
  const double axial = n.dot(v);
  const double depth = axial - port.d_glass - port.t_glass;
  if (!(depth > 0.0)) throw PointBehindPort("point is not on the water side of the port");

  const Vec3 radial_vec = v - axial * n;
  const double radial = radial_vec.norm();

  double s = 0.0;  // sine of the in-air angle to the normal
  if (radial > 0.0) {
    const double glass_ratio = port.n_air / port.n_glass;
    const double water_ratio = port.n_air / port.n_water;
    // Radial offset reached at the point's depth, as a function of s.
    auto residual = [&](double x) {
      return port.d_glass * TanOfSin(x) + port.t_glass * TanOfSin(glass_ratio * x) +
             depth * TanOfSin(water_ratio * x) - radial;
    };
    auto slope = [&](double x) {
      return port.d_glass * TanOfSinPrime(x) +
             port.t_glass * glass_ratio * TanOfSinPrime(glass_ratio * x) +
             depth * water_ratio * TanOfSinPrime(water_ratio * x);
    };

    double lo = 0.0;
    double hi = std::min({1.0, 1.0 / glass_ratio, 1.0 / water_ratio});
    s = std::clamp(radial / v.norm(), lo, std::nextafter(hi, 0.0));
    bool converged = false;
    double f = residual(s);
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
      if (std::abs(f) <= options.residual_tolerance_mm) {
        converged = true;
        break;
      }
      if (f < 0.0)
        lo = s;
      else
        hi = s;
      double next = s - f / slope(s);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (next <= lo || next >= hi) {
        // Bracket collapsed to adjacent doubles: best attainable root.
        converged = true;
        break;
      }
      s = next;
      f = residual(s);
    }
    if (!converged) throw NoConvergence(iter, std::abs(f));
  }

  Vec3 dir = std::sqrt(1.0 - s * s) * n;
  if (radial > 0.0) dir += s * (radial_vec / radial);
  const Vec3 cam_dir = camera.pose().rotation * dir;
  if (!(cam_dir.z() > 0.0)) throw PointBehindPort("point is behind the camera");
  return camera.intrinsics().FromNormalized(
      Eigen::Vector2d(cam_dir.x() / cam_dir.z(), cam_dir.y() / cam_dir.z()));
}

Vec3 OpticalAxis(const FlatPortCamera& camera) {
  return camera.pose().rotation.row(2).transpose();
}

}  // namespace fishlen
