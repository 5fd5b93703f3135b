#include "fishlen/epipolar.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fishlen {

EpipolarCurve ComputeEpipolarCurve(const FlatPortCamera& source,
                                   const FlatPortCamera& target, Pixel pixel,
                                   DepthRange range, int segments) {
  if (!(range.z_min > 0.0) || !(range.z_max > range.z_min))
    throw std::invalid_argument("epipolar depth range must satisfy 0 < z_min < z_max");
  if (segments < 1) throw std::invalid_argument("epipolar curve needs at least one segment");

  const WaterRay ray = TracePixelRay(source, pixel);
  EpipolarCurve curve;
  curve.depth_range = range;
  curve.source_pixel = pixel;
  curve.vertices.reserve(segments + 1);
  curve.depths.reserve(segments + 1);
  const double step = (range.z_max - range.z_min) / segments;
  for (int k = 0; k <= segments; ++k) {
    const double z = k == segments ? range.z_max : range.z_min + k * step;
    curve.depths.push_back(z);
    curve.vertices.push_back(ForwardProject(target, PointAtDepth(ray, z)));
  }
  return curve;
}

double PointSegmentDistance(Pixel query, Pixel a, Pixel b, Pixel* closest) {
  const double du = b.u - a.u;
  const double dv = b.v - a.v;
  const double len_sq = du * du + dv * dv;
  double t = 0.0;
  if (len_sq > 0.0)
    t = std::clamp(((query.u - a.u) * du + (query.v - a.v) * dv) / len_sq, 0.0, 1.0);
  const Pixel p{a.u + t * du, a.v + t * dv};
  if (closest) *closest = p;
  return std::hypot(query.u - p.u, query.v - p.v);
}

CurveQuery ClosestPointOnCurve(const EpipolarCurve& curve, Pixel query) {
  CurveQuery best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < curve.vertices.size(); ++i) {
    Pixel p;
    const double d = PointSegmentDistance(query, curve.vertices[i], curve.vertices[i + 1], &p);
    if (d < best.distance) {
      best = {p, d, i};
    }
  }
  return best;
}

double ChordError(const EpipolarCurve& curve, const FlatPortCamera& source,
                  const FlatPortCamera& target) {
  const EpipolarCurve dense =
      ComputeEpipolarCurve(source, target, curve.source_pixel, curve.depth_range,
                           4 * static_cast<int>(curve.segment_count()));
  double worst = 0.0;
  for (const Pixel& p : dense.vertices)
    worst = std::max(worst, ClosestPointOnCurve(curve, p).distance);
  return worst;
}

CurveProvider MakeCurveProvider(const FlatPortCamera& source, const FlatPortCamera& target,
                                DepthRange range, int segments) {
  return [source, target, range, segments](Pixel p) {
    return ComputeEpipolarCurve(source, target, p, range, segments);
  };
}

}  // namespace fishlen
