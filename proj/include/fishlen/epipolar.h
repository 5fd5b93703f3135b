#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fishlen/geometry.h"

namespace fishlen {

struct DepthRange {
  double z_min = 5.0;
  double z_max = 0.0;
};

/// Piecewise-linear image of a source pixel's water ray in the target view.
/// Vertex k is the projection of the ray point at depths[k]; depths increase
/// strictly.
struct EpipolarCurve {
  std::vector<Pixel> vertices;
  std::vector<double> depths;
  DepthRange depth_range;
  Pixel source_pixel;

  std::size_t segment_count() const { return vertices.size() - 1; }
};

struct CurveQuery {
  Pixel closest_point;
  double distance = 0.0;
  std::size_t segment_index = 0;
};

inline constexpr int kDefaultCurveSegments = 32;

/// Chord error bound for the default sampling, measured on the part of the
/// curve that lands inside the target image. Curve sections far outside the
/// image (near z_min, corner pixels) can exceed it.
inline constexpr double kChordTolerancePx = 0.5;

EpipolarCurve ComputeEpipolarCurve(const FlatPortCamera& source,
                                   const FlatPortCamera& target, Pixel pixel,
                                   DepthRange range, int segments = kDefaultCurveSegments);

/// Closest point over all segments; ties go to the lowest segment index.
CurveQuery ClosestPointOnCurve(const EpipolarCurve& curve, Pixel query);

/// Distance from `query` to segment [a, b] and the realizing point.
double PointSegmentDistance(Pixel query, Pixel a, Pixel b, Pixel* closest = nullptr);

/// Largest distance from a 4x denser sampling of the same ray to `curve`.
double ChordError(const EpipolarCurve& curve, const FlatPortCamera& source,
                  const FlatPortCamera& target);

/// Supplies the curve of a left-image pixel in the right image.
using CurveProvider = std::function<EpipolarCurve(Pixel)>;

CurveProvider MakeCurveProvider(const FlatPortCamera& source, const FlatPortCamera& target,
                                DepthRange range, int segments = kDefaultCurveSegments);

}  // namespace fishlen
