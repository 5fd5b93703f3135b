#pragma once

#include <array>

#include "fishlen/detection.h"
#include "fishlen/epipolar.h"
#include "fishlen/image.h"
#include "fishlen/matching.h"

namespace fishlen {

struct RefinementConfig {
  int template_half = 10;       ///< 21 x 21 template
  int search_half = 30;         ///< +-30 px around the right keypoint
  double epipolar_gate = 5.0;   ///< max distance of a candidate to the curve
  double min_ncc = 0.2;
  /// Keypoints to refine, indexed by KeypointName.
  std::array<bool, kNumKeypoints> keypoints{true, true, true, true, true};

  void Validate() const;
};

/// Zero-mean normalized cross-correlation of two equally sized patches.
/// Returns 0 when exactly one patch is constant; throws ZeroVariance when both are.
double Ncc(const GrayImage& a, const GrayImage& b);

/// Copies the (2*half+1)^2 window centred at (cx, cy). Throws TemplateOutOfBounds.
GrayImage ExtractPatch(const GrayImage& image, int cx, int cy, int half);

struct RefinedKeypoint {
  Pixel position;
  double score = 0.0;
  bool refined = false;
};

/// Moves a right-image keypoint to the integer position within the search
/// window and epipolar gate where the template around the left keypoint
/// correlates best. Falls back to the input when nothing qualifies.
RefinedKeypoint RefineKeypoint(const GrayImage& left_image, const GrayImage& right_image,
                               Pixel left_kp, Pixel right_kp, const EpipolarCurve& curve,
                               const RefinementConfig& cfg);

/// Refines the configured keypoints of a matched pair in place. Keypoints whose
/// template leaves the left image are kept unrefined.
void RefinePair(MatchedPair& pair, const GrayImage& left_image, const GrayImage& right_image,
                const CurveProvider& curves, const RefinementConfig& cfg);

}  // namespace fishlen
