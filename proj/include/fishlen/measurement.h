#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fishlen/calibration.h"
#include "fishlen/detection.h"
#include "fishlen/geometry.h"
#include "fishlen/matching.h"

namespace fishlen {

struct Triangulation {
  Vec3 point;     ///< midpoint of the shortest segment between the rays
  double gap_mm;  ///< length of that segment
};

/// Midpoint triangulation of two water rays. Throws NearParallelRays.
Triangulation TriangulateRays(const WaterRay& a, const WaterRay& b);
Triangulation Triangulate(const FlatPortCamera& left, const FlatPortCamera& right,
                          Pixel left_px, Pixel right_px);

/// Angle between a body axis and a viewing axis in degrees, folded into
/// [0, 90] so direction and sign do not matter. Throws DegenerateBody for a
/// body shorter than 1e-6 mm.
double AxisAngleDeg(const Vec3& body, const Vec3& axis);

struct FishMeasurement {
  std::string pair_id;
  std::array<Vec3, kNumKeypoints> keypoints_3d;
  std::array<double, kNumKeypoints> ray_gap_mm{};
  double length_mm = 0.0;
  double axis_angle_deg = 0.0;  ///< against the left camera's optical axis

  const Vec3& keypoint(KeypointName k) const { return keypoints_3d[static_cast<int>(k)]; }
  double MaxRayGap() const;
};

/// Triangulates all five keypoints of a matched pair and derives the
/// mouth-to-caudal length and swimming-axis angle.
FishMeasurement MeasurePair(const MatchedPair& pair, const StereoRig& rig,
                            const std::string& pair_id);

/// Annotated fish as seen in both views.
struct GroundTruthFish {
  int gt_id = 0;
  std::string left_id;
  std::string right_id;
  BoundingBox left_box;
  BoundingBox right_box;
  double length_mm = 0.0;
  QualityClass quality = QualityClass::kHigh;
  std::array<Vec3, kNumKeypoints> keypoints_3d;
};

struct GroundTruthFrame {
  int frame_id = 0;
  std::vector<GroundTruthFish> fish;
};

struct GroundTruth {
  std::vector<GroundTruthFrame> frames;

  const GroundTruthFrame* Find(int frame_id) const;
  std::size_t FishCount() const;
};

std::string SerializeGroundTruth(const GroundTruth& gt);
GroundTruth ParseGroundTruth(const std::string& json_text);
GroundTruth ReadGroundTruth(const std::string& path);
void WriteGroundTruth(const GroundTruth& gt, const std::string& path);

inline constexpr double kDefaultAssociationDistancePx = 30.0;

/// Greedy nearest-centre association. Pairs with a centre distance above
/// `max_center_dist_px` are never formed; equal distances go to the lower
/// (prediction, ground truth) index.
struct Association {
  std::vector<std::optional<std::size_t>> prediction_to_gt;
  std::size_t unassociated = 0;
};

Association AssociateToGroundTruth(const std::vector<Pixel>& predicted_centers,
                                   const std::vector<Pixel>& gt_centers,
                                   double max_center_dist_px = kDefaultAssociationDistancePx);

/// One measured stereo pair handed to the evaluator.
struct EvaluatedPair {
  int frame_id = 0;
  std::string pair_id;
  Pixel left_center;
  Pixel right_center;
  double length_mm = 0.0;
};

struct FishResidual {
  int frame_id = 0;
  std::string pair_id;
  int gt_id = 0;
  double measured_mm = 0.0;
  double truth_mm = 0.0;
  double residual_mm = 0.0;
};

struct EvaluationReport {
  double rmse_mm = 0.0;
  std::size_t n_measured = 0;
  std::size_t n_ground_truth = 0;
  std::size_t n_unmatched_predictions = 0;
  std::size_t n_bad_matches = 0;
  double bad_match_pct = 0.0;
  std::vector<FishResidual> residuals;
};

double Rmse(const std::vector<double>& residuals);

/// Scores measured pairs against ground truth. A pair is good when both of its
/// boxes associate with the same annotated fish; RMSE runs over good pairs.
/// Throws EmptyEvaluation when no pair is good.
EvaluationReport Evaluate(const std::vector<EvaluatedPair>& pairs, const GroundTruth& gt,
                          double max_center_dist_px = kDefaultAssociationDistancePx);

}  // namespace fishlen
