#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "fishlen/detection.h"
#include "fishlen/epipolar.h"

namespace fishlen {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Three-term cost of pairing a left detection with a right detection.
struct MatchCost {
  double epipolar = 0.0;   ///< may be +inf (outside the gate)
  double size = 0.0;
  double keypoints = 0.0;
  double total = 0.0;      ///< mean of the three; +inf iff epipolar is
};

struct MatchedPair {
  FishDetection left;
  FishDetection right;  ///< keypoints replaced by refined positions when refined
  MatchCost cost;
  std::array<bool, kNumKeypoints> refined{};
};

struct MatchingConfig {
  /// Gate and normalizer of the epipolar term; tuned for ~2.4k px sensors.
  double gate_px = 150.0;
  /// Optional ceiling on the total cost.
  double max_total_cost = kInfinity;
};

/// Distance from the right box centre to the epipolar curve of the left box
/// centre, divided by the gate; +inf when the distance reaches the gate.
double CostEpipolar(const FishDetection& left, const FishDetection& right,
                    const EpipolarCurve& left_center_curve, double gate_px);
double CostEpipolar(const FishDetection& left, const FishDetection& right,
                    const CurveProvider& curves, double gate_px);

/// Relative width and height difference of the two boxes.
double CostSize(const FishDetection& a, const FishDetection& b);

/// Summed distance between mean-centred keypoint patterns, normalized by the
/// mean box half-perimeter.
double CostKeypoints(const FishDetection& a, const FishDetection& b);

MatchCost TotalCost(const FishDetection& left, const FishDetection& right,
                    const EpipolarCurve& left_center_curve, double gate_px);
MatchCost TotalCost(const FishDetection& left, const FishDetection& right,
                    const CurveProvider& curves, double gate_px);

/// Greedy assignment on a dense cost matrix (rows = left). Repeatedly takes the
/// smallest finite cost among unmatched rows and columns; equal costs are
/// resolved by (left id, right id). Returns (row, column) in selection order.
std::vector<std::pair<std::size_t, std::size_t>> GreedyAssignIndices(
    const std::vector<std::vector<double>>& costs, const std::vector<std::string>& left_ids,
    const std::vector<std::string>& right_ids, double max_total_cost = kInfinity);

/// Matches the detections of one stereo frame pair, cheapest first.
std::vector<MatchedPair> GreedyAssign(const DetectionFrame& left_frame,
                                      const DetectionFrame& right_frame,
                                      const CurveProvider& curves, const MatchingConfig& cfg);

}  // namespace fishlen
