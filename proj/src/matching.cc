#include "fishlen/matching.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace fishlen {

double CostEpipolar(const FishDetection& /*left*/, const FishDetection& right,
                    const EpipolarCurve& left_center_curve, double gate_px) {
  if (!(gate_px > 0.0)) throw std::invalid_argument("epipolar gate must be positive");
  const double d = ClosestPointOnCurve(left_center_curve, right.bbox.center).distance;
  return d < gate_px ? d / gate_px : kInfinity;
}

double CostEpipolar(const FishDetection& left, const FishDetection& right,
                    const CurveProvider& curves, double gate_px) {
  return CostEpipolar(left, right, curves(left.bbox.center), gate_px);
}

double CostSize(const FishDetection& a, const FishDetection& b) {
  const double dw = std::abs(a.bbox.width - b.bbox.width) / (0.5 * (a.bbox.width + b.bbox.width));
  const double dh =
      std::abs(a.bbox.height - b.bbox.height) / (0.5 * (a.bbox.height + b.bbox.height));
  return 0.5 * (dw + dh);
}

namespace {

Pixel KeypointMean(const FishDetection& d) {
  Pixel sum;
  for (const Keypoint& k : d.keypoints) sum = sum + k.position;
  return (1.0 / kNumKeypoints) * sum;
}

}  // namespace

double CostKeypoints(const FishDetection& a, const FishDetection& b) {
  const Pixel mean_a = KeypointMean(a);
  const Pixel mean_b = KeypointMean(b);
  double sum = 0.0;
  for (int k = 0; k < kNumKeypoints; ++k) {
    const Pixel ca = a.keypoints[k].position - mean_a;
    const Pixel cb = b.keypoints[k].position - mean_b;
    sum += std::hypot(ca.u - cb.u, ca.v - cb.v);
  }
  // Grouped per box so the value is exactly symmetric in (a, b).
  return sum / (0.5 * ((a.bbox.width + a.bbox.height) + (b.bbox.width + b.bbox.height)));
}

MatchCost TotalCost(const FishDetection& left, const FishDetection& right,
                    const EpipolarCurve& left_center_curve, double gate_px) {
  MatchCost c;
  c.epipolar = CostEpipolar(left, right, left_center_curve, gate_px);
  c.size = CostSize(left, right);
  c.keypoints = CostKeypoints(left, right);
  c.total = std::isinf(c.epipolar) ? kInfinity : (c.epipolar + c.size + c.keypoints) / 3.0;
  return c;
}

MatchCost TotalCost(const FishDetection& left, const FishDetection& right,
                    const CurveProvider& curves, double gate_px) {
  return TotalCost(left, right, curves(left.bbox.center), gate_px);
}

std::vector<std::pair<std::size_t, std::size_t>> GreedyAssignIndices(
    const std::vector<std::vector<double>>& costs, const std::vector<std::string>& left_ids,
    const std::vector<std::string>& right_ids, double max_total_cost) {
  struct Candidate {
    double cost;
    std::size_t row, col;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < costs.size(); ++i)
    for (std::size_t j = 0; j < costs[i].size(); ++j)
      if (std::isfinite(costs[i][j]) && costs[i][j] <= max_total_cost)
        candidates.push_back({costs[i][j], i, j});

  // Sorting once and sweeping equals repeatedly extracting the global minimum.
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    return std::tie(a.cost, left_ids[a.row], right_ids[a.col]) <
           std::tie(b.cost, left_ids[b.row], right_ids[b.col]);
  });

  std::vector<bool> row_used(costs.size(), false);
  std::vector<bool> col_used(right_ids.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Candidate& c : candidates) {
    if (row_used[c.row] || col_used[c.col]) continue;
    row_used[c.row] = col_used[c.col] = true;
    out.emplace_back(c.row, c.col);
  }
  return out;
}

std::vector<MatchedPair> GreedyAssign(const DetectionFrame& left_frame,
                                      const DetectionFrame& right_frame,
                                      const CurveProvider& curves, const MatchingConfig& cfg) {
  const auto& L = left_frame.detections;
  const auto& R = right_frame.detections;
  std::vector<std::vector<MatchCost>> breakdown(L.size(), std::vector<MatchCost>(R.size()));
  std::vector<std::vector<double>> totals(L.size(), std::vector<double>(R.size(), kInfinity));
  for (std::size_t i = 0; i < L.size(); ++i) {
    const EpipolarCurve curve = curves(L[i].bbox.center);
    for (std::size_t j = 0; j < R.size(); ++j) {
      breakdown[i][j] = TotalCost(L[i], R[j], curve, cfg.gate_px);
      totals[i][j] = breakdown[i][j].total;
    }
  }
  std::vector<std::string> left_ids, right_ids;
  for (const auto& d : L) left_ids.push_back(d.id);
  for (const auto& d : R) right_ids.push_back(d.id);

  std::vector<MatchedPair> pairs;
  for (auto [i, j] : GreedyAssignIndices(totals, left_ids, right_ids, cfg.max_total_cost))
    pairs.push_back({L[i], R[j], breakdown[i][j], {}});
  return pairs;
}

}  // namespace fishlen
