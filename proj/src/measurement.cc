#include "fishlen/measurement.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <tuple>

#include "canonical_json.h"
#include "fishlen/error.h"

namespace fishlen {

using nlohmann::json;

Triangulation TriangulateRays(const WaterRay& a, const WaterRay& b) {
  const Vec3& d1 = a.direction;
  const Vec3& d2 = b.direction;
  const double cross = d1.cross(d2).norm();
  if (cross < 1e-12) throw NearParallelRays();
  const Vec3 w0 = a.origin - b.origin;
  const double aa = d1.dot(d1), bb = d1.dot(d2), cc = d2.dot(d2);
  const double dd = d1.dot(w0), ee = d2.dot(w0);
  const double denom = aa * cc - bb * bb;
  const double s = (bb * ee - cc * dd) / denom;
  const double t = (aa * ee - bb * dd) / denom;
  const Vec3 p = a.origin + s * d1;
  const Vec3 q = b.origin + t * d2;
  return {0.5 * (p + q), (p - q).norm()};
}

Triangulation Triangulate(const FlatPortCamera& left, const FlatPortCamera& right,
                          Pixel left_px, Pixel right_px) {
  return TriangulateRays(TracePixelRay(left, left_px), TracePixelRay(right, right_px));
}

double AxisAngleDeg(const Vec3& body, const Vec3& axis) {
  if (body.norm() < 1e-6) throw DegenerateBody();
  const Vec3 a = axis.normalized();
  // atan2 form stays accurate near 0 and 90 degrees, unlike acos.
  const double rad = std::atan2(body.cross(a).norm(), std::abs(body.dot(a)));
  return rad * 180.0 / std::numbers::pi;
}

double FishMeasurement::MaxRayGap() const {
  return *std::max_element(ray_gap_mm.begin(), ray_gap_mm.end());
}

FishMeasurement MeasurePair(const MatchedPair& pair, const StereoRig& rig,
                            const std::string& pair_id) {
  FishMeasurement m;
  m.pair_id = pair_id;
  for (KeypointName k : kAllKeypoints) {
    const int i = static_cast<int>(k);
    const Triangulation t = Triangulate(rig.left, rig.right, pair.left.keypoint(k).position,
                                        pair.right.keypoint(k).position);
    m.keypoints_3d[i] = t.point;
    m.ray_gap_mm[i] = t.gap_mm;
  }
  const Vec3 body = m.keypoint(KeypointName::kCaudalFin) - m.keypoint(KeypointName::kMouth);
  m.length_mm = body.norm();
  m.axis_angle_deg = AxisAngleDeg(body, OpticalAxis(rig.left));
  return m;
}

const GroundTruthFrame* GroundTruth::Find(int frame_id) const {
  for (const GroundTruthFrame& f : frames)
    if (f.frame_id == frame_id) return &f;
  return nullptr;
}

std::size_t GroundTruth::FishCount() const {
  std::size_t n = 0;
  for (const GroundTruthFrame& f : frames) n += f.fish.size();
  return n;
}

namespace {

json BoxJson(const BoundingBox& b) {
  return {{"cx", b.center.u}, {"cy", b.center.v}, {"w", b.width}, {"h", b.height}};
}

BoundingBox BoxFromJson(const json& j) {
  return {{j.at("cx").get<double>(), j.at("cy").get<double>()}, j.at("w").get<double>(),
          j.at("h").get<double>()};
}

}  // namespace

std::string SerializeGroundTruth(const GroundTruth& gt) {
  json frames = json::array();
  for (const GroundTruthFrame& f : gt.frames) {
    json fish = json::array();
    for (const GroundTruthFish& g : f.fish) {
      json kps = json::object();
      for (KeypointName k : kAllKeypoints) {
        const Vec3& p = g.keypoints_3d[static_cast<int>(k)];
        kps[std::string(ToString(k))] = {p.x(), p.y(), p.z()};
      }
      fish.push_back({{"gt_id", g.gt_id},
                      {"left_id", g.left_id},
                      {"right_id", g.right_id},
                      {"left_bbox", BoxJson(g.left_box)},
                      {"right_bbox", BoxJson(g.right_box)},
                      {"length_mm", g.length_mm},
                      {"quality", std::string(ToString(g.quality))},
                      {"keypoints_3d", kps}});
    }
    frames.push_back({{"frame_id", f.frame_id}, {"fish", fish}});
  }
  json doc = {{"schema_version", 1}, {"frames", frames}};
  return internal::CanonicalDump(doc) + "\n";
}

GroundTruth ParseGroundTruth(const std::string& json_text) {
  GroundTruth gt;
  try {
    const json doc = json::parse(json_text);
    if (doc.value("schema_version", 0) != 1)
      throw ParseError(0, "schema_version", "unsupported ground-truth schema version");
    for (const json& f : doc.at("frames")) {
      GroundTruthFrame frame;
      frame.frame_id = f.at("frame_id").get<int>();
      for (const json& g : f.at("fish")) {
        GroundTruthFish fish;
        fish.gt_id = g.at("gt_id").get<int>();
        fish.left_id = g.at("left_id").get<std::string>();
        fish.right_id = g.at("right_id").get<std::string>();
        fish.left_box = BoxFromJson(g.at("left_bbox"));
        fish.right_box = BoxFromJson(g.at("right_bbox"));
        fish.length_mm = g.at("length_mm").get<double>();
        auto q = QualityFromString(g.at("quality").get<std::string>());
        if (!q) throw ParseError(0, "quality", "unknown quality class");
        fish.quality = *q;
        for (KeypointName k : kAllKeypoints) {
          const json& p = g.at("keypoints_3d").at(std::string(ToString(k)));
          fish.keypoints_3d[static_cast<int>(k)] =
              Vec3(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
        }
        frame.fish.push_back(std::move(fish));
      }
      gt.frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    throw ParseError(0, "", std::string("invalid ground truth: ") + e.what());
  }
  return gt;
}

GroundTruth ReadGroundTruth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground-truth file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseGroundTruth(ss.str());
}

void WriteGroundTruth(const GroundTruth& gt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << SerializeGroundTruth(gt);
}

Association AssociateToGroundTruth(const std::vector<Pixel>& predicted_centers,
                                   const std::vector<Pixel>& gt_centers,
                                   double max_center_dist_px) {
  struct Candidate {
    double dist;
    std::size_t pred, gt;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < predicted_centers.size(); ++i)
    for (std::size_t j = 0; j < gt_centers.size(); ++j) {
      const double d = Distance(predicted_centers[i], gt_centers[j]);
      if (d <= max_center_dist_px) candidates.push_back({d, i, j});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.dist, a.pred, a.gt) < std::tie(b.dist, b.pred, b.gt);
  });

  Association out;
  out.prediction_to_gt.assign(predicted_centers.size(), std::nullopt);
  std::vector<bool> gt_used(gt_centers.size(), false);
  for (const Candidate& c : candidates) {
    if (out.prediction_to_gt[c.pred] || gt_used[c.gt]) continue;
    out.prediction_to_gt[c.pred] = c.gt;
    gt_used[c.gt] = true;
  }
  out.unassociated = static_cast<std::size_t>(
      std::count(out.prediction_to_gt.begin(), out.prediction_to_gt.end(), std::nullopt));
  return out;
}

double Rmse(const std::vector<double>& residuals) {
  if (residuals.empty()) return 0.0;
  double sum = 0.0;
  for (double r : residuals) sum += r * r;
  return std::sqrt(sum / static_cast<double>(residuals.size()));
}

EvaluationReport Evaluate(const std::vector<EvaluatedPair>& pairs, const GroundTruth& gt,
                          double max_center_dist_px) {
  EvaluationReport report;
  report.n_measured = pairs.size();
  report.n_ground_truth = gt.FishCount();

  // Group pair indices by frame, preserving input order.
  std::vector<int> frame_ids;
  for (const EvaluatedPair& p : pairs)
    if (std::find(frame_ids.begin(), frame_ids.end(), p.frame_id) == frame_ids.end())
      frame_ids.push_back(p.frame_id);

  std::vector<double> residuals;
  for (int frame_id : frame_ids) {
    std::vector<std::size_t> idx;
    std::vector<Pixel> left_pred, right_pred;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].frame_id != frame_id) continue;
      idx.push_back(i);
      left_pred.push_back(pairs[i].left_center);
      right_pred.push_back(pairs[i].right_center);
    }
    const GroundTruthFrame* frame = gt.Find(frame_id);
    std::vector<Pixel> left_gt, right_gt;
    if (frame) {
      for (const GroundTruthFish& g : frame->fish) {
        left_gt.push_back(g.left_box.center);
        right_gt.push_back(g.right_box.center);
      }
    }
    const Association la = AssociateToGroundTruth(left_pred, left_gt, max_center_dist_px);
    const Association ra = AssociateToGroundTruth(right_pred, right_gt, max_center_dist_px);
    report.n_unmatched_predictions += la.unassociated + ra.unassociated;

    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto& l = la.prediction_to_gt[k];
      const auto& r = ra.prediction_to_gt[k];
      if (!l || !r || *l != *r) {
        ++report.n_bad_matches;
        continue;
      }
      const EvaluatedPair& p = pairs[idx[k]];
      const GroundTruthFish& g = frame->fish[*l];
      const double res = p.length_mm - g.length_mm;
      residuals.push_back(res);
      report.residuals.push_back({p.frame_id, p.pair_id, g.gt_id, p.length_mm, g.length_mm, res});
    }
  }
  if (residuals.empty()) throw EmptyEvaluation();
  report.rmse_mm = Rmse(residuals);
  report.bad_match_pct = 100.0 * static_cast<double>(report.n_bad_matches) /
                         static_cast<double>(report.n_measured);
  return report;
}

}  // namespace fishlen
