#include "fishlen/pipeline.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <thread>

#include "canonical_json.h"
#include "fishlen/error.h"

namespace fishlen {

using nlohmann::json;

DepthRange PipelineConfig::ResolvedDepthRange(const StereoRig& rig) const {
  DepthRange r = depth_range;
  if (r.z_max <= 0.0) r.z_max = rig.tank_depth_mm;
  return r;
}

void PipelineConfig::Validate() const {
  if (!(matching.gate_px > 0.0)) throw ConfigError("gate_px must be positive");
  if (!(depth_range.z_min > 0.0)) throw ConfigError("depth range minimum must be positive");
  if (curve_segments < 1) throw ConfigError("curve segments must be >= 1");
  if (!(max_ray_gap_mm > 0.0)) throw ConfigError("max_ray_gap_mm must be positive");
  if (!(association_distance_px >= 0.0)) throw ConfigError("association distance must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  refinement.Validate();
  filters.Validate();
}

PipelineConfig WithToggles(PipelineConfig cfg, Toggles t) {
  cfg.filters.quality_enabled = t.quality;
  cfg.refine_enabled = t.template_refine;
  cfg.filters.aspect_enabled = t.direction;
  cfg.filters.direction_enabled = t.direction;
  return cfg;
}

std::vector<EvaluatedPair> PipelineResult::Retained() const {
  std::vector<EvaluatedPair> out;
  for (const PairResult& r : pairs) {
    if (!r.retained()) continue;
    out.push_back({r.frame_id, r.pair_id, r.pair.left.bbox.center, r.pair.right.bbox.center,
                   r.measurement->length_mm});
  }
  return out;
}

namespace {

struct FrameOutput {
  std::vector<PairResult> pairs;
  std::vector<std::string> trace;
  std::size_t gap_rejected = 0;
};

FrameOutput ProcessFrame(const StereoRig& rig, const FrameInput& in, const PipelineConfig& cfg,
                         const CurveProvider& curves, bool tracing) {
  FrameOutput out;
  std::vector<MatchedPair> matched = GreedyAssign(in.left, in.right, curves, cfg.matching);

  if (tracing) {
    auto unmatched = [&](const DetectionFrame& f, bool left) {
      for (const FishDetection& d : f.detections) {
        bool found = false;
        for (const MatchedPair& p : matched) found |= (left ? p.left.id : p.right.id) == d.id;
        if (!found)
          out.trace.push_back(internal::CanonicalDump(
              {{"frame_id", f.frame_id}, {"camera", std::string(ToString(f.camera))},
               {"detection_id", d.id}, {"rejected_by", "unmatched"}}));
      }
    };
    unmatched(in.left, true);
    unmatched(in.right, false);
  }

  for (std::size_t k = 0; k < matched.size(); ++k) {
    PairResult r;
    r.frame_id = in.left.frame_id;
    r.pair_id = std::to_string(in.left.frame_id) + "-" + std::to_string(k);
    r.pair = std::move(matched[k]);
    if (cfg.refine_enabled && in.left_image && in.right_image)
      RefinePair(r.pair, *in.left_image, *in.right_image, curves, cfg.refinement);

    try {
      r.measurement = MeasurePair(r.pair, rig, r.pair_id);
    } catch (const Error&) {
      r.measurement.reset();
    }

    if (FilterVerdict v = FilterQuality(r.pair, cfg.filters); !v.kept) {
      r.rejected_by = ToString(*v.rejected_by);
    } else if (v = FilterAspect(r.pair, cfg.filters); !v.kept) {
      r.rejected_by = ToString(*v.rejected_by);
    } else if (!r.measurement) {
      r.rejected_by = "degenerate";
    } else if (v = FilterDirection(*r.measurement, rig.left, cfg.filters); !v.kept) {
      r.rejected_by = ToString(*v.rejected_by);
    } else if (r.measurement->MaxRayGap() > cfg.max_ray_gap_mm) {
      r.rejected_by = "ray_gap";
      ++out.gap_rejected;
    }

    if (tracing && !r.retained())
      out.trace.push_back(internal::CanonicalDump(
          {{"frame_id", r.frame_id}, {"pair_id", r.pair_id}, {"left_id", r.pair.left.id},
           {"right_id", r.pair.right.id}, {"rejected_by", r.rejected_by}}));
    out.pairs.push_back(std::move(r));
  }
  return out;
}

}  // namespace

PipelineResult RunPipeline(const StereoRig& rig, const std::vector<FrameInput>& frames,
                           const PipelineConfig& cfg, const TraceSink& trace) {
  cfg.Validate();
  const CurveProvider curves =
      MakeCurveProvider(rig.left, rig.right, cfg.ResolvedDepthRange(rig), cfg.curve_segments);

  std::vector<FrameOutput> outputs(frames.size());
  std::vector<std::exception_ptr> errors(frames.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < frames.size(); i = next++) {
      try {
        outputs[i] = ProcessFrame(rig, frames[i], cfg, curves, static_cast<bool>(trace));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::min<int>(cfg.threads, std::max<std::size_t>(frames.size(), 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  PipelineResult result;
  for (FrameOutput& o : outputs) {
    if (trace)
      for (const std::string& line : o.trace) trace(line);
    result.n_gap_rejected += o.gap_rejected;
    for (PairResult& p : o.pairs) result.pairs.push_back(std::move(p));
  }
  return result;
}

std::vector<FrameInput> PairFrames(const std::vector<DetectionFrame>& frames, bool load_images,
                                   const std::string& image_root) {
  std::map<int, FrameInput> by_id;
  std::map<int, int> seen;  // bit 1 = left, bit 2 = right
  for (const DetectionFrame& f : frames) {
    const int bit = f.camera == CameraSide::kLeft ? 1 : 2;
    if (seen[f.frame_id] & bit)
      throw ValidationError("frame " + std::to_string(f.frame_id),
                            "duplicate " + std::string(ToString(f.camera)) + " frame");
    seen[f.frame_id] |= bit;
    FrameInput& in = by_id[f.frame_id];
    (f.camera == CameraSide::kLeft ? in.left : in.right) = f;
  }
  std::vector<FrameInput> out;
  for (auto& [id, in] : by_id) {
    if (seen[id] != 3)
      throw ValidationError("frame " + std::to_string(id), "needs both a left and a right frame");
    if (load_images && in.left.image_path && in.right.image_path) {
      auto load = [&](const std::string& path) {
        std::filesystem::path p(path);
        if (p.is_relative()) p = std::filesystem::path(image_root) / p;
        return std::make_shared<const GrayImage>(LoadImage(p.string()));
      };
      in.left_image = load(*in.left.image_path);
      in.right_image = load(*in.right.image_path);
    }
    out.push_back(std::move(in));
  }
  return out;
}

std::vector<FrameInput> FramesFromSuite(const SceneSuite& suite) {
  std::vector<FrameInput> out;
  for (const SyntheticScene& s : suite.scenes) {
    FrameInput in{s.left, s.right, nullptr, nullptr};
    if (s.left_image) in.left_image = std::make_shared<const GrayImage>(*s.left_image);
    if (s.right_image) in.right_image = std::make_shared<const GrayImage>(*s.right_image);
    out.push_back(std::move(in));
  }
  return out;
}

GroundTruth GroundTruthFromSuite(const SceneSuite& suite) {
  GroundTruth gt;
  for (const SyntheticScene& s : suite.scenes) gt.frames.push_back(s.truth);
  return gt;
}

namespace {

std::string Fixed(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string ResultsCsv(const PipelineResult& result) {
  std::string out = "frame_id,pair_id,left_id,right_id,cost_total,length_mm,axis_angle_deg";
  for (KeypointName k : kAllKeypoints) out += ",gap_" + std::string(ToString(k)) + "_mm";
  out += ",refined_keypoints,verdict\n";
  for (const PairResult& r : result.pairs) {
    out += std::to_string(r.frame_id) + "," + r.pair_id + "," + r.pair.left.id + "," +
           r.pair.right.id + "," + Fixed(r.pair.cost.total);
    if (r.measurement) {
      out += "," + Fixed(r.measurement->length_mm) + "," + Fixed(r.measurement->axis_angle_deg);
      for (double g : r.measurement->ray_gap_mm) out += "," + Fixed(g);
    } else {
      out += ",,";
      for (int i = 0; i < kNumKeypoints; ++i) out += ",";
    }
    int refined = 0;
    for (bool b : r.pair.refined) refined += b;
    out += "," + std::to_string(refined) + "," + (r.retained() ? "kept" : r.rejected_by) + "\n";
  }
  return out;
}

std::string EvaluationJson(const EvaluationReport& report, const PipelineResult& result) {
  json residuals = json::array();
  for (const FishResidual& r : report.residuals)
    residuals.push_back({{"frame_id", r.frame_id}, {"pair_id", r.pair_id}, {"gt_id", r.gt_id},
                         {"measured_mm", r.measured_mm}, {"truth_mm", r.truth_mm},
                         {"residual_mm", r.residual_mm}});
  json doc = {{"rmse_mm", report.rmse_mm},
              {"n_measured", report.n_measured},
              {"n_ground_truth", report.n_ground_truth},
              {"n_unmatched_predictions", report.n_unmatched_predictions},
              {"n_bad_matches", report.n_bad_matches},
              {"bad_match_pct", report.bad_match_pct},
              {"n_pairs", result.pairs.size()},
              {"n_gap_rejected", result.n_gap_rejected},
              {"residuals", residuals}};
  return internal::CanonicalDumpPretty(doc);
}

std::vector<AblationRow> RunAblation(const StereoRig& rig, const std::vector<FrameInput>& frames,
                                     const GroundTruth& gt, const PipelineConfig& base) {
  std::vector<AblationRow> rows;
  bool any = false;
  for (int di = 0; di < 2; ++di) {
    for (int te = 0; te < 2; ++te) {
      for (int qu = 0; qu < 2; ++qu) {
        AblationRow row;
        row.toggles = {qu == 1, te == 1, di == 1};
        const PipelineResult result = RunPipeline(rig, frames, WithToggles(base, row.toggles));
        row.n_pairs = result.pairs.size();
        try {
          row.report = Evaluate(result.Retained(), gt, base.association_distance_px);
          any = true;
        } catch (const EmptyEvaluation&) {
        }
        rows.push_back(std::move(row));
      }
    }
  }
  if (!any) throw EmptyEvaluation();
  return rows;
}

std::string AblationCsv(const std::vector<AblationRow>& rows) {
  std::string out = "qu,te,di,n_pairs,n_measured,n_bad_matches,bad_match_pct,rmse_mm,n_unmatched_predictions\n";
  for (const AblationRow& r : rows) {
    out += std::string(r.toggles.quality ? "1" : "0") + "," + (r.toggles.template_refine ? "1" : "0") +
           "," + (r.toggles.direction ? "1" : "0") + "," + std::to_string(r.n_pairs);
    if (r.report) {
      out += "," + std::to_string(r.report->n_measured) + "," + std::to_string(r.report->n_bad_matches) +
             "," + Fixed(r.report->bad_match_pct) + "," + Fixed(r.report->rmse_mm) + "," +
             std::to_string(r.report->n_unmatched_predictions);
    } else {
      out += ",0,0,NA,NA,0";
    }
    out += "\n";
  }
  return out;
}

}  // namespace fishlen
