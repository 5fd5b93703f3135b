#pragma once

/// @file
/// Batch length-measurement pipeline: match -> refine -> filter ->
/// triangulate -> evaluate, plus the 2^3 ablation over the quality filter
/// (Qu), template refinement (Te) and direction filters (Di).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fishlen/calibration.h"
#include "fishlen/detection.h"
#include "fishlen/epipolar.h"
#include "fishlen/filtering.h"
#include "fishlen/image.h"
#include "fishlen/matching.h"
#include "fishlen/measurement.h"
#include "fishlen/refinement.h"
#include "fishlen/synthetic.h"

namespace fishlen {

struct PipelineConfig {
  MatchingConfig matching;
  /// z_max <= 0 means "use the rig's tank depth".
  DepthRange depth_range{5.0, 0.0};
  int curve_segments = kDefaultCurveSegments;
  bool refine_enabled = true;  ///< Te; frames without images pass through unrefined
  RefinementConfig refinement;
  FilterConfig filters;        ///< Qu = quality, Di = aspect + direction
  double max_ray_gap_mm = 5.0;
  double association_distance_px = kDefaultAssociationDistancePx;
  int threads = 1;

  DepthRange ResolvedDepthRange(const StereoRig& rig) const;
  void Validate() const;
};

/// Ablation switches.
struct Toggles {
  bool quality = true;
  bool template_refine = true;
  bool direction = true;
};

PipelineConfig WithToggles(PipelineConfig cfg, Toggles t);

/// One synchronized stereo frame.
struct FrameInput {
  DetectionFrame left;
  DetectionFrame right;
  std::shared_ptr<const GrayImage> left_image;
  std::shared_ptr<const GrayImage> right_image;
};

struct PairResult {
  int frame_id = 0;
  std::string pair_id;
  MatchedPair pair;
  std::optional<FishMeasurement> measurement;
  /// Empty when retained; otherwise quality, aspect, direction, degenerate or ray_gap.
  std::string rejected_by;

  bool retained() const { return rejected_by.empty(); }
};

struct PipelineResult {
  std::vector<PairResult> pairs;  ///< frame order, then cost order
  std::size_t n_gap_rejected = 0;

  std::vector<EvaluatedPair> Retained() const;
};

/// Receives one JSON object per dropped detection or pair, in frame order.
using TraceSink = std::function<void(const std::string&)>;

PipelineResult RunPipeline(const StereoRig& rig, const std::vector<FrameInput>& frames,
                           const PipelineConfig& cfg, const TraceSink& trace = {});

/// Pairs left and right frames by frame id. When `load_images` is set, images
/// of frames that name both are loaded, resolving relative paths against
/// `image_root`.
std::vector<FrameInput> PairFrames(const std::vector<DetectionFrame>& frames, bool load_images,
                                   const std::string& image_root);

std::vector<FrameInput> FramesFromSuite(const SceneSuite& suite);
GroundTruth GroundTruthFromSuite(const SceneSuite& suite);

std::string ResultsCsv(const PipelineResult& result);
std::string EvaluationJson(const EvaluationReport& report, const PipelineResult& result);

struct AblationRow {
  Toggles toggles;
  std::size_t n_pairs = 0;
  std::optional<EvaluationReport> report;  ///< empty when nothing was retained
};

/// Runs the eight toggle combinations in table order (Qu fastest). Throws
/// EmptyEvaluation when no combination yields an evaluation.
std::vector<AblationRow> RunAblation(const StereoRig& rig, const std::vector<FrameInput>& frames,
                                     const GroundTruth& gt, const PipelineConfig& base);

std::string AblationCsv(const std::vector<AblationRow>& rows);

}  // namespace fishlen
