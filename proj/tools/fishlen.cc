// Batch front end: measure, simulate, epipolar, ablate.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "fishlen/calibration.h"
#include "fishlen/detection.h"
#include "fishlen/epipolar.h"
#include "fishlen/error.h"
#include "fishlen/pipeline.h"
#include "fishlen/synthetic.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitEmpty = 4;

struct MeasureArgs {
  std::string config_path;
  std::string calib;
  std::string detections;
  std::string ground_truth;
  std::string images;
  std::string out_csv;
  std::string out_eval;
  std::string trace;
  bool no_quality = false;
  bool no_direction = false;
  bool no_refine = false;
  bool undistort = false;
  std::optional<double> gate_px, max_cost, zmin, zmax, max_gap;
  std::optional<int> segments, threads;
};

void RequireFile(const std::string& path, const std::string& what) {
  if (path.empty()) throw fishlen::ConfigError(what + " is required");
  if (!fs::is_regular_file(path)) throw fishlen::ConfigError(what + " '" + path + "' does not exist");
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fishlen::IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fishlen::IoError("cannot write '" + path + "'");
  out << text;
}

// Applies a JSON config file on top of `args` and `cfg`. Flags are applied
// afterwards, so they win.
void ApplyConfigFile(const std::string& path, MeasureArgs& args, fishlen::PipelineConfig& cfg,
                     fishlen::Toggles& toggles) {
  RequireFile(path, "config file");
  json j;
  try {
    j = json::parse(ReadText(path));
    auto str = [&](const char* key, std::string& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::string>();
    };
    str("calibration", args.calib);
    str("detections", args.detections);
    str("ground_truth", args.ground_truth);
    str("images", args.images);
    str("out_csv", args.out_csv);
    str("out_eval", args.out_eval);
    cfg.matching.gate_px = j.value("gate_px", cfg.matching.gate_px);
    cfg.matching.max_total_cost = j.value("max_total_cost", cfg.matching.max_total_cost);
    cfg.curve_segments = j.value("segments", cfg.curve_segments);
    cfg.depth_range.z_min = j.value("z_min_mm", cfg.depth_range.z_min);
    cfg.depth_range.z_max = j.value("z_max_mm", cfg.depth_range.z_max);
    cfg.max_ray_gap_mm = j.value("max_ray_gap_mm", cfg.max_ray_gap_mm);
    cfg.association_distance_px = j.value("association_distance_px", cfg.association_distance_px);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("refinement")) {
      const json& r = j.at("refinement");
      cfg.refinement.template_half = r.value("template_half", cfg.refinement.template_half);
      cfg.refinement.search_half = r.value("search_half", cfg.refinement.search_half);
      cfg.refinement.epipolar_gate = r.value("epipolar_gate_px", cfg.refinement.epipolar_gate);
      cfg.refinement.min_ncc = r.value("min_ncc", cfg.refinement.min_ncc);
      if (r.contains("keypoints")) {
        cfg.refinement.keypoints.fill(false);
        for (const json& k : r.at("keypoints")) {
          auto name = fishlen::KeypointFromString(k.get<std::string>());
          if (!name) throw fishlen::ConfigError("unknown keypoint '" + k.get<std::string>() + "'");
          cfg.refinement.keypoints[static_cast<int>(*name)] = true;
        }
      }
    }
    if (j.contains("filters")) {
      const json& f = j.at("filters");
      cfg.filters.min_aspect = f.value("min_aspect", cfg.filters.min_aspect);
      cfg.filters.min_axis_angle_deg = f.value("min_axis_angle_deg", cfg.filters.min_axis_angle_deg);
      if (f.contains("require_quality")) {
        auto q = fishlen::QualityFromString(f.at("require_quality").get<std::string>());
        if (!q) throw fishlen::ConfigError("unknown quality class in config");
        cfg.filters.require_quality = *q;
      }
    }
    if (j.contains("toggles")) {
      const json& t = j.at("toggles");
      toggles.quality = t.value("quality", toggles.quality);
      toggles.template_refine = t.value("template_refine", toggles.template_refine);
      toggles.direction = t.value("direction", toggles.direction);
    }
  } catch (const json::exception& e) {
    throw fishlen::ConfigError("config file '" + path + "': " + e.what());
  }
}

void UndistortFrames(std::vector<fishlen::DetectionFrame>& frames, const fishlen::StereoRig& rig) {
  for (fishlen::DetectionFrame& f : frames) {
    const fishlen::PinholeIntrinsics& k = (f.camera == fishlen::CameraSide::kLeft ? rig.left : rig.right).intrinsics();
    for (fishlen::FishDetection& d : f.detections) {
      d.bbox.center = fishlen::UndistortPixel(k, d.bbox.center);
      for (fishlen::Keypoint& kp : d.keypoints) kp.position = fishlen::UndistortPixel(k, kp.position);
    }
  }
}

int RunMeasure(MeasureArgs args) {
  fishlen::PipelineConfig cfg;
  fishlen::Toggles toggles;
  if (!args.config_path.empty()) {
    MeasureArgs from_file;
    ApplyConfigFile(args.config_path, from_file, cfg, toggles);
    auto fill = [](std::string& dst, const std::string& src) {
      if (dst.empty()) dst = src;
    };
    fill(args.calib, from_file.calib);
    fill(args.detections, from_file.detections);
    fill(args.ground_truth, from_file.ground_truth);
    fill(args.images, from_file.images);
    fill(args.out_csv, from_file.out_csv);
    fill(args.out_eval, from_file.out_eval);
  }
  if (args.no_quality) toggles.quality = false;
  if (args.no_direction) toggles.direction = false;
  if (args.no_refine) toggles.template_refine = false;
  if (args.gate_px) cfg.matching.gate_px = *args.gate_px;
  if (args.max_cost) cfg.matching.max_total_cost = *args.max_cost;
  if (args.segments) cfg.curve_segments = *args.segments;
  if (args.zmin) cfg.depth_range.z_min = *args.zmin;
  if (args.zmax) cfg.depth_range.z_max = *args.zmax;
  if (args.max_gap) cfg.max_ray_gap_mm = *args.max_gap;
  if (args.threads) cfg.threads = *args.threads;
  cfg = fishlen::WithToggles(cfg, toggles);

  RequireFile(args.calib, "calibration file");
  RequireFile(args.detections, "detection file");
  if (!args.ground_truth.empty()) RequireFile(args.ground_truth, "ground-truth file");
  cfg.Validate();

  const fishlen::StereoRig rig = fishlen::LoadRig(args.calib);
  std::vector<fishlen::DetectionFrame> dets = fishlen::ReadDetectionFile(args.detections);
  if (args.undistort) UndistortFrames(dets, rig);
  const std::string image_root =
      args.images.empty() ? fs::path(args.detections).parent_path().string() : args.images;
  const std::vector<fishlen::FrameInput> frames =
      fishlen::PairFrames(dets, cfg.refine_enabled, image_root);

  std::ofstream trace_out;
  fishlen::TraceSink trace;
  if (!args.trace.empty()) {
    trace_out.open(args.trace, std::ios::binary);
    if (!trace_out) throw fishlen::IoError("cannot write '" + args.trace + "'");
    trace = [&](const std::string& line) { trace_out << line << "\n"; };
  }
  const fishlen::PipelineResult result = fishlen::RunPipeline(rig, frames, cfg, trace);
  if (!args.out_csv.empty()) WriteText(args.out_csv, fishlen::ResultsCsv(result));

  if (!args.ground_truth.empty()) {
    const fishlen::GroundTruth gt = fishlen::ReadGroundTruth(args.ground_truth);
    const fishlen::EvaluationReport report =
        fishlen::Evaluate(result.Retained(), gt, cfg.association_distance_px);
    const std::string text = fishlen::EvaluationJson(report, result);
    WriteText(args.out_eval.empty() ? "-" : args.out_eval, text);
  } else if (args.out_csv.empty()) {
    std::cout << fishlen::ResultsCsv(result);
  }
  return kExitOk;
}

fishlen::Pixel ParsePixel(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw fishlen::ConfigError("--pixel expects u,v");
  try {
    std::size_t a = 0, b = 0;
    const double u = std::stod(s.substr(0, comma), &a);
    const double v = std::stod(s.substr(comma + 1), &b);
    if (a != comma || b != s.size() - comma - 1) throw std::invalid_argument(s);
    return {u, v};
  } catch (const std::logic_error&) {
    throw fishlen::ConfigError("--pixel expects u,v, got '" + s + "'");
  }
}

std::string Fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refractive stereo fish length measurement"};
  app.require_subcommand(1);

  MeasureArgs m;
  CLI::App* measure = app.add_subcommand("measure", "Match, filter and triangulate detections");
  measure->add_option("--config", m.config_path, "JSON config file (flags override it)");
  measure->add_option("--calib", m.calib, "Calibration JSON");
  measure->add_option("--detections", m.detections, "Detection JSON-lines file");
  measure->add_option("--ground-truth", m.ground_truth, "Ground-truth JSON; enables evaluation");
  measure->add_option("--images", m.images, "Root for relative image paths");
  measure->add_option("--out-csv", m.out_csv, "Per-pair results CSV");
  measure->add_option("--out-eval", m.out_eval, "Evaluation JSON (default stdout)");
  measure->add_option("--trace", m.trace, "JSON-lines log of dropped detections and pairs");
  measure->add_flag("--no-quality-filter", m.no_quality, "Disable Qu");
  measure->add_flag("--no-direction-filter", m.no_direction, "Disable Di (aspect and direction)");
  measure->add_flag("--no-template-refine", m.no_refine, "Disable Te");
  measure->add_flag("--undistort-input", m.undistort, "Undistort detection pixels on ingest");
  measure->add_option("--gate-px", m.gate_px, "Epipolar gate in pixels");
  measure->add_option("--max-cost", m.max_cost, "Reject assignments above this total cost");
  measure->add_option("--segments", m.segments, "Epipolar curve segments");
  measure->add_option("--zmin", m.zmin, "Nearest water depth, mm");
  measure->add_option("--zmax", m.zmax, "Farthest water depth, mm");
  measure->add_option("--max-gap", m.max_gap, "Maximum ray gap, mm");
  measure->add_option("--threads", m.threads, "Worker threads");

  std::string sim_profile = "clean", sim_out;
  std::optional<bool> sim_images;
  CLI::App* simulate = app.add_subcommand("simulate", "Write a synthetic benchmark to disk");
  simulate->add_option("--profile", sim_profile, "clean, noisy or crowded");
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_flag("--images,!--no-images", sim_images,
                     "Render PGM images (default: noisy and crowded only)");

  std::string epi_calib, epi_pixel, epi_source = "left";
  std::optional<double> epi_zmin, epi_zmax;
  int epi_segments = fishlen::kDefaultCurveSegments;
  bool epi_dense = false;
  CLI::App* epipolar = app.add_subcommand("epipolar", "Print an epipolar curve as CSV");
  epipolar->add_option("--calib", epi_calib, "Calibration JSON");
  epipolar->add_option("--pixel", epi_pixel, "Source pixel u,v")->required();
  epipolar->add_option("--source", epi_source, "Camera of the source pixel")
      ->check(CLI::IsMember({"left", "right"}));
  epipolar->add_option("--zmin", epi_zmin, "Nearest water depth, mm");
  epipolar->add_option("--zmax", epi_zmax, "Farthest water depth, mm");
  epipolar->add_option("--segments", epi_segments, "Number of segments");
  epipolar->add_flag("--dense", epi_dense, "Use 128 segments");

  std::string abl_profile, abl_dataset, abl_config;
  int abl_threads = 1;
  CLI::App* ablate = app.add_subcommand("ablate", "Run all eight Qu/Te/Di combinations");
  auto* abl_profile_opt = ablate->add_option("--profile", abl_profile, "Synthetic profile");
  auto* abl_dataset_opt =
      ablate->add_option("--dataset", abl_dataset, "Directory written by `simulate`");
  abl_profile_opt->excludes(abl_dataset_opt);
  ablate->add_option("--config", abl_config, "JSON config file");
  ablate->add_option("--threads", abl_threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*measure) return RunMeasure(m);

    if (*simulate) {
      const fishlen::BenchmarkProfile profile = fishlen::GetBenchmarkProfile(sim_profile);
      const fishlen::SceneSuite suite =
          fishlen::StandardBenchmark(profile, sim_images.value_or(profile.images));
      fishlen::WriteSceneSuite(suite, sim_out);
      return kExitOk;
    }

    if (*epipolar) {
      RequireFile(epi_calib, "calibration file");
      const fishlen::StereoRig rig = fishlen::LoadRig(epi_calib);
      const bool from_left = epi_source == "left";
      const fishlen::FlatPortCamera& src = from_left ? rig.left : rig.right;
      const fishlen::FlatPortCamera& dst = from_left ? rig.right : rig.left;
      const fishlen::DepthRange range{epi_zmin.value_or(5.0), epi_zmax.value_or(rig.tank_depth_mm)};
      const int segments = epi_dense ? 128 : epi_segments;
      const fishlen::EpipolarCurve curve =
          fishlen::ComputeEpipolarCurve(src, dst, ParsePixel(epi_pixel), range, segments);
      std::string out = "u,v,depth_mm\n";
      for (std::size_t i = 0; i < curve.vertices.size(); ++i)
        out += Fixed(curve.vertices[i].u) + "," + Fixed(curve.vertices[i].v) + "," +
               Fixed(curve.depths[i]) + "\n";
      std::cout << out;
      std::cerr << "chord error: " << Fixed(fishlen::ChordError(curve, src, dst)) << " px\n";
      return kExitOk;
    }

    if (*ablate) {
      MeasureArgs unused;
      fishlen::PipelineConfig cfg;
      fishlen::Toggles toggles;
      if (!abl_config.empty()) ApplyConfigFile(abl_config, unused, cfg, toggles);
      cfg.threads = abl_threads;
      std::vector<fishlen::AblationRow> rows;
      if (!abl_dataset.empty()) {
        const fs::path dir(abl_dataset);
        RequireFile((dir / "rig.json").string(), "calibration file");
        RequireFile((dir / "detections.jsonl").string(), "detection file");
        RequireFile((dir / "ground_truth.json").string(), "ground-truth file");
        const fishlen::StereoRig rig = fishlen::LoadRig((dir / "rig.json").string());
        const auto frames = fishlen::PairFrames(
            fishlen::ReadDetectionFile((dir / "detections.jsonl").string()), true, dir.string());
        rows = fishlen::RunAblation(rig, frames,
                                    fishlen::ReadGroundTruth((dir / "ground_truth.json").string()), cfg);
      } else {
        const fishlen::SceneSuite suite =
            fishlen::StandardBenchmark(abl_profile.empty() ? "noisy" : abl_profile);
        rows = fishlen::RunAblation(suite.rig, fishlen::FramesFromSuite(suite),
                                    fishlen::GroundTruthFromSuite(suite), cfg);
      }
      std::cout << fishlen::AblationCsv(rows);
      return kExitOk;
    }
  } catch (const fishlen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fishlen::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const fishlen::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitParse;
  } catch (const fishlen::EmptyEvaluation& e) {
    std::cerr << "empty result: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
