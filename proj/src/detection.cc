#include "fishlen/detection.h"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "canonical_json.h"
#include "fishlen/error.h"

namespace fishlen {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kNumKeypoints> kKeypointNames = {
    "mouth", "eye", "dorsal_fin", "ventral_fin", "caudal_fin"};
constexpr std::array<std::string_view, 3> kQualityNames = {"low", "medium", "high"};

std::string Subject(int frame_id, const std::string& det_id) {
  return "frame " + std::to_string(frame_id) + " detection '" + det_id + "'";
}

double ReadNumber(const json& obj, const char* key, std::size_t line, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, path + "." + key, "missing");
  if (!it->is_number()) throw ParseError(line, path + "." + key, "not a number");
  return it->get<double>();
}

FishDetection ParseDetection(const json& d, std::size_t line, int frame_id) {
  if (!d.is_object()) throw ParseError(line, "detections[]", "not an object");
  FishDetection det;
  auto id = d.find("id");
  if (id == d.end()) throw ParseError(line, "id", "missing");
  det.id = id->is_string() ? id->get<std::string>() : id->dump();

  auto box = d.find("bbox");
  if (box == d.end() || !box->is_object()) throw ParseError(line, "bbox", "missing");
  det.bbox.center = {ReadNumber(*box, "cx", line, "bbox"), ReadNumber(*box, "cy", line, "bbox")};
  det.bbox.width = ReadNumber(*box, "w", line, "bbox");
  det.bbox.height = ReadNumber(*box, "h", line, "bbox");

  auto kps = d.find("keypoints");
  if (kps == d.end() || !kps->is_object()) throw ParseError(line, "keypoints", "missing");
  for (const auto& [name, kp] : kps->items()) {
    if (!KeypointFromString(name))
      throw ParseError(line, "keypoints." + name, "unknown keypoint");
  }
  for (KeypointName k : kAllKeypoints) {
    const std::string name(ToString(k));
    auto kp = kps->find(name);
    if (kp == kps->end())
      throw ValidationError(Subject(frame_id, det.id), "missing keypoint " + name);
    const std::string path = "keypoints." + name;
    det.keypoint(k).position = {ReadNumber(*kp, "u", line, path), ReadNumber(*kp, "v", line, path)};
    det.keypoint(k).confidence = kp->contains("conf") ? ReadNumber(*kp, "conf", line, path) : 1.0;
  }

  auto q = d.find("quality");
  if (q == d.end() || !q->is_string()) throw ParseError(line, "quality", "missing");
  auto quality = QualityFromString(q->get<std::string>());
  if (!quality) throw ParseError(line, "quality", "unknown quality class");
  det.quality = *quality;

  auto scores = d.find("quality_scores");
  if (scores == d.end() || !scores->is_array() || scores->size() != 3)
    throw ParseError(line, "quality_scores", "expected three numbers");
  for (int i = 0; i < 3; ++i) {
    if (!(*scores)[i].is_number()) throw ParseError(line, "quality_scores", "not a number");
    det.quality_scores[i] = (*scores)[i].get<double>();
  }
  return det;
}

json DetectionJson(const FishDetection& d) {
  json kps = json::object();
  for (KeypointName k : kAllKeypoints) {
    const Keypoint& kp = d.keypoint(k);
    kps[std::string(ToString(k))] = {{"u", kp.position.u}, {"v", kp.position.v},
                                     {"conf", kp.confidence}};
  }
  return {{"id", d.id},
          {"bbox", {{"cx", d.bbox.center.u}, {"cy", d.bbox.center.v},
                    {"w", d.bbox.width}, {"h", d.bbox.height}}},
          {"keypoints", kps},
          {"quality", std::string(ToString(d.quality))},
          {"quality_scores", {d.quality_scores[0], d.quality_scores[1], d.quality_scores[2]}}};
}

}  // namespace

std::string_view ToString(KeypointName k) { return kKeypointNames[static_cast<int>(k)]; }

std::optional<KeypointName> KeypointFromString(std::string_view s) {
  for (int i = 0; i < kNumKeypoints; ++i)
    if (kKeypointNames[i] == s) return static_cast<KeypointName>(i);
  return std::nullopt;
}

std::string_view ToString(QualityClass q) { return kQualityNames[static_cast<int>(q)]; }

std::optional<QualityClass> QualityFromString(std::string_view s) {
  for (int i = 0; i < 3; ++i)
    if (kQualityNames[i] == s) return static_cast<QualityClass>(i);
  return std::nullopt;
}

std::string_view ToString(CameraSide c) { return c == CameraSide::kLeft ? "left" : "right"; }

void FishDetection::Validate() const {
  // Frame id is unknown here; DetectionFrame::Validate re-labels.
  const std::string who = "detection '" + id + "'";
  if (!(bbox.width > 0.0) || !(bbox.height > 0.0))
    throw ValidationError(who, "bounding box width and height must be positive");
  if (!std::isfinite(bbox.center.u) || !std::isfinite(bbox.center.v))
    throw ValidationError(who, "bounding box centre must be finite");
  for (KeypointName k : kAllKeypoints) {
    const Keypoint& kp = keypoint(k);
    if (!std::isfinite(kp.position.u) || !std::isfinite(kp.position.v))
      throw ValidationError(who, "keypoint " + std::string(ToString(k)) + " must be finite");
    if (!(kp.confidence >= 0.0 && kp.confidence <= 1.0))
      throw ValidationError(who, "keypoint " + std::string(ToString(k)) + " confidence outside [0,1]");
  }
  double sum = 0.0;
  for (double s : quality_scores) {
    if (!(s >= 0.0)) throw ValidationError(who, "quality scores must be non-negative");
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ValidationError(who, "quality scores must sum to 1");
  const double mine = quality_scores[static_cast<int>(quality)];
  for (double s : quality_scores)
    if (s > mine) throw ValidationError(who, "quality must be the argmax of quality_scores");
}

void DetectionFrame::Validate() const {
  std::set<std::string> seen;
  for (const FishDetection& d : detections) {
    try {
      d.Validate();
    } catch (const ValidationError& e) {
      throw ValidationError(Subject(frame_id, d.id), e.invariant);
    }
    if (!seen.insert(d.id).second)
      throw ValidationError(Subject(frame_id, d.id), "duplicate detection id");
  }
}

std::vector<DetectionFrame> ParseDetectionLines(std::string_view text) {
  std::vector<DetectionFrame> frames;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, "", e.what());
    }
    if (!doc.is_object()) throw ParseError(line_no, "", "frame must be a JSON object");
    auto version = doc.find("schema_version");
    if (version == doc.end() || !version->is_number_integer())
      throw ParseError(line_no, "schema_version", "missing");
    if (version->get<int>() != kDetectionSchemaVersion)
      throw ParseError(line_no, "schema_version",
                       "unsupported version " + std::to_string(version->get<int>()));

    DetectionFrame frame;
    auto fid = doc.find("frame_id");
    if (fid == doc.end() || !fid->is_number_integer()) throw ParseError(line_no, "frame_id", "missing");
    frame.frame_id = fid->get<int>();
    auto cam = doc.find("camera");
    if (cam == doc.end() || !cam->is_string()) throw ParseError(line_no, "camera", "missing");
    if (*cam == "left")
      frame.camera = CameraSide::kLeft;
    else if (*cam == "right")
      frame.camera = CameraSide::kRight;
    else
      throw ParseError(line_no, "camera", "expected 'left' or 'right'");
    auto img = doc.find("image_path");
    if (img != doc.end() && !img->is_null()) {
      if (!img->is_string()) throw ParseError(line_no, "image_path", "not a string");
      frame.image_path = img->get<std::string>();
    }
    auto dets = doc.find("detections");
    if (dets == doc.end() || !dets->is_array()) throw ParseError(line_no, "detections", "missing");
    for (const json& d : *dets) frame.detections.push_back(ParseDetection(d, line_no, frame.frame_id));
    frame.Validate();
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<DetectionFrame> ReadDetectionFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open detection file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseDetectionLines(ss.str());
}

std::string SerializeDetectionLines(const std::vector<DetectionFrame>& frames) {
  std::string out;
  for (const DetectionFrame& f : frames) {
    json dets = json::array();
    for (const FishDetection& d : f.detections) dets.push_back(DetectionJson(d));
    json doc = {{"schema_version", kDetectionSchemaVersion},
                {"frame_id", f.frame_id},
                {"camera", std::string(ToString(f.camera))},
                {"detections", dets}};
    if (f.image_path) doc["image_path"] = *f.image_path;
    out += internal::CanonicalDump(doc);
    out += '\n';
  }
  return out;
}

void WriteDetectionFile(const std::vector<DetectionFrame>& frames, const std::string& path) {
  for (const DetectionFrame& f : frames) f.Validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write detection file '" + path + "'");
  out << SerializeDetectionLines(frames);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace fishlen
