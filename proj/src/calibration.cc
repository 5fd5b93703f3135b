#include "fishlen/calibration.h"

#include <Eigen/SVD>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fishlen/error.h"

namespace fishlen {

using nlohmann::json;

namespace {

double Number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(0, where + "." + key, "missing");
  if (!obj.at(key).is_number()) throw ParseError(0, where + "." + key, "not a number");
  return obj.at(key).get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> Array(const json& obj, const std::string& key,
                                  const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_array() || obj.at(key).size() != N)
    throw ParseError(0, where + "." + key, "expected an array of " + std::to_string(N) + " numbers");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    const json& e = obj.at(key)[i];
    if (!e.is_number()) throw ParseError(0, where + "." + key, "not a number");
    out[i] = e.get<double>();
  }
  return out;
}

Mat3 Orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

FlatPortCamera ParseCamera(const json& cam, const RefractivePort& shared, double d_glass,
                           const std::string& where) {
  PinholeIntrinsics k;
  k.fx = Number(cam, "fx", where);
  k.fy = Number(cam, "fy", where);
  k.cx = Number(cam, "cx", where);
  k.cy = Number(cam, "cy", where);
  k.width = static_cast<int>(Number(cam, "width", where));
  k.height = static_cast<int>(Number(cam, "height", where));
  k.k1 = cam.contains("k1") ? Number(cam, "k1", where) : 0.0;
  k.k2 = cam.contains("k2") ? Number(cam, "k2", where) : 0.0;

  const Eigen::Matrix<double, 9, 1> r = Array<9>(cam, "rotation", where);
  CameraPose pose;
  pose.rotation << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
  pose.translation = Array<3>(cam, "translation", where);
  if ((pose.rotation.transpose() * pose.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-6)
    pose.rotation = Orthonormalize(pose.rotation);

  RefractivePort port = shared;
  port.d_glass = d_glass;
  try {
    return FlatPortCamera(k, pose, port);
  } catch (const ValidationError& e) {
    throw ValidationError(where + " " + e.subject, e.invariant);
  }
}

json CameraJson(const FlatPortCamera& cam) {
  const auto& k = cam.intrinsics();
  const auto& p = cam.pose();
  json out = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
              {"width", k.width}, {"height", k.height}, {"k1", k.k1}, {"k2", k.k2}};
  json rot = json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) rot.push_back(p.rotation(i, j));
  out["rotation"] = rot;
  out["translation"] = {p.translation.x(), p.translation.y(), p.translation.z()};
  return out;
}

}  // namespace

StereoRig ParseRig(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, "", std::string("invalid calibration JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(0, "", "calibration must be a JSON object");
  if (doc.value("schema_version", 0) != 1)
    throw ParseError(0, "schema_version", "unsupported calibration schema version");
  if (!doc.contains("port") || !doc.contains("cameras"))
    throw ParseError(0, "", "calibration needs 'port' and 'cameras'");

  const json& pj = doc.at("port");
  RefractivePort port;
  port.n_air = Number(pj, "n_air", "port");
  port.n_glass = Number(pj, "n_glass", "port");
  port.n_water = Number(pj, "n_water", "port");
  port.t_glass = Number(pj, "t_glass_mm", "port");
  port.normal = Array<3>(pj, "normal", "port");
  if (std::abs(port.normal.norm() - 1.0) < 1e-6) port.normal.normalize();
  if (!pj.contains("d_glass_mm") || !pj.at("d_glass_mm").is_object())
    throw ParseError(0, "port.d_glass_mm", "expected {\"left\": ..., \"right\": ...}");
  const double d_left = Number(pj.at("d_glass_mm"), "left", "port.d_glass_mm");
  const double d_right = Number(pj.at("d_glass_mm"), "right", "port.d_glass_mm");

  const json& cams = doc.at("cameras");
  if (!cams.contains("left") || !cams.contains("right"))
    throw ParseError(0, "cameras", "need 'left' and 'right'");

  StereoRig rig;
  rig.left = ParseCamera(cams.at("left"), port, d_left, "cameras.left");
  rig.right = ParseCamera(cams.at("right"), port, d_right, "cameras.right");
  rig.tank_depth_mm = Number(doc, "tank_depth_mm", "calibration");
  if (!(rig.tank_depth_mm > 0.0)) throw ValidationError("calibration", "tank_depth_mm must be positive");
  return rig;
}

StereoRig LoadRig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseRig(ss.str());
}

std::string SerializeRig(const StereoRig& rig) {
  const RefractivePort& p = rig.left.port();
  json doc;
  doc["schema_version"] = 1;
  doc["tank_depth_mm"] = rig.tank_depth_mm;
  doc["port"] = {{"n_air", p.n_air},
                 {"n_glass", p.n_glass},
                 {"n_water", p.n_water},
                 {"t_glass_mm", p.t_glass},
                 {"normal", {p.normal.x(), p.normal.y(), p.normal.z()}},
                 {"d_glass_mm", {{"left", p.d_glass}, {"right", rig.right.port().d_glass}}}};
  doc["cameras"] = {{"left", CameraJson(rig.left)}, {"right", CameraJson(rig.right)}};
  return doc.dump(2) + "\n";
}

void SaveRig(const StereoRig& rig, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << SerializeRig(rig);
}

}  // namespace fishlen
