#include "fishlen/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include "fishlen/epipolar.h"
#include "fishlen/error.h"
#include "fishlen/matching.h"

namespace fishlen {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t Mix(std::uint64_t a, std::uint64_t b) { return SplitMix64(a ^ SplitMix64(b)); }

// Explicit transforms on top of mt19937_64 so sequences do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  double Gaussian() {
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::size_t Index(std::size_t n) { return static_cast<std::size_t>(Uniform() * n); }

 private:
  std::mt19937_64 engine_;
};

double Hash01(std::uint64_t seed, std::int64_t i, std::int64_t j) {
  const std::uint64_t h = Mix(Mix(seed, static_cast<std::uint64_t>(i)), static_cast<std::uint64_t>(j));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Smooth value noise in [0, 1] with unit lattice spacing.
double ValueNoise(std::uint64_t seed, double x, double y) {
  const double xf = std::floor(x), yf = std::floor(y);
  const auto xi = static_cast<std::int64_t>(xf), yi = static_cast<std::int64_t>(yf);
  double tx = x - xf, ty = y - yf;
  tx = tx * tx * (3.0 - 2.0 * tx);
  ty = ty * ty * (3.0 - 2.0 * ty);
  const double a = Hash01(seed, xi, yi), b = Hash01(seed, xi + 1, yi);
  const double c = Hash01(seed, xi, yi + 1), d = Hash01(seed, xi + 1, yi + 1);
  return (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
}

Mat3 BodyRotation(double yaw, double pitch, double roll) {
  // Body y (dorsal) maps to rig -y, since image rows grow downwards.
  Mat3 base;
  base << 1, 0, 0, 0, -1, 0, 0, 0, -1;
  return Eigen::AngleAxisd(yaw, Vec3::UnitY()).toRotationMatrix() * base *
         Eigen::AngleAxisd(pitch, Vec3::UnitZ()).toRotationMatrix() *
         Eigen::AngleAxisd(roll, Vec3::UnitX()).toRotationMatrix();
}

bool InsideTank(const TankBox& tank, const Vec3& p) {
  return (p.array() >= tank.min.array()).all() && (p.array() <= tank.max.array()).all();
}

BoundingBox TightBox(const std::array<Pixel, kNumKeypoints>& pts, double margin) {
  double u0 = pts[0].u, u1 = pts[0].u, v0 = pts[0].v, v1 = pts[0].v;
  for (const Pixel& p : pts) {
    u0 = std::min(u0, p.u);
    u1 = std::max(u1, p.u);
    v0 = std::min(v0, p.v);
    v1 = std::max(v1, p.v);
  }
  return {{0.5 * (u0 + u1), 0.5 * (v0 + v1)}, u1 - u0 + 2 * margin, v1 - v0 + 2 * margin};
}

// Body silhouette in canonical coordinates: an ellipse plus a tail fan.
bool InsideBody(double bx, double by, double length) {
  const double ex = (bx - 0.05 * length) / (0.45 * length);
  const double ey = by / (0.14 * length);
  if (ex * ex + ey * ey <= 1.0) return true;
  if (bx >= -0.5 * length && bx <= -0.35 * length) {
    const double half = 0.12 * length * (-0.35 * length - bx) / (0.15 * length);
    return std::abs(by) <= half;
  }
  return false;
}

struct Projected {
  std::array<Pixel, kNumKeypoints> left;
  std::array<Pixel, kNumKeypoints> right;
};

std::optional<Projected> ProjectFish(const StereoRig& rig, const SyntheticFish& fish,
                                     double border) {
  Projected out;
  const auto pts = fish.RigKeypoints();
  auto visible = [border](const PinholeIntrinsics& k, Pixel p) {
    return p.u >= border && p.v >= border && p.u <= k.width - 1 - border &&
           p.v <= k.height - 1 - border;
  };
  try {
    for (int i = 0; i < kNumKeypoints; ++i) {
      out.left[i] = ForwardProject(rig.left, pts[i]);
      out.right[i] = ForwardProject(rig.right, pts[i]);
      if (!visible(rig.left.intrinsics(), out.left[i]) ||
          !visible(rig.right.intrinsics(), out.right[i]))
        return std::nullopt;
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  return out;
}

FishDetection MakeDetection(const std::string& id, const std::array<Pixel, kNumKeypoints>& clean,
                            double margin, QualityClass quality, double kp_sigma,
                            double box_sigma, Rng& rng) {
  FishDetection d;
  d.id = id;
  const BoundingBox box = TightBox(clean, margin);
  d.bbox = box;
  if (box_sigma > 0.0) {
    d.bbox.center.u += box_sigma * rng.Gaussian();
    d.bbox.center.v += box_sigma * rng.Gaussian();
    d.bbox.width = std::max(1.0, box.width + box_sigma * rng.Gaussian());
    d.bbox.height = std::max(1.0, box.height + box_sigma * rng.Gaussian());
  }
  for (int i = 0; i < kNumKeypoints; ++i) {
    d.keypoints[i].position = clean[i];
    if (kp_sigma > 0.0) {
      d.keypoints[i].position.u += kp_sigma * rng.Gaussian();
      d.keypoints[i].position.v += kp_sigma * rng.Gaussian();
    }
    d.keypoints[i].confidence = 1.0;
  }
  d.quality = quality;
  d.quality_scores = quality == QualityClass::kHigh ? std::array<double, 3>{0.05, 0.10, 0.85}
                                                    : std::array<double, 3>{0.70, 0.20, 0.10};
  return d;
}

// True when greedy matching of noiseless detections pairs index i with index i
// and each true pair undercuts every alternative in its row and column by
// `margin`.
bool GreedyRecoversIdentity(const std::vector<FishDetection>& left,
                            const std::vector<FishDetection>& right,
                            const std::vector<EpipolarCurve>& left_curves, double margin) {
  const MatchingConfig cfg;
  const std::size_t n = left.size();
  std::vector<std::vector<double>> costs(n, std::vector<double>(n));
  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = left[i].id;
    for (std::size_t j = 0; j < n; ++j)
      costs[i][j] = TotalCost(left[i], right[j], left_curves[i], cfg.gate_px).total;
  }
  if (margin > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && (costs[i][j] < costs[i][i] + margin || costs[j][i] < costs[i][i] + margin))
          return false;
  }
  const auto pairs = GreedyAssignIndices(costs, ids, ids, cfg.max_total_cost);
  if (pairs.size() != n) return false;
  return std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.first == p.second; });
}

}  // namespace

std::array<Vec3, kNumKeypoints> CanonicalBody(double L) {
  std::array<Vec3, kNumKeypoints> k;
  k[static_cast<int>(KeypointName::kMouth)] = Vec3(0.5 * L, 0.0, 0.0);
  k[static_cast<int>(KeypointName::kEye)] = Vec3(0.36 * L, 0.04 * L, 0.0);
  k[static_cast<int>(KeypointName::kDorsalFin)] = Vec3(-0.08 * L, 0.13 * L, 0.0);
  k[static_cast<int>(KeypointName::kVentralFin)] = Vec3(0.02 * L, -0.11 * L, 0.0);
  k[static_cast<int>(KeypointName::kCaudalFin)] = Vec3(-0.5 * L, 0.0, 0.0);
  return k;
}

std::array<Vec3, kNumKeypoints> SyntheticFish::RigKeypoints() const {
  std::array<Vec3, kNumKeypoints> out;
  for (int i = 0; i < kNumKeypoints; ++i) out[i] = ToRig(body_keypoints[i]);
  return out;
}

StereoRig StandardRig(double tilt_deg) {
  PinholeIntrinsics k;
  k.fx = k.fy = 870.0;
  k.cx = 612.0;
  k.cy = 512.0;
  k.width = 1224;
  k.height = 1024;

  RefractivePort port;
  port.n_air = 1.0;
  port.n_glass = 1.5;
  port.n_water = 1.33;
  port.d_glass = 40.0;
  port.t_glass = 5.0;
  port.normal = Eigen::AngleAxisd(tilt_deg * std::numbers::pi / 180.0, Vec3::UnitY()) * Vec3::UnitZ();

  CameraPose left_pose;
  CameraPose right_pose;
  right_pose.translation = Vec3(-80.0, 0.0, 0.0);  // centre at x = +80 mm

  StereoRig rig;
  rig.left = FlatPortCamera(k, left_pose, port);
  RefractivePort right_port = port;
  // Keep both cameras behind the same physical pane.
  right_port.d_glass = port.d_glass - port.normal.dot(right_pose.Center());
  rig.right = FlatPortCamera(k, right_pose, right_port);
  rig.tank_depth_mm = 320.0;
  return rig;
}

TankBox StandardTank() { return {Vec3(-40.0, -70.0, 105.0), Vec3(120.0, 70.0, 345.0)}; }

GrayImage RenderBackdrop(const FlatPortCamera& camera, const TankBox& tank,
                         std::uint64_t wall_seed) {
  const PinholeIntrinsics& k = camera.intrinsics();
  GrayImage img(k.width, k.height);
  const double wall_z = tank.max.z() + 15.0;

  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      double value = 30.0;
      try {
        const WaterRay ray = TracePixelRay(camera, {static_cast<double>(x), static_cast<double>(y)});
        if (ray.direction.z() > 1e-9) {
          const Vec3 hit = ray.origin + ((wall_z - ray.origin.z()) / ray.direction.z()) * ray.direction;
          value = 40.0 + 10.0 * ValueNoise(wall_seed, hit.x() / 6.0, hit.y() / 6.0) +
                  4.0 * ValueNoise(wall_seed + 1, hit.x() / 2.0, hit.y() / 2.0);
        }
      } catch (const Error&) {
      }
      img.at(x, y) = static_cast<std::uint8_t>(std::lround(value));
    }
  }
  return img;
}

GrayImage RenderView(const FlatPortCamera& camera, const std::vector<SyntheticFish>& fish,
                     const GrayImage& backdrop, std::uint64_t noise_seed) {
  const PinholeIntrinsics& k = camera.intrinsics();
  if (backdrop.width != k.width || backdrop.height != k.height)
    throw std::invalid_argument("backdrop size does not match the camera");
  GrayImage img = backdrop;
  std::vector<double> zbuf(img.pixels.size(), std::numeric_limits<double>::infinity());
  for (const SyntheticFish& f : fish) {
    const double L = f.length_mm;
    // Screen-space bounds of the silhouette outline.
    double u0 = k.width, u1 = -1, v0 = k.height, v1 = -1;
    for (int i = 0; i < 48; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 48;
      const Vec3 outline[] = {Vec3(0.05 * L + 0.45 * L * std::cos(a), 0.14 * L * std::sin(a), 0.0),
                              Vec3(-0.5 * L, 0.12 * L * std::sin(a), 0.0)};
      for (const Vec3& b : outline) {
        try {
          const Pixel p = ForwardProject(camera, f.ToRig(b));
          u0 = std::min(u0, p.u);
          u1 = std::max(u1, p.u);
          v0 = std::min(v0, p.v);
          v1 = std::max(v1, p.v);
        } catch (const Error&) {
        }
      }
    }
    const int xa = std::max(0, static_cast<int>(std::floor(u0)) - 3);
    const int xb = std::min(k.width - 1, static_cast<int>(std::ceil(u1)) + 3);
    const int ya = std::max(0, static_cast<int>(std::floor(v0)) - 3);
    const int yb = std::min(k.height - 1, static_cast<int>(std::ceil(v1)) + 3);

    const Vec3 plane_normal = f.rotation.col(2);
    for (int y = ya; y <= yb; ++y) {
      for (int x = xa; x <= xb; ++x) {
        WaterRay ray;
        try {
          ray = TracePixelRay(camera, {static_cast<double>(x), static_cast<double>(y)});
        } catch (const Error&) {
          continue;
        }
        const double denom = ray.direction.dot(plane_normal);
        if (std::abs(denom) < 1e-9) continue;
        const double s = (f.translation - ray.origin).dot(plane_normal) / denom;
        if (s <= 0.0) continue;
        const std::size_t idx = static_cast<std::size_t>(y) * k.width + x;
        if (s >= zbuf[idx]) continue;
        const Vec3 body = f.rotation.transpose() * (ray.origin + s * ray.direction - f.translation);
        if (!InsideBody(body.x(), body.y(), L)) continue;
        zbuf[idx] = s;
        const double tex = 0.55 * ValueNoise(f.texture_seed, body.x() / 2.5, body.y() / 2.5) +
                           0.45 * ValueNoise(f.texture_seed + 7, body.x() / 0.9, body.y() / 0.9);
        img.pixels[idx] = static_cast<std::uint8_t>(std::lround(95.0 + 140.0 * tex));
      }
    }
  }

  Rng noise(noise_seed);
  for (auto& p : img.pixels) {
    const int delta = static_cast<int>(noise.Index(5)) - 2;
    p = static_cast<std::uint8_t>(std::clamp(static_cast<int>(p) + delta, 0, 255));
  }
  return img;
}

StereoBackdrop RenderStereoBackdrop(const StereoRig& rig, const TankBox& tank,
                                   std::uint64_t wall_seed) {
  return {RenderBackdrop(rig.left, tank, wall_seed), RenderBackdrop(rig.right, tank, wall_seed)};
}

SyntheticScene GenerateScene(int frame_id, const StereoRig& rig, const SceneOptions& options,
                             const CorruptionModel& corruption, const StereoBackdrop* backdrop) {
  if (options.n_fish < 0) throw std::invalid_argument("n_fish must be non-negative");
  for (const Vec3& corner : {options.tank.min, options.tank.max}) {
    if (rig.left.WaterDepth(corner) <= 0.0 || rig.right.WaterDepth(corner) <= 0.0)
      throw ConfigError("tank volume must lie on the water side of both ports");
  }

  const std::uint64_t scene_seed = Mix(corruption.rng_seed, static_cast<std::uint64_t>(frame_id));
  Rng geo(Mix(scene_seed, 0x67656F));

  SyntheticScene scene;
  scene.left.frame_id = scene.right.frame_id = frame_id;
  scene.left.camera = CameraSide::kLeft;
  scene.right.camera = CameraSide::kRight;
  scene.truth.frame_id = frame_id;

  std::vector<Projected> projections;
  std::vector<BoundingBox> left_boxes, right_boxes;
  // Noiseless detections and left-centre curves of the fish placed so far.
  std::vector<FishDetection> clean_left, clean_right;
  std::vector<EpipolarCurve> clean_curves;
  const DepthRange depth_range{5.0, rig.tank_depth_mm};
  Rng unused(0);
  const TankBox& tank = options.tank;
  for (int i = 0; i < options.n_fish; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < options.max_retries && !placed; ++attempt) {
      SyntheticFish f;
      f.length_mm = geo.Uniform(options.min_length_mm, options.max_length_mm);
      f.body_keypoints = CanonicalBody(f.length_mm);
      const double yaw = geo.Uniform(0.0, 2.0 * std::numbers::pi);
      const double pitch = geo.Uniform(-25.0, 25.0) * std::numbers::pi / 180.0;
      const double roll = geo.Uniform(-15.0, 15.0) * std::numbers::pi / 180.0;
      f.rotation = BodyRotation(yaw, pitch, roll);
      f.translation = Vec3(geo.Uniform(tank.min.x(), tank.max.x()),
                           geo.Uniform(tank.min.y(), tank.max.y()),
                           geo.Uniform(tank.min.z(), tank.max.z()));
      if (options.crowded_pairs && i % 2 == 1)
        f.translation.y() = scene.fish.back().translation.y() + geo.Uniform(-2.0, 2.0);
      f.texture_seed = Mix(scene_seed, 0x7E00 + static_cast<std::uint64_t>(i));

      const auto pts = f.RigKeypoints();
      if (!std::all_of(pts.begin(), pts.end(), [&](const Vec3& p) { return InsideTank(tank, p); }))
        continue;
      bool clear = true;
      for (const SyntheticFish& other : scene.fish)
        if ((other.translation - f.translation).norm() < 0.5 * (other.length_mm + f.length_mm) * 0.6)
          clear = false;
      if (!clear) continue;

      const auto proj = ProjectFish(rig, f, options.border_margin_px);
      if (!proj) continue;
      const BoundingBox lb = TightBox(proj->left, options.bbox_margin_px);
      const BoundingBox rb = TightBox(proj->right, options.bbox_margin_px);
      for (std::size_t j = 0; j < left_boxes.size() && clear; ++j) {
        if (Distance(lb.center, left_boxes[j].center) < options.min_center_separation_px ||
            Distance(rb.center, right_boxes[j].center) < options.min_center_separation_px)
          clear = false;
      }
      if (!clear) continue;

      FishDetection cl = MakeDetection(std::to_string(i), proj->left, options.bbox_margin_px,
                                       QualityClass::kHigh, 0.0, 0.0, unused);
      FishDetection cr = MakeDetection(std::to_string(i), proj->right, options.bbox_margin_px,
                                       QualityClass::kHigh, 0.0, 0.0, unused);
      EpipolarCurve curve;
      try {
        curve = ComputeEpipolarCurve(rig.left, rig.right, cl.bbox.center, depth_range);
      } catch (const Error&) {
        continue;
      }
      if (options.require_recoverable_pairing) {
        clean_left.push_back(cl);
        clean_right.push_back(cr);
        clean_curves.push_back(curve);
        const bool ok = GreedyRecoversIdentity(clean_left, clean_right, clean_curves,
                                                 options.pairing_margin);
        clean_left.pop_back();
        clean_right.pop_back();
        clean_curves.pop_back();
        if (!ok) continue;
      }
      clean_left.push_back(std::move(cl));
      clean_right.push_back(std::move(cr));
      clean_curves.push_back(std::move(curve));

      scene.fish.push_back(f);
      projections.push_back(*proj);
      left_boxes.push_back(lb);
      right_boxes.push_back(rb);
      placed = true;
    }
    if (!placed)
      throw ProjectionFailure("could not place fish " + std::to_string(i) + " in frame " +
                              std::to_string(frame_id) + " after " +
                              std::to_string(options.max_retries) + " attempts");
  }

  const std::size_t n = scene.fish.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[geo.Index(i)]);
  const auto n_low = static_cast<std::size_t>(std::lround(corruption.low_quality_fraction * n));
  for (std::size_t i = 0; i < n_low; ++i) scene.fish[order[i]].quality_truth = QualityClass::kLow;

  // Right-view ids follow a separate permutation so id order carries no pairing hint.
  std::vector<std::size_t> right_rank(n);
  for (std::size_t i = 0; i < n; ++i) right_rank[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(right_rank[i - 1], right_rank[geo.Index(i)]);

  std::vector<FishDetection> right_dets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SyntheticFish& f = scene.fish[i];
    const bool low = f.quality_truth == QualityClass::kLow;
    const double mult = low ? corruption.low_quality_noise_multiplier : 1.0;
    Rng noise(Mix(scene_seed, 0x6E00 + i));
    const std::string left_id = std::to_string(i);
    const std::string right_id = std::to_string(right_rank[i]);
    scene.left.detections.push_back(MakeDetection(left_id, projections[i].left,
                                                  options.bbox_margin_px, f.quality_truth,
                                                  mult * corruption.keypoint_noise_sigma_px,
                                                  mult * corruption.bbox_noise_sigma_px, noise));
    right_dets[right_rank[i]] = MakeDetection(right_id, projections[i].right,
                                              options.bbox_margin_px, f.quality_truth,
                                              mult * corruption.keypoint_noise_sigma_px,
                                              mult * corruption.bbox_noise_sigma_px, noise);

    GroundTruthFish g;
    g.gt_id = static_cast<int>(i);
    g.left_id = left_id;
    g.right_id = right_id;
    g.left_box = left_boxes[i];
    g.right_box = right_boxes[i];
    g.length_mm = (f.ToRig(f.body_keypoints[static_cast<int>(KeypointName::kMouth)]) -
                   f.ToRig(f.body_keypoints[static_cast<int>(KeypointName::kCaudalFin)]))
                      .norm();
    g.quality = f.quality_truth;
    g.keypoints_3d = f.RigKeypoints();
    scene.truth.fish.push_back(g);
  }
  scene.right.detections = std::move(right_dets);

  if (options.render_images) {
    std::optional<StereoBackdrop> own;
    if (!backdrop) backdrop = &own.emplace(RenderStereoBackdrop(rig, tank, options.wall_seed));
    scene.left_image = RenderView(rig.left, scene.fish, backdrop->left, Mix(scene_seed, 11));
    scene.right_image = RenderView(rig.right, scene.fish, backdrop->right, Mix(scene_seed, 12));
  }
  return scene;
}

BenchmarkProfile GetBenchmarkProfile(const std::string& name) {
  BenchmarkProfile p;
  p.name = name;
  p.scene.tank = StandardTank();
  p.frames = 20;
  if (name == "clean") {
    p.scene.n_fish = 10;
    p.scene.pairing_margin = 0.05;
    p.corruption = {0.0, 0.0, 0.0, 1.0, 1001};
  } else if (name == "noisy") {
    p.scene.n_fish = 10;
    p.scene.pairing_margin = 0.05;
    p.corruption = {1.5, 1.5, 0.2, 4.0, 2002};
    p.images = true;
  } else if (name == "crowded") {
    p.scene.n_fish = 25;
    p.scene.min_center_separation_px = 35.0;
    p.scene.crowded_pairs = true;
    p.corruption = {1.0, 1.0, 0.1, 4.0, 3003};
    p.images = true;
  } else {
    throw ConfigError("unknown benchmark profile '" + name + "' (expected clean, noisy or crowded)");
  }
  return p;
}

SceneSuite StandardBenchmark(const BenchmarkProfile& profile, bool render_images) {
  SceneSuite suite;
  suite.rig = StandardRig();
  SceneOptions options = profile.scene;
  options.render_images = render_images;
  std::optional<StereoBackdrop> backdrop;
  if (render_images) backdrop = RenderStereoBackdrop(suite.rig, options.tank, options.wall_seed);
  for (int f = 0; f < profile.frames; ++f)
    suite.scenes.push_back(GenerateScene(f, suite.rig, options, profile.corruption,
                                         backdrop ? &*backdrop : nullptr));
  return suite;
}

SceneSuite StandardBenchmark(const std::string& profile_name) {
  const BenchmarkProfile profile = GetBenchmarkProfile(profile_name);
  return StandardBenchmark(profile, profile.images);
}

void WriteSceneSuite(const SceneSuite& suite, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  SaveRig(suite.rig, (fs::path(out_dir) / "rig.json").string());

  std::vector<DetectionFrame> frames;
  GroundTruth gt;
  for (const SyntheticScene& s : suite.scenes) {
    DetectionFrame left = s.left, right = s.right;
    if (s.left_image && s.right_image) {
      fs::create_directories(fs::path(out_dir) / "images", ec);
      if (ec) throw IoError("cannot create image directory: " + ec.message());
      char name[64];
      std::snprintf(name, sizeof name, "images/%06d_left.pgm", s.left.frame_id);
      left.image_path = name;
      WritePgm(*s.left_image, (fs::path(out_dir) / name).string());
      std::snprintf(name, sizeof name, "images/%06d_right.pgm", s.right.frame_id);
      right.image_path = name;
      WritePgm(*s.right_image, (fs::path(out_dir) / name).string());
    }
    frames.push_back(std::move(left));
    frames.push_back(std::move(right));
    gt.frames.push_back(s.truth);
  }
  WriteDetectionFile(frames, (fs::path(out_dir) / "detections.jsonl").string());
  WriteGroundTruth(gt, (fs::path(out_dir) / "ground_truth.json").string());
}

}  // namespace fishlen
