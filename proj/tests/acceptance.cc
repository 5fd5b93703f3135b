// Acceptance suite: one PASS/FAIL line per criterion. Criterion 10 is
// reported but never fails the run.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fishlen/error.h"
#include "fishlen/pipeline.h"

using namespace fishlen;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double Deg(double d) { return d * M_PI / 180.0; }

/// Unit vector at `theta` from `n`, rotated by `phi` around it.
Vec3 AtAngle(const Vec3& n, double theta, double phi) {
  const Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = n.cross(a).normalized();
  const Vec3 v = n.cross(u);
  return std::cos(theta) * n + std::sin(theta) * (std::cos(phi) * u + std::sin(phi) * v);
}

double SinTo(const Vec3& d, const Vec3& n) { return d.normalized().cross(n).norm(); }

StereoRig UnitIndexRig(double tilt) {
  StereoRig rig = StandardRig(tilt);
  auto flat = [](const FlatPortCamera& c) {
    RefractivePort p = c.port();
    p.n_air = p.n_glass = p.n_water = 1.0;
    return FlatPortCamera(c.intrinsics(), c.pose(), p);
  };
  rig.left = flat(rig.left);
  rig.right = flat(rig.right);
  return rig;
}

// ---------------------------------------------------------------------------

Outcome SnellInvariants() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1, 1), ang(0, 2 * M_PI);
  const double indices[3] = {1.0, 1.5, 1.33};
  double worst_snell = 0, worst_plane = 0;
  int refracted = 0, tir = 0, tir_wrong = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 n = Vec3(u(rng), u(rng), u(rng)).normalized();
    const double n1 = indices[i % 3], n2 = indices[(i / 3) % 3];
    const Vec3 in = AtAngle(n, std::acos(std::abs(u(rng))) * 0.999, ang(rng));
    const bool expect_tir = n1 * SinTo(in, n) > n2;
    try {
      const Vec3 out = RefractDirection(in, n, n1, n2);
      ++refracted;
      tir_wrong += expect_tir;
      worst_snell = std::max(worst_snell, std::abs(n1 * SinTo(in, n) - n2 * SinTo(out, n)));
      worst_plane = std::max(worst_plane, std::abs(in.cross(out).dot(n)));
    } catch (const TotalInternalReflection&) {
      ++tir;
      tir_wrong += !expect_tir;
    }
  }

  // Critical angle: refracts just inside, reflects just outside.
  int boundary_wrong = 0;
  const std::pair<double, double> dense_to_thin[] = {{1.33, 1.0}, {1.5, 1.0}, {1.5, 1.33}};
  for (auto [n1, n2] : dense_to_thin) {
    const double crit = std::asin(n2 / n1);
    for (int k = 0; k < 20; ++k) {
      const Vec3 n = Vec3(u(rng), u(rng), u(rng)).normalized();
      const double phi = ang(rng);
      try {
        RefractDirection(AtAngle(n, crit - 1e-9, phi), n, n1, n2);
      } catch (const TotalInternalReflection&) {
        ++boundary_wrong;
      }
      try {
        RefractDirection(AtAngle(n, crit + 1e-9, phi), n, n1, n2);
        ++boundary_wrong;
      } catch (const TotalInternalReflection&) {
      }
    }
  }
  const bool pass = worst_snell <= 1e-12 && worst_plane <= 1e-12 && tir_wrong == 0 && boundary_wrong == 0;
  return {pass, "max |dn sin| " + Fmt("%.2e", worst_snell) + ", max coplanarity " +
                    Fmt("%.2e", worst_plane) + ", " + std::to_string(refracted) + " refracted / " +
                    std::to_string(tir) + " TIR, critical-angle misses " + std::to_string(boundary_wrong)};
}

Outcome ProjectionRoundTrip() {
  double worst = 0;
  for (double tilt : {0.0, 2.0}) {
    const StereoRig rig = StandardRig(tilt);
    std::mt19937_64 rng(202 + static_cast<int>(tilt));
    std::uniform_real_distribution<double> pu(0, 1223), pv(0, 1023), z(5, rig.tank_depth_mm);
    for (const FlatPortCamera* cam : {&rig.left, &rig.right}) {
      for (int i = 0; i < 1000; ++i) {
        const Pixel px{pu(rng), pv(rng)};
        const Vec3 p = PointAtDepth(TracePixelRay(*cam, px), z(rng));
        worst = std::max(worst, Distance(ForwardProject(*cam, p), px));
      }
    }
  }
  return {worst <= 1e-6, "max error " + Fmt("%.2e", worst) + " px over 4000 samples"};
}

Outcome PinholeDegeneracy() {
  double worst_line = 0, worst_tri = 0;
  for (double tilt : {0.0, 2.0}) {
    const StereoRig rig = UnitIndexRig(tilt);
    // F = K'^-T [t]x R K^-1 for the right camera relative to the left.
    auto k_mat = [](const PinholeIntrinsics& k) {
      Mat3 m;
      m << k.fx, 0, k.cx, 0, k.fy, k.cy, 0, 0, 1;
      return m;
    };
    const Mat3 r = rig.right.pose().rotation * rig.left.pose().rotation.transpose();
    const Vec3 t = rig.right.pose().translation - r * rig.left.pose().translation;
    Mat3 tx;
    tx << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
    const Mat3 f = k_mat(rig.right.intrinsics()).inverse().transpose() * tx * r *
                   k_mat(rig.left.intrinsics()).inverse();

    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> pu(0, 1223), pv(0, 1023), x(-20, 100), y(-60, 60), z(110, 340);
    for (int i = 0; i < 100; ++i) {
      const Pixel px{pu(rng), pv(rng)};
      const EpipolarCurve c = ComputeEpipolarCurve(rig.left, rig.right, px, {5, rig.tank_depth_mm}, 32);
      const Vec3 line = f * Vec3(px.u, px.v, 1);
      for (const Pixel& v : c.vertices)
        worst_line = std::max(worst_line, std::abs(line.dot(Vec3(v.u, v.v, 1))) / line.head<2>().norm());

      // Classical midpoint from the camera centres.
      const Vec3 p(x(rng), y(rng), z(rng));
      auto project = [&](const FlatPortCamera& cam) {
        const Vec3 c = cam.pose().rotation * p + cam.pose().translation;
        const auto& k = cam.intrinsics();
        return Pixel{k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy};
      };
      auto direction = [](const FlatPortCamera& cam, Pixel q) {
        const auto& k = cam.intrinsics();
        return (cam.pose().rotation.transpose() * Vec3((q.u - k.cx) / k.fx, (q.v - k.cy) / k.fy, 1)).normalized();
      };
      const Pixel lp = project(rig.left), rp = project(rig.right);
      const Vec3 d1 = direction(rig.left, lp), d2 = direction(rig.right, rp);
      Eigen::Matrix<double, 3, 2> a;
      a << d1, -d2;
      const Eigen::Vector2d st = a.colPivHouseholderQr().solve(rig.right.center() - rig.left.center());
      const Vec3 classical =
          0.5 * ((rig.left.center() + st[0] * d1) + (rig.right.center() + st[1] * d2));
      worst_tri = std::max(worst_tri, (Triangulate(rig.left, rig.right, lp, rp).point - classical).norm());
    }
  }
  return {worst_line <= 1e-7 && worst_tri <= 1e-9,
          "max line deviation " + Fmt("%.2e", worst_line) + " px, max triangulation difference " +
              Fmt("%.2e", worst_tri) + " mm"};
}

// Straight-line re-implementations of the matching costs.
double RefEpipolar(const EpipolarCurve& c, Pixel m, double gate) {
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) {
    const double ax = c.vertices[i].u, ay = c.vertices[i].v;
    const double bx = c.vertices[i + 1].u, by = c.vertices[i + 1].v;
    const double len2 = (bx - ax) * (bx - ax) + (by - ay) * (by - ay);
    double s = len2 > 0 ? ((m.u - ax) * (bx - ax) + (m.v - ay) * (by - ay)) / len2 : 0;
    s = s < 0 ? 0 : (s > 1 ? 1 : s);
    const double dx = m.u - (ax + s * (bx - ax)), dy = m.v - (ay + s * (by - ay));
    best = std::min(best, std::sqrt(dx * dx + dy * dy));
  }
  return best < gate ? best / gate : INFINITY;
}

double RefSize(const FishDetection& a, const FishDetection& b) {
  return 0.5 * (std::fabs(a.bbox.width - b.bbox.width) / ((a.bbox.width + b.bbox.width) / 2) +
                std::fabs(a.bbox.height - b.bbox.height) / ((a.bbox.height + b.bbox.height) / 2));
}

double RefKeypoints(const FishDetection& a, const FishDetection& b) {
  double ma[2] = {0, 0}, mb[2] = {0, 0};
  for (int k = 0; k < 5; ++k) {
    ma[0] += a.keypoints[k].position.u / 5;
    ma[1] += a.keypoints[k].position.v / 5;
    mb[0] += b.keypoints[k].position.u / 5;
    mb[1] += b.keypoints[k].position.v / 5;
  }
  double s = 0;
  for (int k = 0; k < 5; ++k) {
    const double du = (a.keypoints[k].position.u - ma[0]) - (b.keypoints[k].position.u - mb[0]);
    const double dv = (a.keypoints[k].position.v - ma[1]) - (b.keypoints[k].position.v - mb[1]);
    s += std::sqrt(du * du + dv * dv);
  }
  return s / (0.5 * (a.bbox.width + b.bbox.width + a.bbox.height + b.bbox.height));
}

Outcome CostExactness() {
  const StereoRig rig = StandardRig(2.0);
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> cu(100, 1100), cv(100, 900), w(20, 200), h(10, 80), jit(-60, 60),
      kp(-40, 40);
  auto random_det = [&](const std::string& id, Pixel c) {
    FishDetection d;
    d.id = id;
    d.bbox = {c, w(rng), h(rng)};
    for (Keypoint& k : d.keypoints) k.position = c + Pixel{kp(rng), kp(rng)};
    return d;
  };
  double worst = 0;
  int inf_mismatch = 0, n_inf = 0;
  for (int i = 0; i < 1000; ++i) {
    const FishDetection l = random_det("l", {cu(rng), cv(rng)});
    const EpipolarCurve curve = ComputeEpipolarCurve(rig.left, rig.right, l.bbox.center, {5, rig.tank_depth_mm});
    // Place the right box near the curve so most pairs fall inside the gate.
    const Pixel on = curve.vertices[i % curve.vertices.size()];
    const FishDetection r = random_det("r", on + Pixel{jit(rng), 2.5 * jit(rng)});
    const MatchCost c = TotalCost(l, r, curve, 150.0);
    const double ep = RefEpipolar(curve, r.bbox.center, 150.0);
    const double sz = RefSize(l, r), kc = RefKeypoints(l, r);
    const double total = std::isinf(ep) ? INFINITY : (ep + sz + kc) / 3;
    if (std::isinf(ep) != std::isinf(c.epipolar) || std::isinf(total) != std::isinf(c.total)) ++inf_mismatch;
    n_inf += std::isinf(ep);
    if (!std::isinf(ep)) {
      worst = std::max({worst, std::abs(ep - c.epipolar), std::abs(c.total - total)});
    }
    worst = std::max({worst, std::abs(sz - c.size), std::abs(kc - c.keypoints)});
  }

  // Hand-computed examples.
  EpipolarCurve line;
  line.vertices = {{0, 500}, {1224, 500}};
  line.depths = {5, 320};
  FishDetection a, b;
  a.bbox = {{600, 500}, 100, 50};
  b.bbox = {{300, 575}, 150, 50};
  bool examples = CostEpipolar(a, b, line, 150) == 0.5;
  b.bbox.center.v = 530;
  examples &= CostEpipolar(a, b, line, 150) == 0.2;
  b.bbox.center.v = 650;
  examples &= std::isinf(CostEpipolar(a, b, line, 150));
  examples &= CostSize(a, b) == 0.2;

  return {worst <= 1e-12 && inf_mismatch == 0 && examples,
          "max difference " + Fmt("%.2e", worst) + " over 1000 pairs (" + std::to_string(n_inf) +
              " gated), hand examples " + (examples ? "exact" : "WRONG")};
}

Outcome CleanBenchmark() {
  const SceneSuite suite = StandardBenchmark("clean");
  const auto frames = FramesFromSuite(suite);
  const GroundTruth gt = GroundTruthFromSuite(suite);
  std::string detail;
  bool pass = true;
  // Unfiltered: every fish must be measured. Filtered: what survives must be exact.
  for (bool filtered : {false, true}) {
    const PipelineResult r = RunPipeline(suite.rig, frames, WithToggles({}, {filtered, filtered, filtered}));
    const EvaluationReport e = Evaluate(r.Retained(), gt);
    double worst = 0;
    for (const FishResidual& f : e.residuals) worst = std::max(worst, std::abs(f.residual_mm));
    const bool all = e.residuals.size() == gt.FishCount();
    pass &= e.n_bad_matches == 0 && worst <= 1e-6 && e.n_unmatched_predictions == 0 && (filtered || all);
    detail += std::string(filtered ? "; filters on: " : "filters off: ") + std::to_string(e.residuals.size()) +
              "/" + std::to_string(gt.FishCount()) + " associated, " + std::to_string(e.n_bad_matches) +
              " bad, max |residual| " + Fmt("%.2e", worst) + " mm";
  }
  return {pass, detail};
}

Outcome NoisyBenchmark() {
  const SceneSuite suite = StandardBenchmark("noisy");
  const auto frames = FramesFromSuite(suite);
  const GroundTruth gt = GroundTruthFromSuite(suite);
  const FilterConfig fc;
  struct Row {
    EvaluationReport e;
  };
  std::vector<Row> rows;
  int violations = 0;
  for (int di = 0; di < 2; ++di)
    for (int te = 0; te < 2; ++te)
      for (int qu = 0; qu < 2; ++qu) {
        const PipelineResult r = RunPipeline(suite.rig, frames, WithToggles({}, {qu == 1, te == 1, di == 1}));
        rows.push_back({Evaluate(r.Retained(), gt)});
        if (!(qu && di)) continue;
        for (const PairResult& p : r.pairs) {
          if (!p.retained()) continue;
          violations += p.pair.left.quality != QualityClass::kHigh || p.pair.right.quality != QualityClass::kHigh;
          violations += p.pair.left.bbox.AspectRatio() < fc.min_aspect ||
                        p.pair.right.bbox.AspectRatio() < fc.min_aspect;
          violations += p.measurement->axis_angle_deg < fc.min_axis_angle_deg;
        }
      }
  // Row index = qu + 2 te + 4 di.
  const bool a = rows[5].e.rmse_mm <= rows[0].e.rmse_mm && rows[7].e.rmse_mm <= rows[2].e.rmse_mm;
  bool b = true;
  for (int i = 0; i < 8; i += 2) b &= rows[i + 1].e.bad_match_pct <= rows[i].e.bad_match_pct;
  std::string detail = "(a) RMSE Qu+Di " + Fmt("%.3f", rows[5].e.rmse_mm) + " vs none " +
                       Fmt("%.3f", rows[0].e.rmse_mm) + " mm (Te on: " + Fmt("%.3f", rows[7].e.rmse_mm) +
                       " vs " + Fmt("%.3f", rows[2].e.rmse_mm) + "); (b) bad%";
  for (int i = 0; i < 8; i += 2)
    detail += " " + Fmt("%.2f", rows[i + 1].e.bad_match_pct) + "<=" + Fmt("%.2f", rows[i].e.bad_match_pct);
  detail += "; (c) " + std::to_string(violations) + " retained violations";
  return {a && b && violations == 0, detail};
}

Outcome RefinementOracle() {
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<int> shift(-30, 30), byte(0, 255);
  std::uniform_real_distribution<double> angle(0, M_PI), off(-4.9, 4.9);
  int recovered = 0;
  for (int i = 0; i < 100; ++i) {
    GrayImage left(160, 160), right(160, 160);
    for (auto& p : left.pixels) p = static_cast<std::uint8_t>(byte(rng));
    const int dx = shift(rng), dy = shift(rng);
    for (int y = 0; y < 160; ++y)
      for (int x = 0; x < 160; ++x)
        right.at(x, y) = left.Contains(x - dx, y - dy) ? left.at(x - dx, y - dy) : byte(rng);
    const Pixel kp{80, 80};
    const Pixel truth{80.0 + dx, 80.0 + dy};
    // A straight curve passing within the gate of the true match.
    const double th = angle(rng), o = off(rng);
    const Pixel dir{std::cos(th), std::sin(th)}, normal{-std::sin(th), std::cos(th)};
    EpipolarCurve c;
    c.vertices = {truth + o * normal - 300.0 * dir, truth + o * normal + 300.0 * dir};
    c.depths = {5, 320};
    const RefinedKeypoint r = RefineKeypoint(left, right, kp, kp, c, {});
    recovered += r.refined && r.position == truth;
  }
  GrayImage patch(21, 21);
  for (auto& p : patch.pixels) p = static_cast<std::uint8_t>(byte(rng));
  const double self = Ncc(patch, patch);
  return {recovered == 100 && self == 1.0,
          std::to_string(recovered) + "/100 shifts recovered, self NCC " + Fmt("%.17g", self)};
}

Outcome FilterBoundaries() {
  const StereoRig rig = StandardRig();
  const FilterConfig cfg;
  auto pair = [](double w) {
    MatchedPair p;
    p.left.bbox = {{500, 500}, w, 40};
    p.right.bbox = {{400, 500}, 80, 40};
    return p;
  };
  auto body = [](const Vec3& axis) {
    FishMeasurement m;
    m.keypoints_3d.fill(Vec3(0, 0, 200));
    m.keypoints_3d[static_cast<int>(KeypointName::kCaudalFin)] += axis;
    return m;
  };
  const bool aspect = FilterAspect(pair(60), cfg).kept && !FilterAspect(pair(59.96), cfg).kept;
  const bool angle = FilterDirection(body(Vec3(40, 0, 40)), rig.left, cfg).kept &&
                     !FilterDirection(body(Vec3(std::sin(Deg(44.99)), 0, std::cos(Deg(44.99)))), rig.left, cfg).kept;
  const bool assoc = AssociateToGroundTruth({{130, 100}}, {{100, 100}}, 30).prediction_to_gt[0].has_value() &&
                     !AssociateToGroundTruth({{131, 100}}, {{100, 100}}, 30).prediction_to_gt[0].has_value();
  return {aspect && angle && assoc, std::string("aspect ") + (aspect ? "ok" : "WRONG") + ", angle " +
                                        (angle ? "ok" : "WRONG") + ", association " + (assoc ? "ok" : "WRONG")};
}

std::string RunCli(const std::string& args, int* code) {
  FILE* p = popen((std::string(FISHLEN_CLI) + " " + args).c_str(), "r");
  if (!p) return {};
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

Outcome Determinism() {
  int c1 = -1, c2 = -1;
  const std::string a = RunCli("ablate --profile noisy", &c1);
  const std::string b = RunCli("ablate --profile noisy --threads 2", &c2);
  return {c1 == 0 && c2 == 0 && !a.empty() && a == b,
          std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "DIFFERENT") +
              " (second run with 2 threads)"};
}

Outcome Throughput() {
  const SceneSuite suite = StandardBenchmark("crowded");
  const auto frames = FramesFromSuite(suite);
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineResult r = RunPipeline(suite.rig, frames, {});
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double fps = frames.size() / s;
  return {fps >= 5.0, Fmt("%.1f", fps) + " frame pairs/s (" + std::to_string(frames.size()) + " frames, " +
                          std::to_string(r.pairs.size()) + " pairs, all stages on, 1 thread)"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double time_limit_s;  // <= 0: none
    bool gating;
  };
  const Criterion criteria[] = {
      {1, "Snell invariants", SnellInvariants, 1.0, true},
      {2, "projection round trip", ProjectionRoundTrip, 10.0, true},
      {3, "pinhole degeneracy", PinholeDegeneracy, 0, true},
      {4, "cost-function exactness", CostExactness, 0, true},
      {5, "clean benchmark", CleanBenchmark, 0, true},
      {6, "noisy benchmark trends", NoisyBenchmark, 0, true},
      {7, "refinement oracle", RefinementOracle, 0, true},
      {8, "filter boundaries", FilterBoundaries, 0, true},
      {9, "ablation determinism", Determinism, 0, true},
      {10, "throughput", Throughput, 0, false},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0 && s >= c.time_limit_s) {
      o.pass = false;
      o.detail += "; over the " + Fmt("%.0f", c.time_limit_s) + " s limit";
    }
    const char* verdict = o.pass ? "PASS" : "FAIL";
    std::printf("criterion %2d %s: %s -- %s [%.2f s]%s\n", c.id, verdict, c.name, o.detail.c_str(), s,
                c.gating ? "" : " (non-gating)");
    std::fflush(stdout);
    failed += c.gating && !o.pass;
  }
  std::printf("%s: %d gating criteria failed\n", failed ? "FAILED" : "ALL PASSED", failed);
  return failed ? 1 : 0;
}
