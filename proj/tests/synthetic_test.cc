#include <doctest.h>

#include <cmath>

#include "fishlen/epipolar.h"
#include "fishlen/measurement.h"
#include "fishlen/synthetic.h"
#include "test_support.h"

namespace fishlen {
namespace {

SceneOptions Options(int n_fish = 10) {
  SceneOptions o;
  o.tank = StandardTank();
  o.n_fish = n_fish;
  return o;
}

TEST_CASE("scene generation is deterministic in its seeds") {
  const StereoRig rig = StandardRig();
  const CorruptionModel noise{1.5, 1.5, 0.2, 4.0, 77};
  const SyntheticScene a = GenerateScene(4, rig, Options(), noise);
  const SyntheticScene b = GenerateScene(4, rig, Options(), noise);
  CHECK(a.left == b.left);
  CHECK(a.right == b.right);
  CHECK(SerializeGroundTruth({{a.truth}}) == SerializeGroundTruth({{b.truth}}));

  CorruptionModel other = noise;
  other.rng_seed = 78;
  CHECK(!(GenerateScene(4, rig, Options(), other).left == a.left));
  CHECK(!(GenerateScene(5, rig, Options(), noise).left == a.left));
}

TEST_CASE("an empty scene has no detections") {
  const SyntheticScene s = GenerateScene(0, StandardRig(), Options(0), {});
  CHECK(s.left.detections.empty());
  CHECK(s.right.detections.empty());
  CHECK(s.truth.fish.empty());
}

TEST_CASE("noiseless detections are exact projections of the ground truth") {
  const StereoRig rig = StandardRig(2.0);
  const SyntheticScene s = GenerateScene(1, rig, Options(), {});
  REQUIRE(s.truth.fish.size() == 10);
  for (const GroundTruthFish& g : s.truth.fish) {
    const FishDetection* l = nullptr;
    const FishDetection* r = nullptr;
    for (const auto& d : s.left.detections)
      if (d.id == g.left_id) l = &d;
    for (const auto& d : s.right.detections)
      if (d.id == g.right_id) r = &d;
    REQUIRE(l);
    REQUIRE(r);
    for (int k = 0; k < kNumKeypoints; ++k) {
      CHECK(Distance(l->keypoints[k].position, ForwardProject(rig.left, g.keypoints_3d[k])) < 1e-9);
      CHECK(Distance(r->keypoints[k].position, ForwardProject(rig.right, g.keypoints_3d[k])) < 1e-9);
    }
    CHECK(l->bbox == g.left_box);
    CHECK(g.length_mm == doctest::Approx((g.keypoints_3d[4] - g.keypoints_3d[0]).norm()));
    CHECK(g.length_mm >= 25.0);
    CHECK(g.length_mm <= 80.0);

    MatchedPair pair{*l, *r, {}, {}};
    CHECK(std::abs(MeasurePair(pair, rig, "p").length_mm - g.length_mm) < 1e-6);
  }
}

TEST_CASE("noiseless keypoints lie on their epipolar curves") {
  const StereoRig rig = StandardRig(2.0);
  const SyntheticScene s = GenerateScene(2, rig, Options(), {});
  const CurveProvider curves = MakeCurveProvider(rig.left, rig.right, {5, rig.tank_depth_mm});
  for (const GroundTruthFish& g : s.truth.fish) {
    for (int k = 0; k < kNumKeypoints; ++k) {
      const Pixel l = ForwardProject(rig.left, g.keypoints_3d[k]);
      const Pixel r = ForwardProject(rig.right, g.keypoints_3d[k]);
      CHECK(ClosestPointOnCurve(curves(l), r).distance < kChordTolerancePx);
    }
  }
}

TEST_CASE("fish stay inside the tank and the image") {
  const StereoRig rig = StandardRig();
  const TankBox tank = StandardTank();
  const SyntheticScene s = GenerateScene(3, rig, Options(15), {});
  for (const GroundTruthFish& g : s.truth.fish) {
    for (const Vec3& p : g.keypoints_3d) {
      CHECK((p.array() >= tank.min.array()).all());
      CHECK((p.array() <= tank.max.array()).all());
    }
  }
  for (const auto* f : {&s.left, &s.right})
    for (const FishDetection& d : f->detections)
      for (const Keypoint& k : d.keypoints) CHECK(rig.left.intrinsics().Contains(k.position));
}

TEST_CASE("keypoint noise matches the corruption model") {
  const StereoRig rig = StandardRig();
  const CorruptionModel noise{1.5, 0.0, 0.2, 4.0, 99};
  double sum_hi = 0, sum_lo = 0;
  int n_hi = 0, n_lo = 0;
  for (int frame = 0; frame < 20; ++frame) {
    const SyntheticScene s = GenerateScene(frame, rig, Options(), noise);
    int low = 0;
    for (const GroundTruthFish& g : s.truth.fish) {
      low += g.quality == QualityClass::kLow;
      for (const FishDetection& d : s.left.detections) {
        if (d.id != g.left_id) continue;
        CHECK(d.quality == g.quality);
        for (int k = 0; k < kNumKeypoints; ++k) {
          const Pixel e = d.keypoints[k].position - ForwardProject(rig.left, g.keypoints_3d[k]);
          (g.quality == QualityClass::kLow ? sum_lo : sum_hi) += e.u * e.u + e.v * e.v;
          (g.quality == QualityClass::kLow ? n_lo : n_hi) += 2;
        }
      }
    }
    CHECK(low == 2);
  }
  CHECK(std::sqrt(sum_hi / n_hi) == doctest::Approx(1.5).epsilon(0.1));
  CHECK(std::sqrt(sum_lo / n_lo) == doctest::Approx(6.0).epsilon(0.15));
}

TEST_CASE("rendered views are deterministic and share one backdrop") {
  const StereoRig rig = StandardRig();
  SceneOptions o = Options(3);
  o.render_images = true;
  const StereoBackdrop backdrop = RenderStereoBackdrop(rig, o.tank, o.wall_seed);
  const SyntheticScene a = GenerateScene(0, rig, o, {}, &backdrop);
  const SyntheticScene b = GenerateScene(0, rig, o, {}, &backdrop);
  REQUIRE(a.left_image);
  CHECK(a.left_image->width == 1224);
  CHECK(a.left_image->height == 1024);
  CHECK(*a.left_image == *b.left_image);
  CHECK(*a.right_image == *b.right_image);
  // A fish is brighter than the dim back wall under its mouth keypoint.
  const Pixel mouth = a.left.detections[0].keypoints[0].position;
  const int x = static_cast<int>(mouth.u), y = static_cast<int>(mouth.v);
  CHECK(a.left_image->at(x, y) != backdrop.left.at(x, y));
}

TEST_CASE("benchmark profiles") {
  for (const char* name : {"clean", "noisy", "crowded"}) {
    const BenchmarkProfile p = GetBenchmarkProfile(name);
    CHECK(p.name == name);
    CHECK(p.frames == 20);
  }
  CHECK(!GetBenchmarkProfile("clean").images);
  CHECK(GetBenchmarkProfile("noisy").corruption.keypoint_noise_sigma_px == 1.5);
  CHECK(GetBenchmarkProfile("crowded").scene.n_fish == 25);
  CHECK_THROWS(GetBenchmarkProfile("nope"));

  const SceneSuite suite = StandardBenchmark("clean");
  CHECK(suite.scenes.size() == 20);
  std::size_t n = 0;
  for (const SyntheticScene& s : suite.scenes) n += s.truth.fish.size();
  CHECK(n == 200);
}

}  // namespace
}  // namespace fishlen
