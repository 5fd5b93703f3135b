#include "fishlen/refinement.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fishlen/error.h"

namespace fishlen {

void RefinementConfig::Validate() const {
  if (template_half <= 0 || search_half <= 0 || !(epipolar_gate > 0.0))
    throw ConfigError("refinement window sizes and gate must be positive");
  if (!(min_ncc >= -1.0 && min_ncc <= 1.0)) throw ConfigError("min_ncc must lie in [-1, 1]");
}

namespace {

struct Moments {
  std::int64_t n = 0, sum = 0, sum_sq = 0;
  std::int64_t Variance() const { return n * sum_sq - sum * sum; }  // scaled by n^2
};

double Correlation(std::int64_t n, std::int64_t sum_ab, const Moments& a, const Moments& b) {
  const std::int64_t va = a.Variance();
  const std::int64_t vb = b.Variance();
  if (va == 0 && vb == 0) throw ZeroVariance();
  if (va == 0 || vb == 0) return 0.0;
  const std::int64_t cov = n * sum_ab - a.sum * b.sum;
  // Cauchy-Schwarz equality, checked exactly so a perfect match scores exactly 1.
  if (static_cast<__int128>(cov) * cov == static_cast<__int128>(va) * vb) return cov > 0 ? 1.0 : -1.0;
  const double num = static_cast<double>(cov);
  const double r = num / std::sqrt(static_cast<double>(va) * static_cast<double>(vb));
  return std::clamp(r, -1.0, 1.0);
}

// Template statistics, reused for every candidate position.
struct Template {
  int half;
  std::vector<std::uint8_t> values;
  Moments m;
};

Template MakeTemplate(const GrayImage& image, int cx, int cy, int half) {
  GrayImage patch = ExtractPatch(image, cx, cy, half);
  Template t{half, std::move(patch.pixels), {}};
  t.m.n = static_cast<std::int64_t>(t.values.size());
  for (std::uint8_t v : t.values) {
    t.m.sum += v;
    t.m.sum_sq += static_cast<std::int64_t>(v) * v;
  }
  return t;
}

double NccAt(const Template& t, const GrayImage& image, int cx, int cy) {
  const int side = 2 * t.half + 1;
  Moments m;
  m.n = t.m.n;
  std::int64_t sum_ab = 0;
  for (int dy = 0; dy < side; ++dy) {
    const std::uint8_t* row = &image.pixels[static_cast<std::size_t>(cy - t.half + dy) * image.width +
                                            (cx - t.half)];
    const std::uint8_t* trow = &t.values[static_cast<std::size_t>(dy) * side];
    for (int dx = 0; dx < side; ++dx) {
      const std::int64_t b = row[dx];
      m.sum += b;
      m.sum_sq += b * b;
      sum_ab += b * trow[dx];
    }
  }
  return Correlation(m.n, sum_ab, t.m, m);
}

}  // namespace

double Ncc(const GrayImage& a, const GrayImage& b) {
  if (a.width != b.width || a.height != b.height || a.pixels.size() != b.pixels.size())
    throw std::invalid_argument("Ncc: patch sizes differ");
  Moments ma, mb;
  ma.n = mb.n = static_cast<std::int64_t>(a.pixels.size());
  std::int64_t sum_ab = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const std::int64_t x = a.pixels[i], y = b.pixels[i];
    ma.sum += x;
    ma.sum_sq += x * x;
    mb.sum += y;
    mb.sum_sq += y * y;
    sum_ab += x * y;
  }
  return Correlation(ma.n, sum_ab, ma, mb);
}

GrayImage ExtractPatch(const GrayImage& image, int cx, int cy, int half) {
  if (!image.Contains(cx - half, cy - half) || !image.Contains(cx + half, cy + half))
    throw TemplateOutOfBounds();
  const int side = 2 * half + 1;
  GrayImage patch(side, side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) patch.at(x, y) = image.at(cx - half + x, cy - half + y);
  return patch;
}

RefinedKeypoint RefineKeypoint(const GrayImage& left_image, const GrayImage& right_image,
                               Pixel left_kp, Pixel right_kp, const EpipolarCurve& curve,
                               const RefinementConfig& cfg) {
  const RefinedKeypoint unchanged{right_kp, -kInfinity, false};
  const Template tmpl = MakeTemplate(left_image, static_cast<int>(std::lround(left_kp.u)),
                                     static_cast<int>(std::lround(left_kp.v)), cfg.template_half);
  if (!std::isfinite(right_kp.u) || !std::isfinite(right_kp.v)) return unchanged;

  const int h = cfg.template_half;
  const int x0 = std::max(static_cast<int>(std::ceil(right_kp.u - cfg.search_half)), h);
  const int x1 = std::min(static_cast<int>(std::floor(right_kp.u + cfg.search_half)),
                          right_image.width - 1 - h);
  const int y0 = std::max(static_cast<int>(std::ceil(right_kp.v - cfg.search_half)), h);
  const int y1 = std::min(static_cast<int>(std::floor(right_kp.v + cfg.search_half)),
                          right_image.height - 1 - h);
  if (x0 > x1 || y0 > y1) return unchanged;

  // Segments that can come within the gate of the search rectangle. Any other
  // segment is farther than the gate from every candidate, so dropping it does
  // not change the gate test.
  const double g = cfg.epipolar_gate;
  std::vector<std::size_t> near;
  for (std::size_t i = 0; i + 1 < curve.vertices.size(); ++i) {
    const Pixel a = curve.vertices[i], b = curve.vertices[i + 1];
    if (std::max(a.u, b.u) < x0 - g || std::min(a.u, b.u) > x1 + g ||
        std::max(a.v, b.v) < y0 - g || std::min(a.v, b.v) > y1 + g)
      continue;
    near.push_back(i);
  }
  if (near.empty()) return unchanged;

  RefinedKeypoint best = unchanged;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Pixel c{static_cast<double>(x), static_cast<double>(y)};
      bool inside = false;
      for (std::size_t i : near) {
        if (PointSegmentDistance(c, curve.vertices[i], curve.vertices[i + 1]) <= g) {
          inside = true;
          break;
        }
      }
      if (!inside) continue;
      double score;
      try {
        score = NccAt(tmpl, right_image, x, y);
      } catch (const ZeroVariance&) {
        continue;
      }
      if (score > best.score) best = {c, score, true};
    }
  }
  if (!best.refined || best.score < cfg.min_ncc) return {right_kp, best.score, false};
  return best;
}

void RefinePair(MatchedPair& pair, const GrayImage& left_image, const GrayImage& right_image,
                const CurveProvider& curves, const RefinementConfig& cfg) {
  for (KeypointName k : kAllKeypoints) {
    const int idx = static_cast<int>(k);
    pair.refined[idx] = false;
    if (!cfg.keypoints[idx]) continue;
    const Pixel left_kp = pair.left.keypoint(k).position;
    try {
      const EpipolarCurve curve = curves(left_kp);
      const RefinedKeypoint r =
          RefineKeypoint(left_image, right_image, left_kp, pair.right.keypoint(k).position, curve, cfg);
      if (r.refined) {
        pair.right.keypoint(k).position = r.position;
        pair.refined[idx] = true;
      }
    } catch (const Error&) {
      // Template leaves the left image, or no curve exists for this keypoint.
    }
  }
}

}  // namespace fishlen
