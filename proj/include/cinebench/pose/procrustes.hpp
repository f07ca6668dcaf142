#pragma once

// 2D similarity Procrustes alignment of keypoint sets and the anti-copy-paste
// pose-variance score built on it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cinebench/core/bundle.hpp"
#include "cinebench/error.hpp"

namespace cinebench::pose {

inline constexpr double kDefaultVisMin = 0.3;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct KeypointSet {
  std::vector<Point2> points;
  std::vector<double> visibility;  // same length as points, in [0, 1]

  std::size_t size() const { return points.size(); }
};

/// Reads frame `frame` of a [F, J, 3] keypoints tensor.
inline KeypointSet keypoints_from_tensor(const Tensor& t, std::size_t frame) {
  if (t.rank() != 3 || t.dim(2) != 3) throw Error(ErrorCode::Layout, "keypoints must be [F, J, 3]");
  if (frame >= static_cast<std::size_t>(t.dim(0))) throw Error(ErrorCode::ShapeMismatch, "keypoint frame out of range");
  const auto joints = static_cast<std::size_t>(t.dim(1));
  KeypointSet k;
  k.points.reserve(joints);
  k.visibility.reserve(joints);
  const float* row = t.data.data() + frame * joints * 3;
  for (std::size_t j = 0; j < joints; ++j) {
    k.points.push_back({row[3 * j], row[3 * j + 1]});
    k.visibility.push_back(row[3 * j + 2]);
  }
  return k;
}

struct Alignment {
  // Both in the normalized frame: centered on the shared joints, unit Frobenius norm.
  std::vector<Point2> reference;  // normalized P
  std::vector<Point2> aligned;    // rotated, normalized Q
  std::vector<std::size_t> joints;  // indices of the shared visible joints
  double rotation = 0.0;  // radians applied to normalized Q
  double scale = 0.0;     // |P| / |Q| before normalization
  Point2 translation;     // centroid(P) - centroid(Q)
  double residual = 0.0;  // sum of squared distances in the normalized frame
  double cosine = 0.0;    // <P̂, R Q̂>
};

namespace detail {

// Centers on the selected joints and scales to unit Frobenius norm; returns
// the original norm (0 when the set has no spatial extent).
inline double normalize(const KeypointSet& s, const std::vector<std::size_t>& joints, std::vector<Point2>& out,
                        Point2& centroid) {
  centroid = {};
  for (auto j : joints) {
    centroid.x += s.points[j].x;
    centroid.y += s.points[j].y;
  }
  centroid.x /= static_cast<double>(joints.size());
  centroid.y /= static_cast<double>(joints.size());
  out.clear();
  double norm2 = 0.0;
  for (auto j : joints) {
    Point2 p{s.points[j].x - centroid.x, s.points[j].y - centroid.y};
    norm2 += p.x * p.x + p.y * p.y;
    out.push_back(p);
  }
  const double norm = std::sqrt(norm2);
  if (!(norm > 1e-12)) return 0.0;
  for (auto& p : out) {
    p.x /= norm;
    p.y /= norm;
  }
  return norm;
}

}  // namespace detail

/// Aligns Q onto P with translation, uniform scale and a proper rotation
/// (reflections are not allowed) over the joints visible in both sets.
inline Alignment procrustes_align(const KeypointSet& p, const KeypointSet& q, double vis_min = kDefaultVisMin) {
  if (p.size() != q.size()) throw Error(ErrorCode::Degenerate, "keypoint sets have different joint counts");
  Alignment a;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const bool vp = j < p.visibility.size() && p.visibility[j] >= vis_min;
    const bool vq = j < q.visibility.size() && q.visibility[j] >= vis_min;
    if (vp && vq && std::isfinite(p.points[j].x) && std::isfinite(p.points[j].y) && std::isfinite(q.points[j].x) &&
        std::isfinite(q.points[j].y))
      a.joints.push_back(j);
  }
  if (a.joints.size() < 3) throw Error(ErrorCode::Degenerate, "fewer than 3 shared visible joints");

  std::vector<Point2> qn;
  Point2 cp, cq;
  const double np = detail::normalize(p, a.joints, a.reference, cp);
  const double nq = detail::normalize(q, a.joints, qn, cq);
  if (np == 0.0 || nq == 0.0) throw Error(ErrorCode::Degenerate, "keypoint set has zero spatial extent");

  // Maximizing <P̂, R(θ) Q̂> = dot·cosθ + cross·sinθ gives θ = atan2(cross, dot).
  double dot = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < qn.size(); ++i) {
    dot += a.reference[i].x * qn[i].x + a.reference[i].y * qn[i].y;
    cross += qn[i].x * a.reference[i].y - qn[i].y * a.reference[i].x;
  }
  a.rotation = std::atan2(cross, dot);
  const double c = std::cos(a.rotation), s = std::sin(a.rotation);
  a.aligned.reserve(qn.size());
  double cosine = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < qn.size(); ++i) {
    const Point2 r{c * qn[i].x - s * qn[i].y, s * qn[i].x + c * qn[i].y};
    cosine += r.x * a.reference[i].x + r.y * a.reference[i].y;
    const double dx = r.x - a.reference[i].x, dy = r.y - a.reference[i].y;
    residual += dx * dx + dy * dy;
    a.aligned.push_back(r);
  }
  a.scale = np / nq;
  a.translation = {cp.x - cq.x, cp.y - cq.y};
  a.cosine = std::clamp(cosine, -1.0, 1.0);
  a.residual = residual;
  return a;
}

/// Cosine similarity of the Procrustes-aligned, normalized keypoint sets.
inline double sim_pose(const KeypointSet& p, const KeypointSet& q, double vis_min = kDefaultVisMin) {
  return procrustes_align(p, q, vis_min).cosine;
}

struct AcpVarResult {
  double value = 0.0;
  std::size_t used_frames = 0;
  std::size_t skipped_frames = 0;
};

/// 1 - mean pose similarity between the reference and every usable frame.
/// Degenerate frames are skipped and counted.
inline AcpVarResult acp_var(const KeypointSet& reference, const std::vector<KeypointSet>& frames,
                            double vis_min = kDefaultVisMin) {
  if (frames.empty()) throw Error(ErrorCode::NoUsableFrames, "no frames");
  AcpVarResult r;
  double sum = 0.0;
  for (const auto& f : frames) {
    try {
      sum += sim_pose(reference, f, vis_min);
      ++r.used_frames;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Degenerate) throw;
      ++r.skipped_frames;
    }
  }
  if (r.used_frames == 0) throw Error(ErrorCode::NoUsableFrames, "every frame is degenerate");
  r.value = std::clamp(1.0 - sum / static_cast<double>(r.used_frames), 0.0, 2.0);
  return r;
}

}  // namespace cinebench::pose
