#pragma once

// Embedding-based identity, scene, text-alignment, grounding and copy-paste
// metrics. Vectors are compared by cosine after L2 normalization; all-zero
// rows mean "absent" and are skipped wherever a metric allows it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "cinebench/core/bundle.hpp"
#include "cinebench/core/types.hpp"
#include "cinebench/error.hpp"

namespace cinebench::similarity {

/// Read-only [rows, dim] view over row-major floats.
class EmbeddingSeries {
 public:
  EmbeddingSeries() = default;
  EmbeddingSeries(std::span<const float> values, std::size_t rows, std::size_t dim)
      : values_(values), rows_(rows), dim_(dim) {
    if (rows * dim != values.size()) throw Error(ErrorCode::ShapeMismatch, "embedding view size mismatch");
  }
  explicit EmbeddingSeries(const Tensor& t) {
    if (t.rank() != 2) throw Error(ErrorCode::Layout, "embedding tensor must be rank 2");
    *this = EmbeddingSeries(t.data, static_cast<std::size_t>(t.dim(0)), static_cast<std::size_t>(t.dim(1)));
  }

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<const float> row(std::size_t i) const { return values_.subspan(i * dim_, dim_); }

  /// Subset of rows, in the given order.
  std::vector<float> gather(const std::vector<std::size_t>& idx) const {
    std::vector<float> out;
    out.reserve(idx.size() * dim_);
    for (auto i : idx) out.insert(out.end(), row(i).begin(), row(i).end());
    return out;
  }

 private:
  std::span<const float> values_;
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
};

template <typename A>
double l2_norm(const A& a) {
  double s = 0.0;
  for (auto v : a) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

template <typename A>
bool is_zero(const A& a) {
  return std::all_of(a.begin(), a.end(), [](auto v) { return v == 0; });
}

template <typename A, typename B>
double cosine(const A& a, const B& b) {
  if (std::size(a) != std::size(b)) throw Error(ErrorCode::ShapeMismatch, "cosine of vectors of unequal length");
  const double na = l2_norm(a), nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  double dot = 0.0;
  auto ib = std::begin(b);
  for (auto va : a) dot += static_cast<double>(va) * static_cast<double>(*ib++);
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

inline std::vector<double> normalized(std::span<const float> v) {
  const double n = l2_norm(v);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]) / n;
  return out;
}

/// Mean of the L2-normalized non-zero rows, itself L2-normalized. Empty when
/// no usable row exists.
inline std::vector<double> centroid(const EmbeddingSeries& s) {
  std::vector<double> c(s.dim(), 0.0);
  bool any = false;
  for (std::size_t i = 0; i < s.rows(); ++i) {
    if (is_zero(s.row(i))) continue;
    const auto n = normalized(s.row(i));
    for (std::size_t d = 0; d < c.size(); ++d) c[d] += n[d];
    any = true;
  }
  if (!any || !(l2_norm(c) > 0.0)) return {};
  const double n = l2_norm(c);
  for (auto& v : c) v /= n;
  return c;
}

/// Identity fidelity to an external reference, on a 0-100 scale.
inline double ref_subject_consistency(std::span<const float> ref_subject, std::optional<std::span<const float>> ref_face,
                                      const EmbeddingSeries& frames, const std::optional<EmbeddingSeries>& faces,
                                      const MetricConfig& cfg) {
  if (is_zero(ref_subject)) throw Error(ErrorCode::ZeroVector, "reference subject embedding is zero");
  if (faces && faces->rows() != frames.rows()) throw Error(ErrorCode::ShapeMismatch, "face rows != subject rows");
  const bool ref_has_face = ref_face && !is_zero(*ref_face);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < frames.rows(); ++i) {
    if (is_zero(frames.row(i))) continue;
    double score = cosine(ref_subject, frames.row(i));
    if (ref_has_face && faces && !is_zero(faces->row(i)))
      score = cfg.face_weight * cosine(*ref_face, faces->row(i)) + (1.0 - cfg.face_weight) * score;
    sum += score;
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::NoUsableFrames, "no usable frame embedding");
  return std::clamp(100.0 * sum / static_cast<double>(used), 0.0, 100.0);
}

/// Identity preservation across shots: mean cosine over all unordered pairs of
/// per-shot centroids, on a 0-100 scale.
inline double inter_subject_consistency(const std::vector<EmbeddingSeries>& per_shot,
                                        const std::optional<std::vector<EmbeddingSeries>>& faces,
                                        const MetricConfig& cfg) {
  if (faces && faces->size() != per_shot.size()) throw Error(ErrorCode::ShapeMismatch, "face shots != subject shots");
  struct ShotCentroids {
    std::vector<double> subject;
    std::vector<double> face;
  };
  std::vector<ShotCentroids> shots;
  for (std::size_t s = 0; s < per_shot.size(); ++s) {
    auto c = centroid(per_shot[s]);
    if (c.empty()) continue;
    shots.push_back({std::move(c), faces ? centroid((*faces)[s]) : std::vector<double>{}});
  }
  if (shots.size() < 2) throw Error(ErrorCode::FewerThanTwoShots, "need at least two shots with usable embeddings");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < shots.size(); ++a) {
    for (std::size_t b = a + 1; b < shots.size(); ++b) {
      double score = cosine(shots[a].subject, shots[b].subject);
      if (!shots[a].face.empty() && !shots[b].face.empty())
        score = cfg.face_weight * cosine(shots[a].face, shots[b].face) + (1.0 - cfg.face_weight) * score;
      sum += score;
      ++pairs;
    }
  }
  return std::clamp(100.0 * sum / static_cast<double>(pairs), 0.0, 100.0);
}

/// Mean cosine over all unordered pairs of per-shot background embeddings.
inline double scene_consistency(const EmbeddingSeries& backgrounds) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < backgrounds.rows(); ++i) {
    if (!is_zero(backgrounds.row(i))) usable.push_back(i);
  }
  if (usable.size() < 2) throw Error(ErrorCode::FewerThanTwoShots, "need at least two background rows");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < usable.size(); ++a) {
    for (std::size_t b = a + 1; b < usable.size(); ++b) {
      sum += cosine(backgrounds.row(usable[a]), backgrounds.row(usable[b]));
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

inline double text_alignment(std::span<const float> per_shot_scores) {
  if (per_shot_scores.empty()) throw Error(ErrorCode::Empty, "no per-shot text scores");
  double sum = 0.0;
  for (float v : per_shot_scores) sum += v;
  return sum / static_cast<double>(per_shot_scores.size());
}

inline double text_alignment(std::span<const double> per_shot_scores) {
  if (per_shot_scores.empty()) throw Error(ErrorCode::Empty, "no per-shot text scores");
  double sum = 0.0;
  for (double v : per_shot_scores) sum += v;
  return sum / static_cast<double>(per_shot_scores.size());
}

struct CopyPasteEntropy {
  double entropy = 0.0;  // normalized to [0, 1]
  std::size_t argmax = 0;
};

/// Softmax over the frame's cosine similarities to the gallery (row 0 is the
/// reference, the rest are distractors), then Shannon entropy divided by
/// ln(gallery size).
inline CopyPasteEntropy copy_paste_entropy(std::span<const float> frame, const EmbeddingSeries& gallery,
                                           double temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidConfig, "softmax temperature must be > 0");
  if (gallery.rows() < 2) throw Error(ErrorCode::Empty, "gallery needs the reference plus at least one distractor");
  if (is_zero(frame)) throw Error(ErrorCode::ZeroVector, "frame embedding is zero");
  std::vector<double> logits(gallery.rows());
  for (std::size_t i = 0; i < gallery.rows(); ++i) {
    if (is_zero(gallery.row(i))) throw Error(ErrorCode::ZeroVector, "gallery row is zero");
    logits[i] = cosine(frame, gallery.row(i)) / temperature;
  }
  CopyPasteEntropy r;
  const auto max_it = std::max_element(logits.begin(), logits.end());
  r.argmax = static_cast<std::size_t>(max_it - logits.begin());
  const double m = *max_it;
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  double h = 0.0;
  for (double l : logits) {
    const double p = std::exp(l - m) / z;
    if (p > 0.0) h -= p * std::log(p);
  }
  r.entropy = std::clamp(h / std::log(static_cast<double>(gallery.rows())), 0.0, 1.0);
  // A flat softmax is exactly maximal entropy; avoid reporting 1 - ulp.
  if (std::all_of(logits.begin(), logits.end(), [&](double l) { return l == m; })) r.entropy = 1.0;
  return r;
}

struct FrameCopyStats {
  std::vector<double> entropies;
  std::vector<std::size_t> argmax;
};

inline bool is_copy_frame(double entropy, std::size_t argmax, double threshold) {
  return entropy < threshold && argmax == 0;
}

/// Fraction of a sequence's frames flagged as copies of the reference.
inline double sequence_copy_score(const FrameCopyStats& s, double threshold) {
  if (s.entropies.empty() || s.entropies.size() != s.argmax.size())
    throw Error(ErrorCode::Empty, "sequence has no frame statistics");
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < s.entropies.size(); ++i) flagged += is_copy_frame(s.entropies[i], s.argmax[i], threshold);
  return static_cast<double>(flagged) / static_cast<double>(s.entropies.size());
}

/// Percentage: 100 · mean over sequences of the flagged-frame fraction.
inline double cp_rate(const std::vector<FrameCopyStats>& sequences, double threshold) {
  if (sequences.empty()) throw Error(ErrorCode::Empty, "no sequences");
  double sum = 0.0;
  for (const auto& s : sequences) sum += sequence_copy_score(s, threshold);
  return 100.0 * sum / static_cast<double>(sequences.size());
}

struct Detection {
  std::int64_t frame = 0;
  int class_id = 0;
  double conf = 0.0;
  Box box;
};

inline std::vector<Detection> detections_from_tensor(const Tensor& t) {
  if (t.rank() != 2 || t.dim(1) != 7) throw Error(ErrorCode::Layout, "detections must be [N, 7]");
  std::vector<Detection> out;
  for (std::int64_t r = 0; r < t.dim(0); ++r) {
    const float* d = t.data.data() + r * 7;
    out.push_back({static_cast<std::int64_t>(std::llround(d[0])), static_cast<int>(std::lround(d[1])), d[2],
                   Box{d[3], d[4], d[5], d[6]}});
  }
  return out;
}

/// Fraction of designated frames with at least one confident detection of the target class.
inline double subject_recall(const std::vector<Detection>& detections, const std::set<std::int64_t>& designated,
                             int target_class, double conf_min) {
  if (designated.empty()) throw Error(ErrorCode::EmptyDesignated, "no designated frames");
  std::set<std::int64_t> hit;
  for (const auto& d : detections) {
    if (d.class_id == target_class && d.conf >= conf_min && designated.count(d.frame)) hit.insert(d.frame);
  }
  return static_cast<double>(hit.size()) / static_cast<double>(designated.size());
}

}  // namespace cinebench::similarity
