#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cinebench/core/bundle.hpp"
#include "cinebench/core/manifest.hpp"

namespace cinebench {

enum class Track { Narrative = 1, Subject = 2 };

enum class FindingCode {
  EmptySequence,
  BadSpan,
  NonMonotoneFrames,
  PromptCountMismatch,
  MissingBundle,
  MultipleSources,
  MissingTensor,
  TensorShape,
  MissingReference,
};

constexpr std::string_view to_string(FindingCode c) noexcept {
  switch (c) {
    case FindingCode::EmptySequence: return "EMPTY_SEQUENCE";
    case FindingCode::BadSpan: return "BAD_SPAN";
    case FindingCode::NonMonotoneFrames: return "NON_MONOTONE_FRAMES";
    case FindingCode::PromptCountMismatch: return "PROMPT_COUNT_MISMATCH";
    case FindingCode::MissingBundle: return "MISSING_BUNDLE";
    case FindingCode::MultipleSources: return "MULTIPLE_SOURCES";
    case FindingCode::MissingTensor: return "MISSING_TENSOR";
    case FindingCode::TensorShape: return "TENSOR_SHAPE";
    case FindingCode::MissingReference: return "MISSING_REFERENCE";
  }
  return "UNKNOWN";
}

struct Finding {
  FindingCode code;
  std::string subject;  // clip_id, tensor name, ...

  std::string render() const { return std::string(to_string(code)) + "(" + subject + ")"; }
  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  std::string sequence_id;
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  bool has(FindingCode c) const {
    return std::any_of(findings.begin(), findings.end(), [c](const Finding& f) { return f.code == c; });
  }
  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

using BundleIndex = std::map<std::string, FeatureBundle>;

/// A shot's features live either in a bundle named after the clip (rows start
/// at the clip's first frame) or in a bundle named after the source video
/// (rows start at frame 0 of the source).
struct ResolvedBundle {
  const FeatureBundle* bundle = nullptr;
  std::int64_t frame_origin = 0;
};

inline std::optional<ResolvedBundle> resolve_bundle(const ShotRecord& shot, const BundleIndex& index) {
  if (auto it = index.find(shot.clip_id); it != index.end()) return ResolvedBundle{&it->second, shot.start_frame};
  if (auto it = index.find(shot.source_id); it != index.end()) return ResolvedBundle{&it->second, 0};
  return std::nullopt;
}

/// Absolute frame number of every row of a frame-level tensor. An optional
/// `frame_index` tensor overrides the default identity mapping when the
/// extractor sampled frames.
inline std::vector<std::int64_t> row_frames(const FeatureBundle& b, std::int64_t origin, std::size_t rows) {
  std::vector<std::int64_t> frames(rows);
  const Tensor* idx = b.find("frame_index");
  for (std::size_t r = 0; r < rows; ++r) {
    const std::int64_t local = (idx && r < idx->data.size()) ? static_cast<std::int64_t>(idx->data[r])
                                                             : static_cast<std::int64_t>(r);
    frames[r] = origin + local;
  }
  return frames;
}

namespace detail {

inline void require_tensor(const FeatureBundle& b, const std::string& name, std::vector<Finding>& out) {
  if (!b.find(name)) out.push_back({FindingCode::MissingTensor, b.clip_id + ":" + name});
}

inline void check_rows(const FeatureBundle& b, const std::string& name, std::int64_t expected,
                       std::vector<Finding>& out) {
  const Tensor* t = b.find(name);
  if (t && (t->shape.empty() || t->dim(0) != expected))
    out.push_back({FindingCode::TensorShape, b.clip_id + ":" + name});
}

inline void check_frame_coverage(const FeatureBundle& b, const std::string& name, std::int64_t needed,
                                 std::vector<Finding>& out) {
  const Tensor* t = b.find(name);
  if (!t || b.find("frame_index")) return;
  if (t->shape.empty() || t->dim(0) < needed) out.push_back({FindingCode::TensorShape, b.clip_id + ":" + name});
}

}  // namespace detail

/// Reports every violated invariant; never throws. When `track` is given, the
/// tensors that track's metrics need are required as well.
inline ValidationReport validate_sequence(const StorylineSequence& seq, const BundleIndex& index,
                                          std::optional<Track> track = std::nullopt) {
  ValidationReport report{seq.sequence_id, {}};
  auto& f = report.findings;
  if (seq.shots.empty()) {
    f.push_back({FindingCode::EmptySequence, seq.sequence_id});
    return report;
  }
  for (const auto& s : seq.shots) {
    if (s.end_frame <= s.start_frame || s.start_frame < 0 || !s.fps.positive())
      f.push_back({FindingCode::BadSpan, s.clip_id});
  }
  for (std::size_t i = 0; i + 1 < seq.shots.size(); ++i) {
    const auto& a = seq.shots[i];
    const auto& b = seq.shots[i + 1];
    if (a.source_id == b.source_id && a.end_frame > b.start_frame)
      f.push_back({FindingCode::NonMonotoneFrames, b.clip_id});
  }
  if (!seq.shot_prompts.empty() && seq.shot_prompts.size() != seq.shots.size())
    f.push_back({FindingCode::PromptCountMismatch, std::to_string(seq.shot_prompts.size()) + "/" +
                                                       std::to_string(seq.shots.size())});

  if (!track) {
    for (const auto& s : seq.shots) {
      if (!resolve_bundle(s, index)) f.push_back({FindingCode::MissingBundle, s.clip_id});
    }
    return report;
  }

  // Scoring reads one bundle per generated video, keyed by its source id.
  const std::string& source = seq.shots.front().source_id;
  for (const auto& s : seq.shots) {
    if (s.source_id != source) {
      f.push_back({FindingCode::MultipleSources, s.clip_id});
      return report;
    }
  }
  auto it = index.find(source);
  if (it == index.end()) {
    f.push_back({FindingCode::MissingBundle, source});
    return report;
  }
  const FeatureBundle& b = it->second;
  const auto n_shots = static_cast<std::int64_t>(seq.shots.size());
  const std::int64_t last_frame = seq.shots.back().end_frame;

  if (*track == Track::Narrative) {
    for (const char* name : {"text_sim", "boundaries", "background_emb", "flow_mag", "coherence"})
      detail::require_tensor(b, name, f);
    detail::check_rows(b, "text_sim", n_shots, f);
    detail::check_rows(b, "background_emb", n_shots, f);
    detail::check_rows(b, "coherence", n_shots - 1, f);
    detail::check_frame_coverage(b, "flow_mag", last_frame, f);
  } else {
    for (const char* name : {"subject_emb", "flow_mag", "detections"}) detail::require_tensor(b, name, f);
    detail::check_frame_coverage(b, "subject_emb", last_frame, f);
    detail::check_frame_coverage(b, "flow_mag", last_frame, f);
    if (const Tensor* face = b.find("face_emb"); face && b.find("subject_emb") &&
                                                 face->dim(0) != b.find("subject_emb")->dim(0))
      f.push_back({FindingCode::TensorShape, b.clip_id + ":face_emb"});
    if (seq.reference_clip_id) {
      auto ref = index.find(*seq.reference_clip_id);
      if (ref == index.end()) {
        f.push_back({FindingCode::MissingReference, *seq.reference_clip_id});
      } else {
        const FeatureBundle& rb = ref->second;
        detail::require_tensor(rb, "subject_emb", f);
        detail::require_tensor(rb, "keypoints", f);
        detail::require_tensor(b, "keypoints", f);
        const Tensor* rs = rb.find("subject_emb");
        const Tensor* gs = b.find("subject_emb");
        if (rs && (rs->dim(0) < 1 || (gs && rs->dim(1) != gs->dim(1))))
          f.push_back({FindingCode::TensorShape, rb.clip_id + ":subject_emb"});
        const Tensor* rk = rb.find("keypoints");
        const Tensor* gk = b.find("keypoints");
        if (rk && (rk->dim(0) < 1 || (gk && rk->dim(1) != gk->dim(1))))
          f.push_back({FindingCode::TensorShape, rb.clip_id + ":keypoints"});
      }
    }
  }
  return report;
}

}  // namespace cinebench
