#pragma once

// Dataset-construction decisions: per-shot quality cascade, sliding-window
// aggregation of accepted shots, and cross-shot reference matching for
// subject-to-video pairs.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cinebench/caption/gate.hpp"
#include "cinebench/core/bundle.hpp"
#include "cinebench/core/types.hpp"
#include "cinebench/pose/procrustes.hpp"
#include "cinebench/similarity/similarity.hpp"

namespace cinebench::curation {

// --- quality cascade --------------------------------------------------------

struct ShotQualityRecord {
  double clip_sim = 0.0;
  double dino_sim = 0.0;
  double siglip_score = 0.0;
  double videoclip_score = 0.0;
  double describability = 0.0;
  double motion_score = 0.0;
};

enum class Stage { Semantic, Aesthetic, TextAlignment, Describability, Motion };

constexpr std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::Semantic: return "SEMANTIC";
    case Stage::Aesthetic: return "AESTHETIC";
    case Stage::TextAlignment: return "TEXT_ALIGNMENT";
    case Stage::Describability: return "DESCRIBABILITY";
    case Stage::Motion: return "MOTION";
  }
  return "UNKNOWN";
}

struct FilterResult {
  bool accepted = true;
  std::optional<Stage> rejected_at;
};

/// The six threshold predicates, in cascade order (CLIP, DINO, SigLIP,
/// VideoCLIP, describability, motion interval). All comparisons are inclusive.
inline std::array<bool, 6> quality_predicates(const ShotQualityRecord& q, const MetricConfig& cfg) {
  return {q.clip_sim >= cfg.clip_sim_min,
          q.dino_sim >= cfg.dino_sim_min,
          q.siglip_score >= cfg.siglip_min,
          caption::alignment_gate(q.videoclip_score, cfg),
          q.describability >= cfg.describability_min,
          q.motion_score >= cfg.motion_lo && q.motion_score <= cfg.motion_hi};
}

inline FilterResult cascade_filter(const ShotQualityRecord& q, const MetricConfig& cfg) {
  const auto p = quality_predicates(q, cfg);
  constexpr std::array<Stage, 6> stage_of = {Stage::Semantic,      Stage::Semantic,       Stage::Aesthetic,
                                             Stage::TextAlignment, Stage::Describability, Stage::Motion};
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!p[i]) return {false, stage_of[i]};
  }
  return {true, std::nullopt};
}

/// Converts a float32 feature value to the double with the same shortest
/// decimal spelling, so 0.02f compares as 0.02 against the thresholds.
inline double decimal_widen(float v) {
  if (!std::isfinite(v)) return static_cast<double>(v);
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  double d = 0.0;
  std::from_chars(buf, end, d);
  return d;
}

/// Reads the 6-element `quality` tensor (clip, dino, siglip, videoclip, describability, motion).
inline std::optional<ShotQualityRecord> quality_from_bundle(const FeatureBundle& b) {
  const Tensor* t = b.find("quality");
  if (!t || t->data.size() != 6) return std::nullopt;
  const auto& d = t->data;
  return ShotQualityRecord{decimal_widen(d[0]), decimal_widen(d[1]), decimal_widen(d[2]),
                           decimal_widen(d[3]), decimal_widen(d[4]), decimal_widen(d[5])};
}

// --- sliding windows --------------------------------------------------------

inline std::string window_id(const std::string& storyline_id, std::size_t first, std::size_t last) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "/w%03zu-%03zu", first + 1, last + 1);
  return storyline_id + buf;
}

/// Splits each maximal run of consecutive accepted shots into windows of at
/// least two shots whose total length fits in max_window_frames. Windows start
/// at every shot (stride 1) and extend as far as the cap allows; a window
/// contained in its predecessor is not emitted.
inline std::vector<StorylineSequence> sliding_windows(const StorylineSequence& storyline,
                                                      const std::vector<bool>& accepted, const MetricConfig& cfg) {
  if (accepted.size() != storyline.shots.size()) throw Error(ErrorCode::CountMismatch, "accepted flags != shots");
  std::vector<StorylineSequence> out;
  const auto& shots = storyline.shots;
  std::size_t run_start = 0;
  while (run_start < shots.size()) {
    if (!accepted[run_start]) {
      ++run_start;
      continue;
    }
    std::size_t run_end = run_start;  // exclusive
    while (run_end < shots.size() && accepted[run_end]) ++run_end;

    std::size_t prev_end = run_start;  // exclusive end of the previous emitted window
    for (std::size_t i = run_start; i < run_end; ++i) {
      std::int64_t total = 0;
      std::size_t e = i;
      while (e < run_end && total + shots[e].length() <= cfg.max_window_frames) total += shots[e++].length();
      if (e - i >= 2 && e > prev_end) {
        StorylineSequence w;
        w.sequence_id = window_id(storyline.sequence_id, i, e - 1);
        w.shots.assign(shots.begin() + static_cast<std::ptrdiff_t>(i), shots.begin() + static_cast<std::ptrdiff_t>(e));
        if (!storyline.shot_prompts.empty())
          w.shot_prompts.assign(storyline.shot_prompts.begin() + static_cast<std::ptrdiff_t>(i),
                                storyline.shot_prompts.begin() + static_cast<std::ptrdiff_t>(e));
        w.extra["storyline_id"] = storyline.sequence_id;
        out.push_back(std::move(w));
        prev_end = e;
      }
    }
    run_start = run_end;
  }
  return out;
}

// --- cross-shot matching ----------------------------------------------------

struct MatchConstraints {
  std::int64_t min_intervening_shots = 1;
  std::int64_t min_frame_separation = 32;
  double min_identity_sim = 0.6;
  // Accepted pairs below this identity similarity are flagged for LMM review.
  double review_below = 0.7;
};

struct Appearance {
  std::string clip_id;
  std::int64_t frame = 0;  // absolute source frame
  Box box;
  std::vector<float> identity_emb;
  std::optional<pose::KeypointSet> keypoints;
};

struct SubjectTrack {
  std::string identity_id;
  std::vector<Appearance> appearances;
};

struct Candidate {
  std::string identity_id;
  Appearance reference;
  std::string target_clip_id;
  std::int64_t target_frame = 0;
  std::int64_t intervening_shots = 0;
  std::int64_t frame_separation = 0;
  double identity_similarity = 0.0;
  double view_diversity = 0.0;
};

inline std::optional<std::size_t> shot_index(const StorylineSequence& s, const std::string& clip_id) {
  for (std::size_t i = 0; i < s.shots.size(); ++i) {
    if (s.shots[i].clip_id == clip_id) return i;
  }
  return std::nullopt;
}

/// Shots strictly between two positions of the storyline.
inline std::int64_t intervening_shots(std::size_t a, std::size_t b) {
  const auto lo = std::min(a, b), hi = std::max(a, b);
  return hi == lo ? 0 : static_cast<std::int64_t>(hi - lo - 1);
}

/// Distance in frames from `frame` to the nearest frame of `target`'s span;
/// 0 for a different source video, where frame distance is undefined.
inline std::int64_t frame_separation(std::int64_t frame, const ShotRecord& ref_shot, const ShotRecord& target) {
  if (ref_shot.source_id != target.source_id) return 0;
  if (frame < target.start_frame) return target.start_frame - frame;
  if (frame >= target.end_frame) return frame - (target.end_frame - 1);
  return 0;
}

inline bool separation_ok(std::int64_t intervening, std::int64_t frames, const MatchConstraints& c) {
  return intervening >= c.min_intervening_shots || frames >= c.min_frame_separation;
}

/// Finds reference appearances of the subject visible in `target_clip_id`
/// from other shots of the storyline. Candidates must satisfy the separation
/// rule and the identity threshold; they are ranked by view diversity
/// (descending), ties by clip_id then frame. Throws NO_TRACK when no track
/// appears in the target clip and EMPTY when nothing survives.
inline std::vector<Candidate> cross_shot_match(const std::vector<SubjectTrack>& tracks,
                                               const StorylineSequence& storyline, const std::string& target_clip_id,
                                               const MatchConstraints& c, double vis_min = pose::kDefaultVisMin) {
  const auto target_idx = shot_index(storyline, target_clip_id);
  if (!target_idx) throw Error(ErrorCode::NoTrack, "target clip '" + target_clip_id + "' is not in the storyline");
  const ShotRecord& target = storyline.shots[*target_idx];

  std::vector<Candidate> out;
  bool subject_in_target = false;
  for (const auto& track : tracks) {
    const Appearance* anchor = nullptr;
    for (const auto& a : track.appearances) {
      if (a.clip_id == target_clip_id && (!anchor || a.frame < anchor->frame)) anchor = &a;
    }
    if (!anchor) continue;
    subject_in_target = true;
    for (const auto& a : track.appearances) {
      if (a.clip_id == target_clip_id) continue;
      const auto idx = shot_index(storyline, a.clip_id);
      if (!idx) continue;
      const auto inter = intervening_shots(*idx, *target_idx);
      const auto sep = frame_separation(a.frame, storyline.shots[*idx], target);
      if (!separation_ok(inter, sep, c)) continue;
      if (similarity::is_zero(a.identity_emb) || similarity::is_zero(anchor->identity_emb)) continue;
      const double sim = similarity::cosine(a.identity_emb, anchor->identity_emb);
      if (sim < c.min_identity_sim) continue;

      double diversity = 1.0 - sim;
      if (a.keypoints && anchor->keypoints) {
        try {
          diversity = 1.0 - pose::sim_pose(*a.keypoints, *anchor->keypoints, vis_min);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Degenerate) throw;
        }
      }
      out.push_back({track.identity_id, a, target_clip_id, anchor->frame, inter, sep, sim, diversity});
    }
  }
  if (!subject_in_target) throw Error(ErrorCode::NoTrack, "no tracked subject appears in '" + target_clip_id + "'");
  if (out.empty()) throw Error(ErrorCode::NoCandidate, "no reference satisfies the constraints for '" + target_clip_id + "'");
  std::stable_sort(out.begin(), out.end(), [](const Candidate& x, const Candidate& y) {
    if (x.view_diversity != y.view_diversity) return x.view_diversity > y.view_diversity;
    if (x.reference.clip_id != y.reference.clip_id) return x.reference.clip_id < y.reference.clip_id;
    if (x.reference.frame != y.reference.frame) return x.reference.frame < y.reference.frame;
    return x.identity_id < y.identity_id;
  });
  return out;
}

/// Builds a pair whose target is `target`. Every S2VPair invariant is checked
/// here, so hand-built candidates cannot produce an invalid pair.
inline S2VPair build_s2v_pair(const Candidate& cand, const StorylineSequence& target, const MatchConstraints& c,
                              const std::string& pair_id) {
  for (const auto& s : target.shots) {
    if (s.clip_id == cand.reference.clip_id)
      throw Error(ErrorCode::Construction, "reference clip '" + s.clip_id + "' lies inside the target sequence");
  }
  if (cand.intervening_shots < 0 || cand.frame_separation < 0)
    throw Error(ErrorCode::Construction, "negative separation");
  if (!separation_ok(cand.intervening_shots, cand.frame_separation, c))
    throw Error(ErrorCode::Construction, "reference too close to the target");
  if (!(cand.identity_similarity >= c.min_identity_sim) || cand.identity_similarity > 1.0)
    throw Error(ErrorCode::Construction, "identity similarity below threshold");
  S2VPair p;
  p.pair_id = pair_id;
  p.reference_clip_id = cand.reference.clip_id;
  p.reference_frame = cand.reference.frame;
  p.reference_box = cand.reference.box;
  p.target_sequence_id = target.sequence_id;
  p.intervening_shots = cand.intervening_shots;
  p.frame_separation = cand.frame_separation;
  p.identity_similarity = cand.identity_similarity;
  p.needs_review = cand.identity_similarity < c.review_below;
  return p;
}

/// Subject appearances stored in a clip bundle as `identities` [N, 6 + D]:
/// (identity index, frame offset within the clip, x, y, w, h, embedding...).
/// Keypoints, when present, come from the clip's `keypoints` tensor at the
/// same frame offset.
inline std::vector<Appearance> appearances_from_bundle(const FeatureBundle& b, const ShotRecord& shot,
                                                       std::vector<int>& identity_of) {
  std::vector<Appearance> out;
  const Tensor* t = b.find("identities");
  if (!t) return out;
  if (t->rank() != 2 || t->dim(1) < 7) throw Error(ErrorCode::Layout, "identities must be [N, 6 + D]");
  const auto width = static_cast<std::size_t>(t->dim(1));
  const Tensor* kp = b.find("keypoints");
  for (std::int64_t r = 0; r < t->dim(0); ++r) {
    const float* row = t->data.data() + static_cast<std::size_t>(r) * width;
    Appearance a;
    a.clip_id = shot.clip_id;
    const auto offset = static_cast<std::int64_t>(std::llround(row[1]));
    a.frame = shot.start_frame + offset;
    a.box = {row[2], row[3], row[4], row[5]};
    a.identity_emb.assign(row + 6, row + width);
    if (kp && offset >= 0 && offset < kp->dim(0)) a.keypoints = pose::keypoints_from_tensor(*kp, static_cast<std::size_t>(offset));
    identity_of.push_back(static_cast<int>(std::lround(row[0])));
    out.push_back(std::move(a));
  }
  return out;
}

/// Groups appearances from all clips of a storyline into tracks keyed by identity.
inline std::vector<SubjectTrack> tracks_from_bundles(const StorylineSequence& storyline,
                                                     const std::map<std::string, FeatureBundle>& bundles) {
  std::map<int, SubjectTrack> by_id;
  for (const auto& shot : storyline.shots) {
    auto it = bundles.find(shot.clip_id);
    if (it == bundles.end()) continue;
    std::vector<int> ids;
    auto apps = appearances_from_bundle(it->second, shot, ids);
    for (std::size_t i = 0; i < apps.size(); ++i) {
      auto& track = by_id[ids[i]];
      track.identity_id = "id" + std::to_string(ids[i]);
      track.appearances.push_back(std::move(apps[i]));
    }
  }
  std::vector<SubjectTrack> out;
  for (auto& [id, t] : by_id) out.push_back(std::move(t));
  return out;
}

}  // namespace cinebench::curation
