#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cinebench/error.hpp"

namespace cinebench {

using ordered_json = nlohmann::ordered_json;

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool positive() const { return num > 0 && den > 0; }

  Rational reduced() const {
    const auto g = std::gcd(num, den);
    return g == 0 ? *this : Rational{num / g, den / g};
  }

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// One continuous camera take cut from a source video; frames are [start, end).
struct ShotRecord {
  std::string clip_id;
  std::string source_id;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  Rational fps{24, 1};
  std::string caption;
  std::optional<std::string> caption_rewritten;
  ordered_json extra = ordered_json::object();  // unknown fields, preserved verbatim

  std::int64_t length() const { return end_frame - start_frame; }

  friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

struct StorylineSequence {
  std::string sequence_id;
  std::vector<ShotRecord> shots;
  std::optional<std::string> global_narrative;
  std::vector<std::string> shot_prompts;  // empty means "not provided"
  // External subject reference used by subject-to-video scoring.
  std::optional<std::string> reference_clip_id;
  // Detector class the subject-recall metric looks for.
  std::optional<int> target_class;
  ordered_json extra = ordered_json::object();

  friend bool operator==(const StorylineSequence&, const StorylineSequence&) = default;
};

/// Normalized (x, y, w, h) box.
struct Box {
  double x = 0, y = 0, w = 0, h = 0;
  friend bool operator==(const Box&, const Box&) = default;
};

/// Reference shot plus target sequence; the reference never comes from the target.
struct S2VPair {
  std::string pair_id;
  std::string reference_clip_id;
  std::int64_t reference_frame = 0;
  Box reference_box;
  std::string target_sequence_id;
  std::int64_t intervening_shots = 0;
  std::int64_t frame_separation = 0;
  double identity_similarity = 0.0;
  // Identity similarity in the borderline band; routed to an LMM check downstream.
  bool needs_review = false;

  friend bool operator==(const S2VPair&, const S2VPair&) = default;
};

struct MetricConfig {
  double clip_sim_min = 0.80;
  double dino_sim_min = 0.80;
  double siglip_min = 4.00;
  double videoclip_min = 0.20;
  double describability_min = 0.02;
  double motion_lo = 0.5;
  double motion_hi = 400.0;
  double softmax_temperature = 0.10;
  double cp_entropy_threshold = 0.10;
  int coherence_bins = 20;
  double recall_conf_min = 0.30;
  std::int64_t max_window_frames = 161;
  double face_weight = 0.5;
  double pose_vis_min = 0.3;

  void validate() const {
    const double values[] = {clip_sim_min, dino_sim_min, siglip_min, videoclip_min, describability_min,
                             motion_lo, motion_hi, softmax_temperature, cp_entropy_threshold,
                             recall_conf_min, face_weight, pose_vis_min};
    for (double v : values) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "non-finite threshold");
    }
    if (!(motion_lo < motion_hi)) throw Error(ErrorCode::InvalidConfig, "motion_lo must be < motion_hi");
    if (!(softmax_temperature > 0)) throw Error(ErrorCode::InvalidConfig, "softmax temperature must be > 0");
    if (!(cp_entropy_threshold > 0 && cp_entropy_threshold < 1))
      throw Error(ErrorCode::InvalidConfig, "entropy threshold must lie in (0, 1)");
    if (coherence_bins < 2) throw Error(ErrorCode::InvalidConfig, "coherence_bins must be >= 2");
    if (max_window_frames < 2) throw Error(ErrorCode::InvalidConfig, "max_window_frames must be >= 2");
    if (face_weight < 0 || face_weight > 1) throw Error(ErrorCode::InvalidConfig, "face_weight must lie in [0, 1]");
  }
};

inline void to_json(ordered_json& j, const MetricConfig& c) {
  j = ordered_json{{"clip_sim_min", c.clip_sim_min},
                   {"dino_sim_min", c.dino_sim_min},
                   {"siglip_min", c.siglip_min},
                   {"videoclip_min", c.videoclip_min},
                   {"describability_min", c.describability_min},
                   {"motion_lo", c.motion_lo},
                   {"motion_hi", c.motion_hi},
                   {"softmax_temperature", c.softmax_temperature},
                   {"cp_entropy_threshold", c.cp_entropy_threshold},
                   {"coherence_bins", c.coherence_bins},
                   {"recall_conf_min", c.recall_conf_min},
                   {"max_window_frames", c.max_window_frames},
                   {"face_weight", c.face_weight},
                   {"pose_vis_min", c.pose_vis_min}};
}

/// Applies any keys present in `j` on top of `c`; unknown keys are an error.
template <typename Json>
MetricConfig apply_overrides(MetricConfig c, const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "metric overrides must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "clip_sim_min") c.clip_sim_min = v.template get<double>();
    else if (k == "dino_sim_min") c.dino_sim_min = v.template get<double>();
    else if (k == "siglip_min") c.siglip_min = v.template get<double>();
    else if (k == "videoclip_min") c.videoclip_min = v.template get<double>();
    else if (k == "describability_min") c.describability_min = v.template get<double>();
    else if (k == "motion_lo") c.motion_lo = v.template get<double>();
    else if (k == "motion_hi") c.motion_hi = v.template get<double>();
    else if (k == "softmax_temperature") c.softmax_temperature = v.template get<double>();
    else if (k == "cp_entropy_threshold") c.cp_entropy_threshold = v.template get<double>();
    else if (k == "coherence_bins") c.coherence_bins = v.template get<int>();
    else if (k == "recall_conf_min") c.recall_conf_min = v.template get<double>();
    else if (k == "max_window_frames") c.max_window_frames = v.template get<std::int64_t>();
    else if (k == "face_weight") c.face_weight = v.template get<double>();
    else if (k == "pose_vis_min") c.pose_vis_min = v.template get<double>();
    else throw Error(ErrorCode::InvalidConfig, "unknown metric key '" + k + "'");
  }
  c.validate();
  return c;
}

}  // namespace cinebench
