#pragma once

// Per-sequence metric suites for both tracks. Each generated video is one
// bundle keyed by the shots' source_id; frame-level tensors are indexed by
// video frame (or through `frame_index`).

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cinebench/core/validate.hpp"
#include "cinebench/mdvl/mdvl.hpp"
#include "cinebench/pose/procrustes.hpp"
#include "cinebench/similarity/similarity.hpp"
#include "cinebench/temporal/temporal.hpp"

namespace cinebench::scoring {

struct SequenceResult {
  std::string sequence_id;
  std::string method;
  Track track = Track::Narrative;
  bool valid = true;
  std::vector<std::string> findings;  // validation findings when invalid
  std::vector<std::string> notes;     // metrics that could not be computed, with the reason

  // Track 1
  std::optional<double> txt_align;
  std::optional<double> trans_dev;
  std::int64_t trans_misses = 0;
  std::int64_t trans_extras = 0;
  std::optional<double> scene_con;
  std::optional<double> motion;
  std::string gate;  // PASS / STATIC / CHAOTIC
  std::vector<double> coherence;
  std::optional<mdvl::MdvlScores> mdvl;

  // Track 2
  bool external_reference = false;
  std::optional<double> ref_sub_con;
  std::optional<double> inter_sub_con;
  std::optional<double> subj_recall;
  std::optional<double> act_str;
  std::optional<double> acp_var;
  std::optional<double> copy_score;

  friend bool operator==(const SequenceResult&, const SequenceResult&) = default;
};

namespace detail {

inline ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

inline std::optional<double> opt_from(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

/// Rows of a frame-level tensor grouped by the shot whose span contains them.
inline std::vector<std::vector<std::size_t>> rows_per_shot(const StorylineSequence& seq, const FeatureBundle& b,
                                                           std::size_t rows) {
  const auto frames = row_frames(b, 0, rows);
  std::vector<std::vector<std::size_t>> out(seq.shots.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t s = 0; s < seq.shots.size(); ++s) {
      if (frames[r] >= seq.shots[s].start_frame && frames[r] < seq.shots[s].end_frame) {
        out[s].push_back(r);
        break;
      }
    }
  }
  return out;
}

inline std::vector<std::size_t> flatten(const std::vector<std::vector<std::size_t>>& v) {
  std::vector<std::size_t> out;
  for (const auto& x : v) out.insert(out.end(), x.begin(), x.end());
  return out;
}

template <typename F>
void try_metric(SequenceResult& r, const char* name, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    r.notes.push_back(std::string(name) + ": " + std::string(to_string(e.code())));
  }
}

inline std::vector<float> gather_values(const Tensor& t, const std::vector<std::size_t>& rows) {
  std::vector<float> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(t.data[r]);
  return out;
}

}  // namespace detail

inline ordered_json to_json(const SequenceResult& r) {
  ordered_json j;
  j["sequence_id"] = r.sequence_id;
  j["method"] = r.method;
  j["track"] = static_cast<int>(r.track);
  j["status"] = r.valid ? "ok" : "invalid";
  j["findings"] = r.findings;
  j["notes"] = r.notes;
  if (r.track == Track::Narrative) {
    j["txt_align"] = detail::opt(r.txt_align);
    j["trans_dev"] = detail::opt(r.trans_dev);
    j["trans_misses"] = r.trans_misses;
    j["trans_extras"] = r.trans_extras;
    j["scene_con"] = detail::opt(r.scene_con);
    j["motion"] = detail::opt(r.motion);
    j["gate"] = r.gate;
    j["coherence"] = r.coherence;
    if (r.mdvl) {
      j["mdvl"] = ordered_json{{"scene_logic", r.mdvl->scene_logic}, {"casting_logic", r.mdvl->casting_logic},
                               {"act_logic", r.mdvl->act_logic},     {"spat_logic", r.mdvl->spat_logic},
                               {"reasoning", r.mdvl->reasoning}};
    } else {
      j["mdvl"] = nullptr;
    }
  } else {
    j["external_reference"] = r.external_reference;
    j["ref_sub_con"] = detail::opt(r.ref_sub_con);
    j["inter_sub_con"] = detail::opt(r.inter_sub_con);
    j["subj_recall"] = detail::opt(r.subj_recall);
    j["act_str"] = detail::opt(r.act_str);
    j["acp_var"] = detail::opt(r.acp_var);
    j["copy_score"] = detail::opt(r.copy_score);
  }
  return j;
}

inline SequenceResult result_from_json(const ordered_json& j) {
  SequenceResult r;
  try {
    r.sequence_id = j.at("sequence_id").get<std::string>();
    r.method = j.at("method").get<std::string>();
    const int track = j.at("track").get<int>();
    if (track != 1 && track != 2) throw Error(ErrorCode::Parse, "track must be 1 or 2");
    r.track = static_cast<Track>(track);
    r.valid = j.at("status").get<std::string>() == "ok";
    r.findings = j.value("findings", std::vector<std::string>{});
    r.notes = j.value("notes", std::vector<std::string>{});
    if (r.track == Track::Narrative) {
      r.txt_align = detail::opt_from(j, "txt_align");
      r.trans_dev = detail::opt_from(j, "trans_dev");
      r.trans_misses = j.value("trans_misses", std::int64_t{0});
      r.trans_extras = j.value("trans_extras", std::int64_t{0});
      r.scene_con = detail::opt_from(j, "scene_con");
      r.motion = detail::opt_from(j, "motion");
      r.gate = j.value("gate", std::string());
      r.coherence = j.value("coherence", std::vector<double>{});
      if (j.contains("mdvl") && !j.at("mdvl").is_null()) {
        const auto& m = j.at("mdvl");
        r.mdvl = mdvl::MdvlScores{m.at("scene_logic").get<int>(), m.at("casting_logic").get<int>(),
                                  m.at("act_logic").get<int>(), m.at("spat_logic").get<int>(),
                                  m.at("reasoning").get<std::string>()};
      }
    } else {
      r.external_reference = j.value("external_reference", false);
      r.ref_sub_con = detail::opt_from(j, "ref_sub_con");
      r.inter_sub_con = detail::opt_from(j, "inter_sub_con");
      r.subj_recall = detail::opt_from(j, "subj_recall");
      r.act_str = detail::opt_from(j, "act_str");
      r.acp_var = detail::opt_from(j, "acp_var");
      r.copy_score = detail::opt_from(j, "copy_score");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad result record: ") + e.what());
  }
  return r;
}

inline SequenceResult invalid_result(const ValidationReport& v, const std::string& method, Track track) {
  SequenceResult r;
  r.sequence_id = v.sequence_id;
  r.method = method;
  r.track = track;
  r.valid = false;
  for (const auto& f : v.findings) r.findings.push_back(f.render());
  return r;
}

/// Narrative-effectiveness metrics for one generated video.
inline SequenceResult score_track1(const StorylineSequence& seq, const BundleIndex& index, const MetricConfig& cfg,
                                   const std::string& method,
                                   const std::map<std::string, mdvl::MdvlScores>* mdvl_results = nullptr) {
  const auto report = validate_sequence(seq, index, Track::Narrative);
  if (!report.ok()) return invalid_result(report, method, Track::Narrative);

  SequenceResult r;
  r.sequence_id = seq.sequence_id;
  r.method = method;
  r.track = Track::Narrative;
  const FeatureBundle& b = index.at(seq.shots.front().source_id);

  detail::try_metric(r, "txt_align", [&] { r.txt_align = similarity::text_alignment(std::span<const float>(b.find("text_sim")->data)); });

  detail::try_metric(r, "trans_dev", [&] {
    std::vector<std::int64_t> durations;
    for (const auto& s : seq.shots) durations.push_back(s.length());
    const auto expected = temporal::expected_boundaries(durations);
    std::vector<std::int64_t> detected;
    for (float f : b.find("boundaries")->data) detected.push_back(std::llround(f) - seq.shots.front().start_frame);
    std::sort(detected.begin(), detected.end());
    const auto dev = temporal::transition_deviation(expected.frames, detected);
    r.trans_dev = dev.mean_abs_dev;
    r.trans_misses = dev.misses;
    r.trans_extras = dev.extras;
  });

  detail::try_metric(r, "scene_con", [&] {
    r.scene_con = similarity::scene_consistency(similarity::EmbeddingSeries(*b.find("background_emb")));
  });

  detail::try_metric(r, "motion", [&] {
    const Tensor& flow = *b.find("flow_mag");
    const auto rows = detail::flatten(detail::rows_per_shot(seq, b, flow.data.size()));
    const auto values = detail::gather_values(flow, rows);
    r.motion = temporal::action_strength(std::span<const float>(values));
  });
  r.gate = std::string(
      to_string(r.motion ? temporal::motion_gate(*r.motion, cfg.motion_lo, cfg.motion_hi) : temporal::GateVerdict::Static));

  for (float c : b.find("coherence")->data) r.coherence.push_back(static_cast<double>(c));

  if (mdvl_results) {
    if (auto it = mdvl_results->find(seq.sequence_id); it != mdvl_results->end()) r.mdvl = it->second;
  }
  return r;
}

/// Subject-consistency metrics for one generated video. `gallery` holds the
/// distractor embeddings for the copy-paste entropy; without it, or without
/// an external reference, the copy score stays empty.
inline SequenceResult score_track2(const StorylineSequence& seq, const BundleIndex& index, const MetricConfig& cfg,
                                   const std::string& method, const Tensor* gallery = nullptr) {
  const auto report = validate_sequence(seq, index, Track::Subject);
  if (!report.ok()) return invalid_result(report, method, Track::Subject);

  SequenceResult r;
  r.sequence_id = seq.sequence_id;
  r.method = method;
  r.track = Track::Subject;
  const FeatureBundle& b = index.at(seq.shots.front().source_id);
  const Tensor& subject_t = *b.find("subject_emb");
  const similarity::EmbeddingSeries subject(subject_t);
  const Tensor* face_t = b.find("face_emb");
  const std::optional<similarity::EmbeddingSeries> faces =
      face_t ? std::optional(similarity::EmbeddingSeries(*face_t)) : std::nullopt;

  const auto per_shot = detail::rows_per_shot(seq, b, subject.rows());
  const auto all_rows = detail::flatten(per_shot);

  // External reference, or the first usable frame of the first shot as a pseudo-reference.
  std::vector<float> ref_subject, ref_face;
  const FeatureBundle* ref_bundle = nullptr;
  if (seq.reference_clip_id) {
    ref_bundle = &index.at(*seq.reference_clip_id);
    r.external_reference = true;
    const similarity::EmbeddingSeries rs(*ref_bundle->find("subject_emb"));
    ref_subject.assign(rs.row(0).begin(), rs.row(0).end());
    if (const Tensor* rf = ref_bundle->find("face_emb"); rf && rf->dim(0) > 0) {
      const similarity::EmbeddingSeries rfs(*rf);
      ref_face.assign(rfs.row(0).begin(), rfs.row(0).end());
    }
  } else {
    for (auto row : per_shot.front()) {
      if (similarity::is_zero(subject.row(row))) continue;
      ref_subject.assign(subject.row(row).begin(), subject.row(row).end());
      if (faces) ref_face.assign(faces->row(row).begin(), faces->row(row).end());
      break;
    }
  }

  const auto sub_values = subject.gather(all_rows);
  const similarity::EmbeddingSeries frames(sub_values, all_rows.size(), subject.dim());
  std::vector<float> face_values;
  std::optional<similarity::EmbeddingSeries> frame_faces;
  if (faces) {
    face_values = faces->gather(all_rows);
    frame_faces = similarity::EmbeddingSeries(face_values, all_rows.size(), faces->dim());
  }

  detail::try_metric(r, "ref_sub_con", [&] {
    if (ref_subject.empty()) throw Error(ErrorCode::NoUsableFrames, "no reference embedding");
    std::optional<std::span<const float>> rf;
    if (!ref_face.empty()) rf = std::span<const float>(ref_face);
    r.ref_sub_con = similarity::ref_subject_consistency(ref_subject, rf, frames, frame_faces, cfg);
  });

  detail::try_metric(r, "inter_sub_con", [&] {
    std::vector<std::vector<float>> storage, face_storage;
    std::vector<similarity::EmbeddingSeries> shots;
    std::vector<similarity::EmbeddingSeries> shot_faces;
    storage.reserve(per_shot.size());
    face_storage.reserve(per_shot.size());
    for (const auto& rows : per_shot) {
      storage.push_back(subject.gather(rows));
      shots.emplace_back(storage.back(), rows.size(), subject.dim());
      if (faces) {
        face_storage.push_back(faces->gather(rows));
        shot_faces.emplace_back(face_storage.back(), rows.size(), faces->dim());
      }
    }
    r.inter_sub_con = similarity::inter_subject_consistency(
        shots, faces ? std::optional(shot_faces) : std::nullopt, cfg);
  });

  detail::try_metric(r, "subj_recall", [&] {
    std::set<std::int64_t> designated;
    for (const auto& s : seq.shots) {
      designated.insert(s.start_frame + s.length() / 4);
      designated.insert(s.start_frame + (3 * s.length()) / 4);
    }
    r.subj_recall = similarity::subject_recall(similarity::detections_from_tensor(*b.find("detections")), designated,
                                               seq.target_class.value_or(0), cfg.recall_conf_min);
  });

  detail::try_metric(r, "act_str", [&] {
    const Tensor& flow = *b.find("flow_mag");
    const auto rows = detail::flatten(detail::rows_per_shot(seq, b, flow.data.size()));
    const auto values = detail::gather_values(flow, rows);
    r.act_str = temporal::action_strength(std::span<const float>(values));
  });

  if (ref_bundle) {
    detail::try_metric(r, "acp_var", [&] {
      const Tensor& kp = *b.find("keypoints");
      const auto ref_kp = pose::keypoints_from_tensor(*ref_bundle->find("keypoints"), 0);
      const auto kp_rows = detail::flatten(detail::rows_per_shot(seq, b, static_cast<std::size_t>(kp.dim(0))));
      std::vector<pose::KeypointSet> sets;
      for (auto row : kp_rows) sets.push_back(pose::keypoints_from_tensor(kp, row));
      r.acp_var = pose::acp_var(ref_kp, sets, cfg.pose_vis_min).value;
    });
    if (gallery) {
      detail::try_metric(r, "copy_score", [&] {
        if (gallery->rank() != 2 || gallery->dim(0) < 1 || static_cast<std::size_t>(gallery->dim(1)) != ref_subject.size())
          throw Error(ErrorCode::ShapeMismatch, "gallery does not match the subject embedding size");
        std::vector<float> g(ref_subject);
        g.insert(g.end(), gallery->data.begin(), gallery->data.end());
        const similarity::EmbeddingSeries gs(g, static_cast<std::size_t>(gallery->dim(0)) + 1, ref_subject.size());
        similarity::FrameCopyStats stats;
        for (std::size_t i = 0; i < frames.rows(); ++i) {
          if (similarity::is_zero(frames.row(i))) continue;
          const auto e = similarity::copy_paste_entropy(frames.row(i), gs, cfg.softmax_temperature);
          stats.entropies.push_back(e.entropy);
          stats.argmax.push_back(e.argmax);
        }
        r.copy_score = similarity::sequence_copy_score(stats, cfg.cp_entropy_threshold);
      });
    }
  }
  return r;
}

}  // namespace cinebench::scoring
