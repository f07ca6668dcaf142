#pragma once

// Deterministic synthetic inputs: keypoints, embeddings, storylines with
// subject tracks, and a complete on-disk corpus of stub bundles.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "cinebench/core/bundle.hpp"
#include "cinebench/core/manifest.hpp"
#include "cinebench/curation/curation.hpp"
#include "cinebench/pose/procrustes.hpp"

namespace synth {

using namespace cinebench;
namespace fs = std::filesystem;

struct Rng {
  explicit Rng(std::uint64_t seed) : g(seed) {}
  double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
  long integer(long a, long b) { return std::uniform_int_distribution<long>(a, b)(g); }
  double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(g); }
  bool chance(double p) { return uni(0.0, 1.0) < p; }
  std::mt19937_64 g;
};

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("cinebench-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

inline std::vector<float> random_vector(Rng& r, std::size_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(r.normal());
  return v;
}

inline std::vector<float> jitter(Rng& r, const std::vector<float>& base, double sd) {
  std::vector<float> v(base);
  for (auto& x : v) x = static_cast<float>(x + r.normal(sd));
  return v;
}

inline pose::KeypointSet random_pose(Rng& r, std::size_t joints, double spread = 1.0) {
  pose::KeypointSet k;
  for (std::size_t j = 0; j < joints; ++j) {
    k.points.push_back({r.uni(-spread, spread), r.uni(-spread, spread)});
    k.visibility.push_back(1.0);
  }
  return k;
}

/// Rotation by theta, uniform scale s, then translation (tx, ty).
inline pose::KeypointSet similarity_transform(const pose::KeypointSet& k, double theta, double s, double tx, double ty) {
  pose::KeypointSet out = k;
  const double c = std::cos(theta), sn = std::sin(theta);
  for (auto& p : out.points) {
    const double x = p.x, y = p.y;
    p = {s * (c * x - sn * y) + tx, s * (sn * x + c * y) + ty};
  }
  return out;
}

inline void append_pose(std::vector<float>& data, const pose::KeypointSet& k) {
  for (std::size_t j = 0; j < k.points.size(); ++j) {
    data.push_back(static_cast<float>(k.points[j].x));
    data.push_back(static_cast<float>(k.points[j].y));
    data.push_back(static_cast<float>(k.visibility[j]));
  }
}

inline ShotRecord shot(const std::string& clip, const std::string& source, std::int64_t start, std::int64_t end,
                       const std::string& caption = "") {
  ShotRecord s;
  s.clip_id = clip;
  s.source_id = source;
  s.start_frame = start;
  s.end_frame = end;
  s.fps = {24, 1};
  s.caption = caption;
  return s;
}

// --- storylines with subject tracks (in memory) --------------------------------

struct TrackedStoryline {
  StorylineSequence storyline;
  std::vector<curation::SubjectTrack> tracks;
};

/// Up to `max_shots` shots, drawn from one or two source videos, with a few
/// subjects appearing at random frames. Identity embeddings are noisy copies
/// of a per-subject base so some fall below the similarity threshold.
inline TrackedStoryline random_tracked_storyline(Rng& r, std::size_t max_shots, const std::string& id) {
  TrackedStoryline t;
  t.storyline.sequence_id = id;
  const auto n = static_cast<std::size_t>(r.integer(2, static_cast<long>(max_shots)));
  std::int64_t cursor[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const int src = r.chance(0.25) ? 1 : 0;
    const auto gap = r.integer(0, 40);
    const auto len = r.integer(4, 60);
    const auto start = cursor[src] + gap;
    cursor[src] = start + len;
    t.storyline.shots.push_back(shot(id + "_c" + std::to_string(i + 1), id + (src ? "_srcB" : "_srcA"), start, start + len));
  }
  const auto subjects = r.integer(1, 3);
  for (long s = 0; s < subjects; ++s) {
    curation::SubjectTrack track;
    track.identity_id = "id" + std::to_string(s);
    const auto base = random_vector(r, 8);
    for (const auto& sh : t.storyline.shots) {
      if (!r.chance(0.6)) continue;
      const auto count = r.integer(1, 3);
      for (long a = 0; a < count; ++a) {
        curation::Appearance app;
        app.clip_id = sh.clip_id;
        app.frame = sh.start_frame + r.integer(0, sh.length() - 1);
        app.box = {r.uni(0, 0.5), r.uni(0, 0.5), r.uni(0.1, 0.5), r.uni(0.1, 0.5)};
        app.identity_emb = jitter(r, base, r.uni(0.05, 1.2));
        if (r.chance(0.7)) app.keypoints = random_pose(r, 10);
        track.appearances.push_back(std::move(app));
      }
    }
    if (!track.appearances.empty()) t.tracks.push_back(std::move(track));
  }
  return t;
}

// --- on-disk corpus -------------------------------------------------------------

inline constexpr std::size_t kJoints = 17;
inline constexpr std::size_t kSubjectDim = 16;
inline constexpr std::size_t kFaceDim = 8;

struct CorpusPaths {
  fs::path root;
  fs::path storylines() const { return root / "storylines.jsonl"; }
  fs::path bundles() const { return root / "bundles"; }
  fs::path method_ref() const { return root / "method_ref.jsonl"; }
  fs::path method_free() const { return root / "method_free.jsonl"; }
  fs::path gallery() const { return root / "gallery.cbf1"; }
  fs::path ref_coherence() const { return root / "ref_coherence.cbf1"; }
  fs::path mdvl_results() const { return root / "mdvl_results.jsonl"; }
};

inline Tensor tensor(std::vector<std::int64_t> shape, std::vector<float> data) { return Tensor{std::move(shape), std::move(data)}; }

namespace detail {

/// Bundle of a generated multi-shot video carrying the tensors of both tracks.
inline FeatureBundle generated_video(Rng& r, const StorylineSequence& seq, const std::vector<float>& subject_base,
                                     const std::vector<float>& face_base, const pose::KeypointSet& pose_base,
                                     bool static_motion, bool copies_reference, const std::vector<float>& ref_subject) {
  FeatureBundle b;
  b.clip_id = seq.shots.front().source_id;
  b.meta = ordered_json{{"generator", "synth"}};
  const auto n_shots = static_cast<std::int64_t>(seq.shots.size());
  const auto frames = seq.shots.back().end_frame;

  std::vector<float> text_sim;
  for (std::int64_t i = 0; i < n_shots; ++i) text_sim.push_back(static_cast<float>(r.uni(0.18, 0.34)));
  b.tensors["text_sim"] = tensor({n_shots}, text_sim);

  std::vector<float> boundaries;
  for (std::int64_t i = 1; i < n_shots; ++i) {
    if (r.chance(0.1)) continue;  // missed cut
    boundaries.push_back(static_cast<float>(seq.shots[static_cast<std::size_t>(i)].start_frame + r.integer(-3, 3)));
  }
  if (r.chance(0.2)) boundaries.push_back(static_cast<float>(r.integer(1, frames - 1)));  // spurious cut
  std::sort(boundaries.begin(), boundaries.end());
  b.tensors["boundaries"] = tensor({static_cast<std::int64_t>(boundaries.size())}, boundaries);

  const auto bg_base = random_vector(r, kSubjectDim);
  std::vector<float> bg;
  for (std::int64_t i = 0; i < n_shots; ++i) {
    const auto v = jitter(r, bg_base, 0.5);
    bg.insert(bg.end(), v.begin(), v.end());
  }
  b.tensors["background_emb"] = tensor({n_shots, static_cast<std::int64_t>(kSubjectDim)}, bg);

  std::vector<float> flow;
  for (std::int64_t f = 0; f < frames; ++f) flow.push_back(static_cast<float>(static_motion ? r.uni(0.0, 0.3) : r.uni(2.0, 20.0)));
  b.tensors["flow_mag"] = tensor({frames}, flow);

  std::vector<float> coherence;
  for (std::int64_t i = 1; i < n_shots; ++i) coherence.push_back(static_cast<float>(r.uni(-0.2, 0.95)));
  b.tensors["coherence"] = tensor({n_shots - 1}, coherence);

  std::vector<float> sub, face, kp, det;
  for (std::int64_t f = 0; f < frames; ++f) {
    const bool absent = f % 11 == 5;
    std::vector<float> s = copies_reference ? ref_subject : jitter(r, subject_base, 0.35);
    std::vector<float> fc = jitter(r, face_base, 0.3);
    if (absent) {
      std::fill(s.begin(), s.end(), 0.0f);
      std::fill(fc.begin(), fc.end(), 0.0f);
    } else if (f % 7 == 3) {
      std::fill(fc.begin(), fc.end(), 0.0f);  // face not visible
    }
    sub.insert(sub.end(), s.begin(), s.end());
    face.insert(face.end(), fc.begin(), fc.end());
    auto p = similarity_transform(pose_base, r.uni(-0.4, 0.4), r.uni(0.5, 2.0), r.uni(-3, 3), r.uni(-3, 3));
    for (std::size_t j = 0; j < p.points.size(); ++j) {
      p.points[j].x += r.normal(0.05);
      p.points[j].y += r.normal(0.05);
      p.visibility[j] = r.chance(0.1) ? 0.1 : 0.95;
    }
    append_pose(kp, p);
    if (r.chance(0.8)) {
      const float row[7] = {static_cast<float>(f), 0.0f, static_cast<float>(r.uni(0.2, 1.0)), 0.2f, 0.2f, 0.4f, 0.5f};
      det.insert(det.end(), row, row + 7);
    }
    if (r.chance(0.1)) {
      const float row[7] = {static_cast<float>(f), 2.0f, 0.9f, 0.6f, 0.1f, 0.2f, 0.2f};
      det.insert(det.end(), row, row + 7);
    }
  }
  b.tensors["subject_emb"] = tensor({frames, static_cast<std::int64_t>(kSubjectDim)}, sub);
  b.tensors["face_emb"] = tensor({frames, static_cast<std::int64_t>(kFaceDim)}, face);
  b.tensors["keypoints"] = tensor({frames, static_cast<std::int64_t>(kJoints), 3}, kp);
  b.tensors["detections"] = tensor({static_cast<std::int64_t>(det.size() / 7), 7}, det);
  return b;
}

}  // namespace detail

/// Writes a complete corpus under `root`:
///   storylines.jsonl + per-clip bundles for curation,
///   method_ref.jsonl / method_free.jsonl (sequences_per_method each) with one
///   bundle per generated video, reference bundles, a distractor gallery, a
///   reference coherence histogram and canned judge results.
inline CorpusPaths write_corpus(const fs::path& root, std::uint64_t seed, int sequences_per_method = 10) {
  Rng r(seed);
  CorpusPaths paths{root};
  fs::create_directories(paths.bundles());

  // Storylines of consecutive clips cut from one film each.
  std::vector<StorylineSequence> storylines;
  for (int s = 0; s < 4; ++s) {
    StorylineSequence st;
    st.sequence_id = "film" + std::to_string(s + 1);
    const std::string source = "film" + std::to_string(s + 1);
    std::vector<std::vector<float>> identities = {random_vector(r, kSubjectDim), random_vector(r, kSubjectDim)};
    std::int64_t cursor = 0;
    for (int c = 0; c < 6; ++c) {
      const auto len = r.integer(30, 70);
      const auto start = cursor + r.integer(0, 10);
      cursor = start + len;
      auto sh = shot(source + "_c" + std::to_string(c + 1), source, start, start + len, "shot " + std::to_string(c + 1));
      st.shots.push_back(sh);

      FeatureBundle b;
      b.clip_id = sh.clip_id;
      std::vector<float> q = {0.9f, 0.9f, 5.0f, 0.3f, 0.05f, 10.0f};
      if (r.chance(0.15)) {
        const float low[6] = {0.79f, 0.79f, 3.99f, 0.19f, 0.019f, 0.1f};
        const auto k = static_cast<std::size_t>(r.integer(0, 5));
        q[k] = low[k];
      }
      b.tensors["quality"] = tensor({6}, q);
      std::vector<float> ids, kp;
      std::int64_t rows = 0;
      for (std::size_t id = 0; id < identities.size(); ++id) {
        if (!r.chance(0.6)) continue;
        const auto count = r.integer(1, 3);
        for (long a = 0; a < count; ++a) {
          ids.push_back(static_cast<float>(id));
          ids.push_back(static_cast<float>(r.integer(0, len - 1)));
          for (float v : {0.1f, 0.1f, 0.3f, 0.6f}) ids.push_back(v);
          const auto e = jitter(r, identities[id], 0.3);
          ids.insert(ids.end(), e.begin(), e.end());
          ++rows;
        }
      }
      if (rows > 0) b.tensors["identities"] = tensor({rows, static_cast<std::int64_t>(6 + kSubjectDim)}, ids);
      for (std::int64_t f = 0; f < len; ++f) append_pose(kp, random_pose(r, kJoints));
      b.tensors["keypoints"] = tensor({len, static_cast<std::int64_t>(kJoints), 3}, kp);
      save_bundle(paths.bundles(), b);
    }
    storylines.push_back(std::move(st));
  }
  write_file_atomic(paths.storylines(), serialize_manifest(storylines));

  // Generated videos for two methods.
  std::string judged;
  for (int m = 0; m < 2; ++m) {
    const bool with_ref = m == 0;
    std::vector<StorylineSequence> seqs;
    for (int i = 0; i < sequences_per_method; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "%s_s%02d", with_ref ? "ref" : "free", i + 1);
      StorylineSequence seq;
      seq.sequence_id = id;
      seq.global_narrative = "A courier crosses the city at night.";
      const auto n_shots = r.integer(2, 4);
      std::int64_t cursor = 0;
      for (long k = 0; k < n_shots; ++k) {
        const auto len = r.integer(30, 40);
        seq.shots.push_back(shot(std::string(id) + "_c" + std::to_string(k + 1), std::string("gen_") + id, cursor,
                                 cursor + len, "caption " + std::to_string(k + 1)));
        seq.shot_prompts.push_back("The courier, shot " + std::to_string(k + 1) + ".");
        cursor += len;
      }
      const auto subject_base = random_vector(r, kSubjectDim);
      const auto face_base = random_vector(r, kFaceDim);
      const auto pose_base = random_pose(r, kJoints);
      const auto ref_subject = jitter(r, subject_base, 0.1);
      if (with_ref) {
        seq.reference_clip_id = std::string("refimg_") + id;
        FeatureBundle ref;
        ref.clip_id = *seq.reference_clip_id;
        ref.tensors["subject_emb"] = tensor({1, static_cast<std::int64_t>(kSubjectDim)}, ref_subject);
        ref.tensors["face_emb"] = tensor({1, static_cast<std::int64_t>(kFaceDim)}, jitter(r, face_base, 0.1));
        std::vector<float> kp;
        append_pose(kp, pose_base);
        ref.tensors["keypoints"] = tensor({1, static_cast<std::int64_t>(kJoints), 3}, kp);
        save_bundle(paths.bundles(), ref);
      }
      const bool static_motion = i % 7 == 3;
      const bool copies = with_ref && i % 5 == 2;
      save_bundle(paths.bundles(),
                  detail::generated_video(r, seq, subject_base, face_base, pose_base, static_motion, copies, ref_subject));
      seqs.push_back(std::move(seq));

      ordered_json j;
      j["sequence_id"] = id;
      if (i % 9 == 8) {
        j["status"] = "failed";
        j["code"] = "MALFORMED";
      } else {
        j["status"] = "ok";
        j["scene_logic"] = r.integer(2, 5);
        j["casting_logic"] = r.integer(2, 5);
        j["act_logic"] = r.integer(1, 5);
        j["spat_logic"] = r.integer(2, 4);
        j["reasoning"] = "consistent lighting";
      }
      judged += j.dump() + "\n";
    }
    write_file_atomic(with_ref ? paths.method_ref() : paths.method_free(), serialize_manifest(seqs));
  }
  write_file_atomic(paths.mdvl_results(), judged);

  FeatureBundle gallery;
  gallery.clip_id = "gallery";
  std::vector<float> g;
  for (int i = 0; i < 9; ++i) {
    const auto v = random_vector(r, kSubjectDim);
    g.insert(g.end(), v.begin(), v.end());
  }
  gallery.tensors["gallery"] = tensor({9, static_cast<std::int64_t>(kSubjectDim)}, g);
  write_file_atomic(paths.gallery(), write_feature_bundle(gallery));

  FeatureBundle coh;
  coh.clip_id = "ref_coherence";
  std::vector<float> masses;
  for (int i = 0; i < 20; ++i) masses.push_back(static_cast<float>(i < 6 ? 0.2 : r.uni(0.5, 3.0)));
  coh.tensors["histogram"] = tensor({20}, masses);
  write_file_atomic(paths.ref_coherence(), write_feature_bundle(coh));
  return paths;
}

}  // namespace synth
