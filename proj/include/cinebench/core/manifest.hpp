#pragma once

// Line-delimited manifest records. One JSON object per line, each carrying
// "schema_version". Known fields map onto the domain types; anything else is
// kept in `extra` and written back in its original order.

#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cinebench/core/types.hpp"

namespace cinebench {

inline constexpr int kManifestSchemaVersion = 1;

struct ManifestIssue {
  std::size_t line = 0;  // 1-based
  ErrorCode code = ErrorCode::Parse;
  std::string message;
};

struct ManifestParseResult {
  std::vector<StorylineSequence> sequences;
  std::vector<ManifestIssue> issues;
};

namespace detail {

inline Rational parse_fps(const ordered_json& v) {
  if (v.is_number_integer()) return Rational{v.get<std::int64_t>(), 1};
  if (v.is_number_float()) {
    // Decimal frame rates like 29.97 are stored as x/1000.
    const double d = v.get<double>();
    return Rational{static_cast<std::int64_t>(std::llround(d * 1000.0)), 1000}.reduced();
  }
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto slash = s.find('/');
    Rational r;
    auto parse = [&](std::string_view part, std::int64_t& out) {
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
      if (ec != std::errc() || p != part.data() + part.size()) throw Error(ErrorCode::Parse, "bad fps '" + s + "'");
    };
    if (slash == std::string::npos) {
      parse(s, r.num);
    } else {
      parse(std::string_view(s).substr(0, slash), r.num);
      parse(std::string_view(s).substr(slash + 1), r.den);
    }
    return r;
  }
  throw Error(ErrorCode::Parse, "fps must be an integer or a \"num/den\" string");
}

inline ordered_json fps_to_json(const Rational& r) {
  if (r.den == 1) return r.num;
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

template <typename T>
T require(const ordered_json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Parse, std::string("field '") + key + "' has the wrong type");
  }
}

inline ShotRecord shot_from_json(const ordered_json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "shot must be an object");
  ShotRecord s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "clip_id") s.clip_id = require<std::string>(j, "clip_id");
    else if (k == "source_id") s.source_id = require<std::string>(j, "source_id");
    else if (k == "start_frame") s.start_frame = require<std::int64_t>(j, "start_frame");
    else if (k == "end_frame") s.end_frame = require<std::int64_t>(j, "end_frame");
    else if (k == "fps") s.fps = parse_fps(it.value());
    else if (k == "caption") s.caption = require<std::string>(j, "caption");
    else if (k == "caption_rewritten") {
      if (!it.value().is_null()) s.caption_rewritten = require<std::string>(j, "caption_rewritten");
    } else s.extra[k] = it.value();
  }
  for (const char* key : {"clip_id", "source_id", "start_frame", "end_frame", "fps"}) {
    if (!j.contains(key)) throw Error(ErrorCode::Parse, std::string("shot missing field '") + key + "'");
  }
  return s;
}

inline ordered_json shot_to_json(const ShotRecord& s) {
  ordered_json j;
  j["clip_id"] = s.clip_id;
  j["source_id"] = s.source_id;
  j["start_frame"] = s.start_frame;
  j["end_frame"] = s.end_frame;
  j["fps"] = fps_to_json(s.fps);
  j["caption"] = s.caption;
  if (s.caption_rewritten) j["caption_rewritten"] = *s.caption_rewritten;
  for (auto it = s.extra.begin(); it != s.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

}  // namespace detail

/// Structural problems of a single sequence (no bundle access).
inline std::vector<std::string> sequence_integrity_issues(const StorylineSequence& seq) {
  std::vector<std::string> out;
  if (seq.sequence_id.empty()) out.emplace_back("empty sequence_id");
  if (seq.shots.empty()) out.emplace_back("sequence has no shots");
  for (const auto& s : seq.shots) {
    if (s.start_frame < 0) out.push_back("shot " + s.clip_id + ": negative start_frame");
    if (s.end_frame <= s.start_frame) out.push_back("shot " + s.clip_id + ": end_frame <= start_frame");
    if (!s.fps.positive()) out.push_back("shot " + s.clip_id + ": fps must be positive");
  }
  for (std::size_t i = 0; i + 1 < seq.shots.size(); ++i) {
    const auto& a = seq.shots[i];
    const auto& b = seq.shots[i + 1];
    if (a.source_id == b.source_id && a.end_frame > b.start_frame)
      out.push_back("shots " + a.clip_id + " and " + b.clip_id + " are not temporally ordered");
  }
  if (!seq.shot_prompts.empty() && seq.shot_prompts.size() != seq.shots.size())
    out.push_back("shot_prompts count " + std::to_string(seq.shot_prompts.size()) + " != shot count " +
                  std::to_string(seq.shots.size()));
  return out;
}

inline StorylineSequence sequence_from_json(const ordered_json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "record must be an object");
  auto ver = j.find("schema_version");
  if (ver == j.end()) throw Error(ErrorCode::Parse, "missing field 'schema_version'");
  if (!ver->is_number_integer() || ver->get<int>() != kManifestSchemaVersion)
    throw Error(ErrorCode::Parse, "unsupported schema_version");
  StorylineSequence seq;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "schema_version") continue;
    if (k == "sequence_id") seq.sequence_id = detail::require<std::string>(j, "sequence_id");
    else if (k == "shots") {
      if (!v.is_array()) throw Error(ErrorCode::Parse, "'shots' must be an array");
      for (const auto& s : v) seq.shots.push_back(detail::shot_from_json(s));
    } else if (k == "global_narrative") {
      if (!v.is_null()) seq.global_narrative = detail::require<std::string>(j, "global_narrative");
    } else if (k == "shot_prompts") seq.shot_prompts = detail::require<std::vector<std::string>>(j, "shot_prompts");
    else if (k == "reference_clip_id") {
      if (!v.is_null()) seq.reference_clip_id = detail::require<std::string>(j, "reference_clip_id");
    } else if (k == "target_class") {
      if (!v.is_null()) seq.target_class = detail::require<int>(j, "target_class");
    } else seq.extra[k] = v;
  }
  if (!j.contains("sequence_id")) throw Error(ErrorCode::Parse, "missing field 'sequence_id'");
  if (!j.contains("shots")) throw Error(ErrorCode::Parse, "missing field 'shots'");
  return seq;
}

inline ordered_json sequence_to_json(const StorylineSequence& seq) {
  ordered_json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["sequence_id"] = seq.sequence_id;
  ordered_json shots = ordered_json::array();
  for (const auto& s : seq.shots) shots.push_back(detail::shot_to_json(s));
  j["shots"] = std::move(shots);
  if (seq.global_narrative) j["global_narrative"] = *seq.global_narrative;
  if (!seq.shot_prompts.empty()) j["shot_prompts"] = seq.shot_prompts;
  if (seq.reference_clip_id) j["reference_clip_id"] = *seq.reference_clip_id;
  if (seq.target_class) j["target_class"] = *seq.target_class;
  for (auto it = seq.extra.begin(); it != seq.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

/// Parses every line, collecting issues instead of stopping at the first one.
/// Sequences with issues are left out of the result.
inline ManifestParseResult parse_manifest_lenient(std::string_view text) {
  ManifestParseResult result;
  // Overlapping windows list the same clip in several sequences; that is a
  // repeat only when source and span agree.
  std::map<std::string, ShotRecord> seen_clips;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    StorylineSequence seq;
    try {
      seq = sequence_from_json(ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      result.issues.push_back({line_no, ErrorCode::Parse, e.what()});
      continue;
    } catch (const Error& e) {
      result.issues.push_back({line_no, e.code(), e.what()});
      continue;
    }
    auto problems = sequence_integrity_issues(seq);
    std::set<std::string> in_seq;
    for (const auto& s : seq.shots) {
      if (!in_seq.insert(s.clip_id).second) {
        problems.push_back("duplicate clip_id '" + s.clip_id + "'");
        continue;
      }
      const auto [it, fresh] = seen_clips.emplace(s.clip_id, s);
      const auto& o = it->second;
      if (!fresh && (o.source_id != s.source_id || o.start_frame != s.start_frame || o.end_frame != s.end_frame ||
                     o.fps != s.fps))
        problems.push_back("duplicate clip_id '" + s.clip_id + "' with a different span");
    }
    if (!problems.empty()) {
      for (auto& p : problems) result.issues.push_back({line_no, ErrorCode::Integrity, std::move(p)});
      continue;
    }
    result.sequences.push_back(std::move(seq));
  }
  return result;
}

/// Strict variant: the first issue is raised with its line number.
inline std::vector<StorylineSequence> parse_manifest(std::string_view text) {
  auto r = parse_manifest_lenient(text);
  if (!r.issues.empty()) {
    const auto& i = r.issues.front();
    throw Error(i.code, "line " + std::to_string(i.line) + ": " + i.message);
  }
  return std::move(r.sequences);
}

inline std::string serialize_manifest(const std::vector<StorylineSequence>& seqs) {
  std::string out;
  for (const auto& s : seqs) {
    out += sequence_to_json(s).dump();
    out += '\n';
  }
  return out;
}

// --- S2V pair records -------------------------------------------------------

inline ordered_json pair_to_json(const S2VPair& p) {
  ordered_json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["record"] = "s2v_pair";
  j["pair_id"] = p.pair_id;
  j["reference_clip_id"] = p.reference_clip_id;
  j["reference_frame"] = p.reference_frame;
  j["reference_box"] = {p.reference_box.x, p.reference_box.y, p.reference_box.w, p.reference_box.h};
  j["target_sequence_id"] = p.target_sequence_id;
  j["intervening_shots"] = p.intervening_shots;
  j["frame_separation"] = p.frame_separation;
  j["identity_similarity"] = p.identity_similarity;
  j["needs_review"] = p.needs_review;
  return j;
}

inline S2VPair pair_from_json(const ordered_json& j) {
  using detail::require;
  if (require<int>(j, "schema_version") != kManifestSchemaVersion)
    throw Error(ErrorCode::Parse, "unsupported schema_version");
  if (require<std::string>(j, "record") != "s2v_pair") throw Error(ErrorCode::Parse, "not an s2v_pair record");
  S2VPair p;
  p.pair_id = require<std::string>(j, "pair_id");
  p.reference_clip_id = require<std::string>(j, "reference_clip_id");
  p.reference_frame = require<std::int64_t>(j, "reference_frame");
  const auto box = require<std::vector<double>>(j, "reference_box");
  if (box.size() != 4) throw Error(ErrorCode::Parse, "reference_box must have 4 entries");
  p.reference_box = {box[0], box[1], box[2], box[3]};
  p.target_sequence_id = require<std::string>(j, "target_sequence_id");
  p.intervening_shots = require<std::int64_t>(j, "intervening_shots");
  p.frame_separation = require<std::int64_t>(j, "frame_separation");
  p.identity_similarity = require<double>(j, "identity_similarity");
  if (j.contains("needs_review")) p.needs_review = require<bool>(j, "needs_review");
  return p;
}

}  // namespace cinebench
