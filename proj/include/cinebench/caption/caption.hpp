#pragma once

// Progressive captioning: per-shot captioning and rewriting, then a joint
// multi-shot refinement whose output must line up with the physical shots.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "cinebench/caption/chat.hpp"
#include "cinebench/caption/gate.hpp"
#include "cinebench/caption/templates.hpp"
#include "cinebench/core/types.hpp"

namespace cinebench::caption {

inline constexpr std::string_view kCaptionPrefix = "cap:";
inline constexpr std::string_view kRewritePrefix = "rw:";
inline constexpr std::string_view kAggregatePrefix = "agg:";
inline constexpr std::size_t kShotAttachmentFrames = 4;

/// Frames at the centers of `count` equal slices of the shot.
inline std::vector<chat::FrameRef> uniform_frames(const ShotRecord& shot, std::size_t count) {
  std::vector<chat::FrameRef> out;
  const auto len = shot.length();
  for (std::size_t k = 0; k < count; ++k) {
    const auto f = shot.start_frame + (static_cast<std::int64_t>(2 * k + 1) * len) / static_cast<std::int64_t>(2 * count);
    if (out.empty() || out.back().frame != f) out.push_back({shot.clip_id, f});
  }
  return out;
}

inline chat::ChatRequest build_single_shot_request(const ShotRecord& shot) {
  chat::ChatRequest r;
  r.request_id = std::string(kCaptionPrefix) + shot.clip_id;
  r.system_text = prompts::kSingleShotSystem;
  r.user_text = prompts::kSingleShotUser;
  r.attachments = uniform_frames(shot, kShotAttachmentFrames);
  r.expected_schema = chat::ResponseSchema::FreeText;
  return r;
}

inline chat::ChatRequest build_rewrite_request(const std::string& clip_id, std::string_view caption) {
  if (chat::trim(caption).empty()) throw Error(ErrorCode::EmptyCaption, "nothing to rewrite for '" + clip_id + "'");
  chat::ChatRequest r;
  r.request_id = std::string(kRewritePrefix) + clip_id;
  r.system_text = prompts::kRewriteSystem;
  r.user_text = std::string(prompts::kRewriteUser) + "\n\n" + std::string(chat::trim(caption));
  r.expected_schema = chat::ResponseSchema::RewriteJson;
  return r;
}

inline constexpr std::string_view kRewriteField = "rewritten description";

inline std::string parse_rewrite(std::string_view response) {
  const auto j = chat::parse_json_object(response);
  auto it = j.find(std::string(kRewriteField));
  if (it == j.end()) throw Error(ErrorCode::MissingField, "response lacks \"rewritten description\"");
  if (!it->is_string()) throw Error(ErrorCode::Malformed, "\"rewritten description\" is not a string");
  return std::string(chat::trim(it->get<std::string>()));
}

namespace detail {

inline std::string single_line(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : chat::trim(s)) {
    if (c == '\n' || c == '\r' || c == '\t' || c == ' ') {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

/// "Shot 1: ...\nShot 2: ..." with each caption flattened to one line.
inline std::string render_shot_captions(const std::vector<std::string>& captions) {
  std::string out;
  for (std::size_t i = 0; i < captions.size(); ++i) {
    if (i) out += '\n';
    out += "Shot " + std::to_string(i + 1) + ": " + detail::single_line(captions[i]);
  }
  return out;
}

inline chat::ChatRequest build_aggregation_request(const StorylineSequence& seq, const std::vector<std::string>& initial) {
  if (initial.size() != seq.shots.size())
    throw Error(ErrorCode::CountMismatch, std::to_string(initial.size()) + " captions for " +
                                              std::to_string(seq.shots.size()) + " shots");
  chat::ChatRequest r;
  r.request_id = std::string(kAggregatePrefix) + seq.sequence_id;
  r.system_text = prompts::kAggregationSystem;
  r.user_text = std::string(prompts::kAggregationUser) + "\n\n" + render_shot_captions(initial);
  for (const auto& s : seq.shots) r.attachments.push_back({s.clip_id, s.start_frame + s.length() / 2});
  r.expected_schema = chat::ResponseSchema::ShotList;
  return r;
}

/// Parses "Shot k: caption" lines. Lines before the first entry are ignored,
/// continuation lines are joined with a space, and a blank line ends the
/// current entry. Indices must run 1..n without gaps or repeats.
inline std::vector<std::string> parse_shot_captions(std::string_view text, std::size_t n_shots) {
  if (n_shots == 0) throw Error(ErrorCode::CountMismatch, "n_shots must be >= 1");
  struct Entry {
    long index;
    std::string caption;
  };
  std::vector<Entry> entries;
  bool open = false;
  const auto body = chat::strip_fences(text);
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    const auto line = chat::trim(body.substr(pos, nl - pos));
    pos = nl + 1;

    // "Shot" <ws> digits <ws> ":" rest
    bool is_entry = false;
    long index = 0;
    std::string_view rest;
    if (line.size() > 4 && line.substr(0, 4) == "Shot") {
      std::size_t i = 4;
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const auto digits = i;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) index = index * 10 + (line[i++] - '0');
      if (i > digits && i - digits < 9) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i < line.size() && line[i] == ':') {
          is_entry = true;
          rest = chat::trim(line.substr(i + 1));
        }
      }
    }
    if (is_entry) {
      entries.push_back({index, std::string(rest)});
      open = true;
    } else if (line.empty()) {
      open = false;
    } else if (open) {
      auto& c = entries.back().caption;
      if (!c.empty()) c += ' ';
      c += line;
    }
  }

  for (std::size_t a = 0; a < entries.size(); ++a) {
    for (std::size_t b = a + 1; b < entries.size(); ++b) {
      if (entries[a].index == entries[b].index)
        throw Error(ErrorCode::DuplicateIndex, "Shot " + std::to_string(entries[a].index) + " appears twice");
    }
  }
  for (std::size_t a = 1; a < entries.size(); ++a) {
    if (entries[a].index < entries[a - 1].index) throw Error(ErrorCode::OutOfOrder, "shot indices are not in order");
  }
  if (entries.size() != n_shots)
    throw Error(ErrorCode::CountMismatch, std::to_string(entries.size()) + " captions for " + std::to_string(n_shots) + " shots");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].index != static_cast<long>(k + 1))
      throw Error(ErrorCode::CountMismatch, "missing Shot " + std::to_string(k + 1));
    if (entries[k].caption.empty()) throw Error(ErrorCode::EmptyCaption, "Shot " + std::to_string(k + 1) + " is empty");
    out.push_back(std::move(entries[k].caption));
  }
  return out;
}

}  // namespace cinebench::caption
