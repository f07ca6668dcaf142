#pragma once

// Visual-logic judging: which keyframes go into the 2 x N grid, the judge
// prompt, strict parsing of its verdict, and per-axis aggregation.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cinebench/caption/chat.hpp"
#include "cinebench/caption/templates.hpp"
#include "cinebench/core/types.hpp"

namespace cinebench::mdvl {

inline constexpr std::string_view kRequestPrefix = "mdvl:";
inline constexpr std::string_view kNoNarrative = "(none provided)";

struct GridColumn {
  std::string clip_id;
  std::int64_t frame_a = 0;
  std::int64_t frame_b = 0;
  friend bool operator==(const GridColumn&, const GridColumn&) = default;
};

/// Columns are shots in order; rows are two chronological keyframes.
struct GridSpec {
  std::string sequence_id;
  std::vector<GridColumn> columns;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Picks the quarter points floor(L/4) and floor(3L/4) of every shot.
inline GridSpec build_grid_spec(const StorylineSequence& seq) {
  GridSpec g{seq.sequence_id, {}};
  for (const auto& s : seq.shots) {
    const auto len = s.length();
    if (len < 2) throw Error(ErrorCode::ShotTooShort, "shot '" + s.clip_id + "' has fewer than 2 frames");
    g.columns.push_back({s.clip_id, s.start_frame + len / 4, s.start_frame + (3 * len) / 4});
  }
  return g;
}

inline ordered_json to_json(const GridSpec& g) {
  ordered_json cols = ordered_json::array();
  for (const auto& c : g.columns)
    cols.push_back(ordered_json{{"clip_id", c.clip_id}, {"frames", {c.frame_a, c.frame_b}}});
  return ordered_json{{"schema_version", 1}, {"record", "grid_spec"}, {"sequence_id", g.sequence_id},
                      {"rows", 2}, {"columns", std::move(cols)}};
}

namespace detail {

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

}  // namespace detail

/// The judge template with the narrative and per-shot prompts substituted.
/// The first template line becomes the system text, the rest the user text.
inline chat::ChatRequest build_mdvl_prompt(const GridSpec& grid, const std::optional<std::string>& global_narrative,
                                           const std::vector<std::string>& shot_prompts) {
  if (shot_prompts.size() != grid.columns.size())
    throw Error(ErrorCode::CountMismatch, std::to_string(shot_prompts.size()) + " prompts for " +
                                              std::to_string(grid.columns.size()) + " grid columns");
  std::string prompts_text;
  for (std::size_t i = 0; i < shot_prompts.size(); ++i)
    prompts_text += "\nShot " + std::to_string(i + 1) + ": " + std::string(chat::trim(shot_prompts[i]));
  std::string narrative = global_narrative ? std::string(chat::trim(*global_narrative)) : std::string();
  if (narrative.empty()) narrative = kNoNarrative;

  std::string text(prompts::kMdvlTemplate);
  // Shot prompts first so a narrative containing the other placeholder is left alone.
  detail::replace_all(text, "{shot_prompts}", prompts_text);
  detail::replace_all(text, "{global_narrative}", narrative);

  chat::ChatRequest r;
  r.request_id = std::string(kRequestPrefix) + grid.sequence_id;
  const auto nl = text.find('\n');
  r.system_text = text.substr(0, nl);
  r.user_text = text.substr(nl + 1);
  for (const auto& c : grid.columns) {
    r.attachments.push_back({c.clip_id, c.frame_a});
    r.attachments.push_back({c.clip_id, c.frame_b});
  }
  r.expected_schema = chat::ResponseSchema::MdvlJson;
  return r;
}

struct MdvlScores {
  int scene_logic = 0;
  int casting_logic = 0;
  int act_logic = 0;
  int spat_logic = 0;
  std::string reasoning;
  friend bool operator==(const MdvlScores&, const MdvlScores&) = default;
};

inline constexpr std::array<const char*, 4> kScoreKeys = {"scene_logic", "casting_logic", "act_logic", "spat_logic"};

/// Strict: four integer scores in [1, 5] plus a reasoning string.
inline MdvlScores parse_mdvl_response(std::string_view text) {
  const auto j = chat::parse_json_object(text);
  std::array<int, 4> v{};
  for (std::size_t i = 0; i < kScoreKeys.size(); ++i) {
    auto it = j.find(kScoreKeys[i]);
    if (it == j.end()) throw Error(ErrorCode::MissingKey, std::string("missing '") + kScoreKeys[i] + "'");
    if (!it->is_number_integer()) throw Error(ErrorCode::Malformed, std::string("'") + kScoreKeys[i] + "' is not an integer");
    const auto s = it->get<std::int64_t>();
    if (s < 1 || s > 5) throw Error(ErrorCode::ScoreOutOfRange, std::string("'") + kScoreKeys[i] + "' outside 1..5");
    v[i] = static_cast<int>(s);
  }
  auto r = j.find("reasoning");
  if (r == j.end()) throw Error(ErrorCode::MissingKey, "missing 'reasoning'");
  if (!r->is_string()) throw Error(ErrorCode::Malformed, "'reasoning' is not a string");
  return {v[0], v[1], v[2], v[3], r->get<std::string>()};
}

struct MdvlAggregate {
  double scene_logic = 0, casting_logic = 0, act_logic = 0, spat_logic = 0;  // rounded to 2 decimals
  std::size_t evaluated = 0;
  std::size_t failed = 0;
};

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

/// Per-axis means over successfully parsed results; failures are counted.
inline MdvlAggregate aggregate_mdvl(const std::vector<std::optional<MdvlScores>>& results) {
  MdvlAggregate a;
  std::array<long, 4> sum{};
  for (const auto& r : results) {
    if (!r) {
      ++a.failed;
      continue;
    }
    sum[0] += r->scene_logic;
    sum[1] += r->casting_logic;
    sum[2] += r->act_logic;
    sum[3] += r->spat_logic;
    ++a.evaluated;
  }
  if (a.evaluated == 0) throw Error(ErrorCode::Empty, "no parsed MDVL results");
  const auto n = static_cast<double>(a.evaluated);
  a.scene_logic = round2(static_cast<double>(sum[0]) / n);
  a.casting_logic = round2(static_cast<double>(sum[1]) / n);
  a.act_logic = round2(static_cast<double>(sum[2]) / n);
  a.spat_logic = round2(static_cast<double>(sum[3]) / n);
  return a;
}

}  // namespace cinebench::mdvl
