#pragma once

// Per-method leaderboard rows built from per-sequence results, rendered as a
// markdown table, CSV and JSON.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cinebench/report/scoring.hpp"

namespace cinebench::report {

struct Counts {
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // failed validation
  std::size_t gated = 0;    // excluded from the pooled coherence by the motion gate
  std::size_t mdvl_failed = 0;
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct Track1Row {
  std::string method;
  std::optional<double> txt_align, trans_dev, scene_logic, casting_logic, act_logic, spat_logic, con_gap;
  Counts counts;
  friend bool operator==(const Track1Row&, const Track1Row&) = default;
};

struct Track2Row {
  std::string method;
  std::optional<double> ref_sub_con, inter_sub_con, subj_recall, act_str, acp_var, cp_rate;
  Counts counts;
  friend bool operator==(const Track2Row&, const Track2Row&) = default;
};

struct ScoreReport {
  std::vector<Track1Row> track1;  // sorted by method
  std::vector<Track2Row> track2;
  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

namespace detail {

template <typename Get>
std::optional<double> mean_of(const std::vector<const scoring::SequenceResult*>& rs, Get get) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto* r : rs) {
    if (auto v = get(*r)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace detail

/// Con.Gap for one method: the coherence values of every gate-passing video
/// are pooled into a single histogram and compared with the reference one.
inline std::optional<double> pooled_con_gap(const std::vector<const scoring::SequenceResult*>& rs,
                                            const std::optional<temporal::CoherenceHistogram>& reference, int bins,
                                            std::size_t& gated) {
  std::vector<std::vector<double>> passing;
  gated = 0;
  for (const auto* r : rs) {
    if (r->gate == to_string(temporal::GateVerdict::Pass))
      passing.push_back(r->coherence);
    else
      ++gated;
  }
  if (!reference) return std::nullopt;
  try {
    return temporal::consistency_gap(passing, *reference, bins);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AllGatedOut || e.code() == ErrorCode::Empty) return std::nullopt;
    throw;
  }
}

/// Groups results by (track, method). A track that has results but no valid
/// sequence at all raises EMPTY_TRACK.
inline ScoreReport build_report(const std::vector<scoring::SequenceResult>& results, const MetricConfig& cfg,
                                const std::optional<temporal::CoherenceHistogram>& reference_coherence) {
  std::map<std::string, std::vector<const scoring::SequenceResult*>> t1, t2;
  std::map<std::string, std::size_t> skipped1, skipped2;
  for (const auto& r : results) {
    auto& group = r.track == Track::Narrative ? t1 : t2;
    auto& skipped = r.track == Track::Narrative ? skipped1 : skipped2;
    group[r.method];
    if (r.valid)
      group[r.method].push_back(&r);
    else
      ++skipped[r.method];
  }

  ScoreReport out;
  for (const auto& [method, rs] : t1) {
    Track1Row row;
    row.method = method;
    row.counts.evaluated = rs.size();
    row.counts.skipped = skipped1[method];
    row.txt_align = detail::mean_of(rs, [](const auto& r) { return r.txt_align; });
    row.trans_dev = detail::mean_of(rs, [](const auto& r) { return r.trans_dev; });
    std::vector<std::optional<mdvl::MdvlScores>> judged;
    bool any = false;
    for (const auto* r : rs) {
      judged.push_back(r->mdvl);
      any = any || r->mdvl.has_value();
    }
    if (any) {
      const auto agg = mdvl::aggregate_mdvl(judged);
      row.scene_logic = agg.scene_logic;
      row.casting_logic = agg.casting_logic;
      row.act_logic = agg.act_logic;
      row.spat_logic = agg.spat_logic;
      row.counts.mdvl_failed = agg.failed;
    } else {
      row.counts.mdvl_failed = rs.size();
    }
    row.con_gap = pooled_con_gap(rs, reference_coherence, cfg.coherence_bins, row.counts.gated);
    out.track1.push_back(std::move(row));
  }
  for (const auto& [method, rs] : t2) {
    Track2Row row;
    row.method = method;
    row.counts.evaluated = rs.size();
    row.counts.skipped = skipped2[method];
    row.ref_sub_con = detail::mean_of(rs, [](const auto& r) { return r.ref_sub_con; });
    row.inter_sub_con = detail::mean_of(rs, [](const auto& r) { return r.inter_sub_con; });
    row.subj_recall = detail::mean_of(rs, [](const auto& r) { return r.subj_recall; });
    row.act_str = detail::mean_of(rs, [](const auto& r) { return r.act_str; });
    row.acp_var = detail::mean_of(rs, [](const auto& r) { return r.acp_var; });
    if (auto cp = detail::mean_of(rs, [](const auto& r) { return r.copy_score; })) row.cp_rate = 100.0 * *cp;
    out.track2.push_back(std::move(row));
  }

  auto empty = [](const auto& rows) {
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.counts.evaluated == 0; });
  };
  if (empty(out.track1)) throw Error(ErrorCode::EmptyTrack, "no valid sequence in track 1");
  if (empty(out.track2)) throw Error(ErrorCode::EmptyTrack, "no valid sequence in track 2");
  return out;
}

// --- rendering ---------------------------------------------------------------

inline std::string fixed(const std::optional<double>& v, int decimals, const char* suffix = "") {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f%s", decimals, *v, suffix);
  return buf;
}

namespace detail {

inline std::string md_row(const std::vector<std::string>& cells) {
  std::string s = "|";
  for (const auto& c : cells) s += " " + c + " |";
  return s + "\n";
}

inline std::string md_rule(std::size_t n) {
  std::string s = "|";
  for (std::size_t i = 0; i < n; ++i) s += i == 0 ? " :--- |" : " ---: |";
  return s + "\n";
}

inline std::vector<std::string> cells(const Track1Row& r) {
  return {r.method,
          fixed(r.txt_align, 4),
          fixed(r.trans_dev, 2),
          fixed(r.scene_logic, 2),
          fixed(r.casting_logic, 2),
          fixed(r.act_logic, 2),
          fixed(r.spat_logic, 2),
          fixed(r.con_gap, 4)};
}

inline std::vector<std::string> cells(const Track2Row& r) {
  return {r.method,
          fixed(r.ref_sub_con, 2),
          fixed(r.inter_sub_con, 2),
          fixed(r.subj_recall, 4),
          fixed(r.act_str, 4),
          fixed(r.acp_var, 4),
          fixed(r.cp_rate, 2, "%")};
}

}  // namespace detail

inline const std::vector<std::string> kTrack1Header = {"Method",         "Txt.Align ↑",  "Trans.Dev ↓",
                                                       "Scene.Logic ↑",  "Casting.Logic ↑", "Act.Logic ↑",
                                                       "Spat.Logic ↑",   "Con.Gap ↓"};
inline const std::vector<std::string> kTrack2Header = {"Method",   "Ref-Sub.Con ↑", "Inter-Sub.Con ↑", "Subj.Recall ↑",
                                                       "Act.Str ↑", "ACP-Var ↑",     "CP-Rate ↓"};

inline std::string render_markdown(const ScoreReport& rep) {
  std::string s;
  if (!rep.track1.empty()) {
    s += "## Track 1: narrative effectiveness\n\n";
    s += detail::md_row(kTrack1Header) + detail::md_rule(kTrack1Header.size());
    for (const auto& r : rep.track1) s += detail::md_row(detail::cells(r));
    s += "\nCon.Gap is computed once per method from the pooled coherence of all videos that pass the motion gate; "
         "the other columns are per-sequence means.\n\n";
  }
  if (!rep.track2.empty()) {
    s += "## Track 2: subject consistency\n\n";
    s += detail::md_row(kTrack2Header) + detail::md_rule(kTrack2Header.size());
    for (const auto& r : rep.track2) s += detail::md_row(detail::cells(r));
    s += "\nACP-Var and CP-Rate need an external reference image; \"-\" marks methods evaluated without one.\n\n";
  }
  s += "## Counts\n\n";
  s += detail::md_row({"Method", "Track", "Evaluated", "Skipped", "Gated", "MDVL failed"}) + detail::md_rule(6);
  for (const auto& r : rep.track1)
    s += detail::md_row({r.method, "1", std::to_string(r.counts.evaluated), std::to_string(r.counts.skipped),
                         std::to_string(r.counts.gated), std::to_string(r.counts.mdvl_failed)});
  for (const auto& r : rep.track2)
    s += detail::md_row({r.method, "2", std::to_string(r.counts.evaluated), std::to_string(r.counts.skipped), "-", "-"});
  return s;
}

inline std::string render_csv(const ScoreReport& rep) {
  std::string s =
      "method,track,txt_align,trans_dev,scene_logic,casting_logic,act_logic,spat_logic,con_gap,"
      "ref_sub_con,inter_sub_con,subj_recall,act_str,acp_var,cp_rate,evaluated,skipped,gated\n";
  auto join = [](const std::vector<std::string>& v) {
    std::string line;
    for (std::size_t i = 0; i < v.size(); ++i) line += (i ? "," : "") + v[i];
    return line + "\n";
  };
  for (const auto& r : rep.track1) {
    auto c = detail::cells(r);
    std::vector<std::string> v{r.method, "1"};
    v.insert(v.end(), c.begin() + 1, c.end());
    v.insert(v.end(), 6, "");
    v.insert(v.end(), {std::to_string(r.counts.evaluated), std::to_string(r.counts.skipped), std::to_string(r.counts.gated)});
    s += join(v);
  }
  for (const auto& r : rep.track2) {
    std::vector<std::string> v{r.method, "2"};
    v.insert(v.end(), 7, "");
    v.insert(v.end(), {fixed(r.ref_sub_con, 2), fixed(r.inter_sub_con, 2), fixed(r.subj_recall, 4), fixed(r.act_str, 4),
                       fixed(r.acp_var, 4), fixed(r.cp_rate, 2)});
    v.insert(v.end(), {std::to_string(r.counts.evaluated), std::to_string(r.counts.skipped), ""});
    s += join(v);
  }
  return s;
}

inline ordered_json render_json(const ScoreReport& rep) {
  auto counts = [](const Counts& c) {
    return ordered_json{{"evaluated", c.evaluated}, {"skipped", c.skipped}, {"gated", c.gated}, {"mdvl_failed", c.mdvl_failed}};
  };
  ordered_json t1 = ordered_json::array(), t2 = ordered_json::array();
  for (const auto& r : rep.track1) {
    t1.push_back(ordered_json{{"method", r.method},
                              {"txt_align", scoring::detail::opt(r.txt_align)},
                              {"trans_dev", scoring::detail::opt(r.trans_dev)},
                              {"scene_logic", scoring::detail::opt(r.scene_logic)},
                              {"casting_logic", scoring::detail::opt(r.casting_logic)},
                              {"act_logic", scoring::detail::opt(r.act_logic)},
                              {"spat_logic", scoring::detail::opt(r.spat_logic)},
                              {"con_gap", scoring::detail::opt(r.con_gap)},
                              {"counts", counts(r.counts)}});
  }
  for (const auto& r : rep.track2) {
    t2.push_back(ordered_json{{"method", r.method},
                              {"ref_sub_con", scoring::detail::opt(r.ref_sub_con)},
                              {"inter_sub_con", scoring::detail::opt(r.inter_sub_con)},
                              {"subj_recall", scoring::detail::opt(r.subj_recall)},
                              {"act_str", scoring::detail::opt(r.act_str)},
                              {"acp_var", scoring::detail::opt(r.acp_var)},
                              {"cp_rate", scoring::detail::opt(r.cp_rate)},
                              {"counts", counts(r.counts)}});
  }
  return ordered_json{{"schema_version", 1}, {"track1", std::move(t1)}, {"track2", std::move(t2)}};
}

}  // namespace cinebench::report
