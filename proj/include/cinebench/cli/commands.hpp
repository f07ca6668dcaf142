#pragma once

// Subcommand bodies. Each takes a RunConfig, reads inputs, writes its output
// files into output_dir and returns a process exit status:
// 0 ok, 1 findings or failure, 2 empty track, 64 usage.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cinebench/caption/caption.hpp"
#include "cinebench/core/manifest.hpp"
#include "cinebench/core/validate.hpp"
#include "cinebench/curation/curation.hpp"
#include "cinebench/mdvl/mdvl.hpp"
#include "cinebench/report/report.hpp"
#include "cinebench/report/scoring.hpp"

namespace cinebench::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitEmpty = 2;
inline constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  fs::path manifest;
  fs::path bundle_dir;
  fs::path gallery;        // bundle holding a `gallery` [M, D] tensor
  fs::path ref_coherence;  // bundle holding `histogram` masses or raw `coherence` values
  fs::path output_dir = ".";
  fs::path responses;      // ingest input
  fs::path mdvl_results;   // optional input to score --track 1
  std::vector<fs::path> results;  // report inputs
  MetricConfig metrics;
  std::optional<int> track;
  int jobs = 1;
  std::string method;
  std::string phase = "caption";  // caption build-stage1: caption | rewrite
};

/// Reads a JSON config file into `cfg`. Relative paths are taken relative to
/// the file's directory. Command-line flags are applied afterwards.
inline void load_config_file(const fs::path& path, RunConfig& cfg) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!j.is_object()) throw UsageError("config " + path.string() + ": expected an object");
  const auto base = path.parent_path();
  auto p = [&](const ordered_json& v) { return base / fs::path(v.get<std::string>()); };
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      const auto& v = it.value();
      if (k == "manifest") cfg.manifest = p(v);
      else if (k == "bundle_dir") cfg.bundle_dir = p(v);
      else if (k == "gallery") cfg.gallery = p(v);
      else if (k == "ref_coherence") cfg.ref_coherence = p(v);
      else if (k == "output_dir") cfg.output_dir = p(v);
      else if (k == "mdvl_results") cfg.mdvl_results = p(v);
      else if (k == "jobs") cfg.jobs = v.get<int>();
      else if (k == "method") cfg.method = v.get<std::string>();
      else if (k == "track") cfg.track = v.get<int>();
      else if (k == "metrics") cfg.metrics = apply_overrides(cfg.metrics, v);
      else throw UsageError("config " + path.string() + ": unknown key '" + k + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
}

namespace detail {

inline void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing ") + what);
  if (!fs::is_regular_file(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

inline void require_dir(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing ") + what);
  if (!fs::is_directory(p)) throw UsageError(std::string(what) + " not found: " + p.string());
}

inline void check_jobs(const RunConfig& cfg) {
  if (cfg.jobs < 1) throw UsageError("--jobs must be >= 1");
}

/// Runs f(i) for i in [0, n) on up to `jobs` threads. Results keep input
/// order; the exception of the lowest failing index is rethrown.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, int jobs, F f) {
  std::vector<std::optional<R>> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> result;
  result.reserve(n);
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

struct LoadedBundles {
  BundleIndex index;
  std::map<std::string, std::string> errors;  // id -> error code
};

/// Loads `<id>.cbf1` for every id that has a file. Missing files are left
/// out; unreadable ones are recorded with their error code.
inline LoadedBundles load_bundles(const fs::path& dir, const std::set<std::string>& ids, int jobs) {
  const std::vector<std::string> list(ids.begin(), ids.end());
  struct One {
    std::optional<FeatureBundle> bundle;
    std::string error;
  };
  auto loaded = parallel_map<One>(list.size(), jobs, [&](std::size_t i) {
    const auto path = bundle_path(dir, list[i]);
    if (!fs::exists(path)) return One{};
    try {
      return One{load_bundle(path), {}};
    } catch (const Error& e) {
      return One{std::nullopt, std::string(to_string(e.code()))};
    }
  });
  LoadedBundles out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (loaded[i].bundle) out.index.emplace(list[i], std::move(*loaded[i].bundle));
    if (!loaded[i].error.empty()) out.errors.emplace(list[i], loaded[i].error);
  }
  return out;
}

inline std::set<std::string> referenced_ids(const std::vector<StorylineSequence>& seqs) {
  std::set<std::string> ids;
  for (const auto& s : seqs) {
    for (const auto& shot : s.shots) {
      ids.insert(shot.clip_id);
      ids.insert(shot.source_id);
    }
    if (s.reference_clip_id) ids.insert(*s.reference_clip_id);
  }
  return ids;
}

inline std::vector<StorylineSequence> read_manifest(const fs::path& p) {
  require_file(p, "manifest");
  return parse_manifest(read_file(p));
}

inline void write_lines(const fs::path& path, const std::vector<ordered_json>& lines) {
  std::string out;
  for (const auto& l : lines) out += l.dump() + "\n";
  fs::create_directories(path.parent_path());
  write_file_atomic(path, out);
}

inline ordered_json log_line(const std::string& item, std::string_view code, const std::string& message) {
  return ordered_json{{"item", item}, {"code", std::string(code)}, {"message", message}};
}

}  // namespace detail

// --- validate ------------------------------------------------------------------

/// Checks the manifest and every bundle it references; writes validation.jsonl
/// with one line per item that has findings.
inline int cmd_validate(const RunConfig& cfg) {
  detail::check_jobs(cfg);
  detail::require_file(cfg.manifest, "manifest");
  detail::require_dir(cfg.bundle_dir, "bundle directory");
  std::optional<Track> track;
  if (cfg.track) {
    if (*cfg.track != 1 && *cfg.track != 2) throw UsageError("--track must be 1 or 2");
    track = static_cast<Track>(*cfg.track);
  }

  const auto parsed = parse_manifest_lenient(read_file(cfg.manifest));
  std::vector<ordered_json> lines;
  for (const auto& issue : parsed.issues) {
    lines.push_back(ordered_json{{"item", "line " + std::to_string(issue.line)},
                                 {"findings", {std::string(to_string(issue.code)) + ": " + issue.message}}});
  }

  const auto loaded = detail::load_bundles(cfg.bundle_dir, detail::referenced_ids(parsed.sequences), cfg.jobs);
  auto reports = detail::parallel_map<ValidationReport>(parsed.sequences.size(), cfg.jobs, [&](std::size_t i) {
    return validate_sequence(parsed.sequences[i], loaded.index, track);
  });
  for (std::size_t i = 0; i < reports.size(); ++i) {
    std::vector<std::string> findings;
    std::set<std::string> bad;
    const auto& seq = parsed.sequences[i];
    for (const auto& s : seq.shots) {
      for (const auto& id : {s.clip_id, s.source_id}) {
        if (auto it = loaded.errors.find(id); it != loaded.errors.end() && bad.insert(id).second)
          findings.push_back("BAD_BUNDLE(" + id + ": " + it->second + ")");
      }
    }
    if (seq.reference_clip_id) {
      if (auto it = loaded.errors.find(*seq.reference_clip_id); it != loaded.errors.end() && bad.insert(it->first).second)
        findings.push_back("BAD_BUNDLE(" + it->first + ": " + it->second + ")");
    }
    for (const auto& f : reports[i].findings) findings.push_back(f.render());
    if (!findings.empty()) lines.push_back(ordered_json{{"item", seq.sequence_id}, {"findings", findings}});
  }
  detail::write_lines(cfg.output_dir / "validation.jsonl", lines);
  return lines.empty() ? kExitOk : kExitFindings;
}

// --- curate --------------------------------------------------------------------

struct CurationOutput {
  std::vector<StorylineSequence> windows;
  std::vector<S2VPair> pairs;
  std::vector<ordered_json> rejections;
};

/// One storyline through the cascade, the windowing and the reference search.
/// For every window and every subject seen in it, the target clip is the
/// window's first clip showing the subject; references from clips inside the
/// window are not eligible.
inline CurationOutput curate_storyline(const StorylineSequence& storyline, const BundleIndex& bundles,
                                       const MetricConfig& cfg, const curation::MatchConstraints& mc = {}) {
  CurationOutput out;
  std::vector<bool> accepted(storyline.shots.size(), false);
  for (std::size_t i = 0; i < storyline.shots.size(); ++i) {
    const auto& shot = storyline.shots[i];
    auto reject = [&](std::string_view stage, const std::string& reason) {
      out.rejections.push_back(ordered_json{{"record", "rejection"},
                                            {"storyline_id", storyline.sequence_id},
                                            {"item", shot.clip_id},
                                            {"stage", std::string(stage)},
                                            {"reason", reason}});
    };
    auto it = bundles.find(shot.clip_id);
    if (it == bundles.end()) {
      reject("INPUT", "MISSING_BUNDLE");
      continue;
    }
    const auto q = curation::quality_from_bundle(it->second);
    if (!q) {
      reject("INPUT", "MISSING_TENSOR(quality)");
      continue;
    }
    const auto r = curation::cascade_filter(*q, cfg);
    if (r.accepted)
      accepted[i] = true;
    else
      reject(to_string(*r.rejected_at), "below threshold");
  }

  out.windows = curation::sliding_windows(storyline, accepted, cfg);
  const auto tracks = curation::tracks_from_bundles(storyline, bundles);
  for (const auto& w : out.windows) {
    std::set<std::string> in_window;
    for (const auto& s : w.shots) in_window.insert(s.clip_id);
    for (const auto& track : tracks) {
      std::optional<std::string> target;
      for (const auto& s : w.shots) {
        const bool seen = std::any_of(track.appearances.begin(), track.appearances.end(),
                                      [&](const curation::Appearance& a) { return a.clip_id == s.clip_id; });
        if (seen) {
          target = s.clip_id;
          break;
        }
      }
      if (!target) continue;
      const std::string item = w.sequence_id + "/" + track.identity_id;
      auto reject = [&](std::string_view code) {
        out.rejections.push_back(ordered_json{{"record", "rejection"},
                                              {"storyline_id", storyline.sequence_id},
                                              {"item", item},
                                              {"stage", "MATCH"},
                                              {"reason", std::string(code)}});
      };
      try {
        auto cands = curation::cross_shot_match({track}, storyline, *target, mc, cfg.pose_vis_min);
        auto c = std::find_if(cands.begin(), cands.end(),
                              [&](const curation::Candidate& x) { return !in_window.count(x.reference.clip_id); });
        if (c == cands.end()) {
          reject(to_string(ErrorCode::NoCandidate));
          continue;
        }
        out.pairs.push_back(curation::build_s2v_pair(*c, w, mc, item));
      } catch (const Error& e) {
        reject(to_string(e.code()));
      }
    }
  }
  return out;
}

/// Writes windows.jsonl (window manifest), pairs.jsonl and rejections.jsonl.
inline int cmd_curate(const RunConfig& cfg) {
  detail::check_jobs(cfg);
  const auto storylines = detail::read_manifest(cfg.manifest);
  detail::require_dir(cfg.bundle_dir, "bundle directory");
  std::set<std::string> ids;
  for (const auto& s : storylines)
    for (const auto& shot : s.shots) ids.insert(shot.clip_id);
  const auto loaded = detail::load_bundles(cfg.bundle_dir, ids, cfg.jobs);

  auto parts = detail::parallel_map<CurationOutput>(storylines.size(), cfg.jobs, [&](std::size_t i) {
    return curate_storyline(storylines[i], loaded.index, cfg.metrics);
  });
  std::vector<StorylineSequence> windows;
  std::vector<ordered_json> pairs, rejections;
  for (auto& p : parts) {
    windows.insert(windows.end(), p.windows.begin(), p.windows.end());
    for (const auto& pair : p.pairs) pairs.push_back(pair_to_json(pair));
    rejections.insert(rejections.end(), p.rejections.begin(), p.rejections.end());
  }
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "windows.jsonl", serialize_manifest(windows));
  detail::write_lines(cfg.output_dir / "pairs.jsonl", pairs);
  detail::write_lines(cfg.output_dir / "rejections.jsonl", rejections);
  return kExitOk;
}

// --- score ---------------------------------------------------------------------

inline std::map<std::string, mdvl::MdvlScores> read_mdvl_results(const fs::path& path) {
  std::map<std::string, mdvl::MdvlScores> out;
  const auto text = read_file(path);
  auto records = chat::parse_lines<ordered_json>(text, [](const ordered_json& j) { return j; });
  for (const auto& j : records) {
    try {
      if (j.at("status").get<std::string>() != "ok") continue;
      out[j.at("sequence_id").get<std::string>()] =
          mdvl::MdvlScores{j.at("scene_logic").get<int>(), j.at("casting_logic").get<int>(), j.at("act_logic").get<int>(),
                           j.at("spat_logic").get<int>(), j.at("reasoning").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
  }
  return out;
}

inline std::string default_method(const RunConfig& cfg) {
  return cfg.method.empty() ? cfg.manifest.stem().string() : cfg.method;
}

/// Scores every sequence of the manifest on one track; writes
/// scores_track<N>.jsonl in manifest order.
inline int cmd_score(const RunConfig& cfg) {
  detail::check_jobs(cfg);
  if (!cfg.track || (*cfg.track != 1 && *cfg.track != 2)) throw UsageError("--track must be 1 or 2");
  const auto seqs = detail::read_manifest(cfg.manifest);
  detail::require_dir(cfg.bundle_dir, "bundle directory");
  std::optional<Tensor> gallery;
  if (!cfg.gallery.empty()) {
    detail::require_file(cfg.gallery, "gallery bundle");
    const auto gb = load_bundle(cfg.gallery);
    const Tensor* g = gb.find("gallery");
    if (!g) throw Error(ErrorCode::Layout, "gallery bundle has no 'gallery' tensor");
    gallery = *g;
  }
  std::optional<std::map<std::string, mdvl::MdvlScores>> judged;
  if (!cfg.mdvl_results.empty()) {
    detail::require_file(cfg.mdvl_results, "MDVL results");
    judged = read_mdvl_results(cfg.mdvl_results);
  }

  const auto loaded = detail::load_bundles(cfg.bundle_dir, detail::referenced_ids(seqs), cfg.jobs);
  const auto method = default_method(cfg);
  auto results = detail::parallel_map<scoring::SequenceResult>(seqs.size(), cfg.jobs, [&](std::size_t i) {
    if (*cfg.track == 1) return scoring::score_track1(seqs[i], loaded.index, cfg.metrics, method, judged ? &*judged : nullptr);
    return scoring::score_track2(seqs[i], loaded.index, cfg.metrics, method, gallery ? &*gallery : nullptr);
  });
  std::vector<ordered_json> lines;
  for (const auto& r : results) lines.push_back(scoring::to_json(r));
  detail::write_lines(cfg.output_dir / ("scores_track" + std::to_string(*cfg.track) + ".jsonl"), lines);
  return kExitOk;
}

// --- report --------------------------------------------------------------------

inline temporal::CoherenceHistogram read_reference_coherence(const fs::path& path, int bins) {
  const auto b = load_bundle(path);
  if (const Tensor* h = b.find("histogram")) {
    auto hist = temporal::histogram_from_masses(std::span<const float>(h->data));
    if (hist.size() != static_cast<std::size_t>(bins))
      throw Error(ErrorCode::BinMismatch, "reference histogram has " + std::to_string(hist.size()) + " bins");
    return hist;
  }
  if (const Tensor* c = b.find("coherence")) return temporal::coherence_histogram(std::span<const float>(c->data), bins);
  throw Error(ErrorCode::Layout, "reference bundle needs a 'histogram' or 'coherence' tensor");
}

/// Renders report.md, report.csv and report.json from per-sequence result files.
inline int cmd_report(const RunConfig& cfg) {
  if (cfg.results.empty()) throw UsageError("missing result files");
  std::vector<scoring::SequenceResult> all;
  for (const auto& p : cfg.results) {
    detail::require_file(p, "result file");
    auto rs = chat::parse_lines<scoring::SequenceResult>(read_file(p), scoring::result_from_json);
    all.insert(all.end(), rs.begin(), rs.end());
  }
  std::optional<temporal::CoherenceHistogram> ref;
  if (!cfg.ref_coherence.empty()) {
    detail::require_file(cfg.ref_coherence, "reference coherence bundle");
    ref = read_reference_coherence(cfg.ref_coherence, cfg.metrics.coherence_bins);
  }
  report::ScoreReport rep;
  try {
    rep = report::build_report(all, cfg.metrics, ref);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyTrack) throw;
    std::cerr << e.what() << "\n";
    return kExitEmpty;
  }
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "report.md", report::render_markdown(rep));
  write_file_atomic(cfg.output_dir / "report.csv", report::render_csv(rep));
  write_file_atomic(cfg.output_dir / "report.json", report::render_json(rep).dump(2) + "\n");
  return kExitOk;
}

// --- caption -------------------------------------------------------------------

/// Stage 1 requests: one captioning request per shot, or with phase
/// "rewrite" one rewrite request per captioned shot. Writes
/// requests_stage1.jsonl and, for skipped shots, caption_log.jsonl.
inline int cmd_caption_build_stage1(const RunConfig& cfg) {
  if (cfg.phase != "caption" && cfg.phase != "rewrite") throw UsageError("--phase must be caption or rewrite");
  const auto seqs = detail::read_manifest(cfg.manifest);
  std::vector<chat::ChatRequest> requests;
  std::vector<ordered_json> log;
  std::set<std::string> seen;
  for (const auto& seq : seqs) {
    for (const auto& shot : seq.shots) {
      if (!seen.insert(shot.clip_id).second) continue;
      if (cfg.phase == "caption") {
        requests.push_back(caption::build_single_shot_request(shot));
        continue;
      }
      try {
        requests.push_back(caption::build_rewrite_request(shot.clip_id, shot.caption));
      } catch (const Error& e) {
        log.push_back(detail::log_line(shot.clip_id, to_string(e.code()), e.what()));
      }
    }
  }
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "requests_stage1.jsonl", chat::serialize_lines(requests));
  detail::write_lines(cfg.output_dir / "caption_log.jsonl", log);
  return kExitOk;
}

/// Stage 2 requests: one joint refinement request per sequence, seeded with
/// the rewritten captions where present.
inline int cmd_caption_build_stage2(const RunConfig& cfg) {
  const auto seqs = detail::read_manifest(cfg.manifest);
  std::vector<chat::ChatRequest> requests;
  for (const auto& seq : seqs) {
    std::vector<std::string> initial;
    for (const auto& s : seq.shots) initial.push_back(s.caption_rewritten.value_or(s.caption));
    requests.push_back(caption::build_aggregation_request(seq, initial));
  }
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "requests_stage2.jsonl", chat::serialize_lines(requests));
  return kExitOk;
}

/// Applies caption, rewrite and refinement responses to the manifest. Writes
/// manifest.jsonl and ingest_log.jsonl (one line per response that could
/// not be applied). Returns 1 when any response was rejected.
inline int cmd_caption_ingest(const RunConfig& cfg) {
  auto seqs = detail::read_manifest(cfg.manifest);
  detail::require_file(cfg.responses, "responses file");
  const auto responses = chat::parse_responses(read_file(cfg.responses));

  std::map<std::string, std::vector<ShotRecord*>> by_clip;
  std::map<std::string, StorylineSequence*> by_seq;
  for (auto& seq : seqs) {
    by_seq[seq.sequence_id] = &seq;
    for (auto& s : seq.shots) by_clip[s.clip_id].push_back(&s);
  }
  auto strip = [](const std::string& id, std::string_view prefix) -> std::optional<std::string> {
    if (id.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    return id.substr(prefix.size());
  };

  std::vector<ordered_json> log;
  for (const auto& r : responses) {
    try {
      if (!r.ok) throw Error(ErrorCode::Malformed, "client gave up on this request");
      if (auto clip = strip(r.request_id, caption::kCaptionPrefix)) {
        auto it = by_clip.find(*clip);
        if (it == by_clip.end()) throw Error(ErrorCode::MissingField, "unknown clip '" + *clip + "'");
        const auto text = std::string(chat::trim(r.text));
        if (text.empty()) throw Error(ErrorCode::EmptyCaption, "empty caption");
        for (auto* s : it->second) s->caption = text;
      } else if (auto clip = strip(r.request_id, caption::kRewritePrefix)) {
        auto it = by_clip.find(*clip);
        if (it == by_clip.end()) throw Error(ErrorCode::MissingField, "unknown clip '" + *clip + "'");
        const auto text = caption::parse_rewrite(r.text);
        if (text.empty()) throw Error(ErrorCode::EmptyCaption, "empty rewrite");
        for (auto* s : it->second) s->caption_rewritten = text;
      } else if (auto id = strip(r.request_id, caption::kAggregatePrefix)) {
        auto it = by_seq.find(*id);
        if (it == by_seq.end()) throw Error(ErrorCode::MissingField, "unknown sequence '" + *id + "'");
        it->second->shot_prompts = caption::parse_shot_captions(r.text, it->second->shots.size());
      } else {
        throw Error(ErrorCode::MissingField, "unrecognized request id");
      }
    } catch (const Error& e) {
      log.push_back(detail::log_line(r.request_id, to_string(e.code()), e.what()));
    }
  }
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "manifest.jsonl", serialize_manifest(seqs));
  detail::write_lines(cfg.output_dir / "ingest_log.jsonl", log);
  return log.empty() ? kExitOk : kExitFindings;
}

// --- mdvl ----------------------------------------------------------------------

/// Writes requests_mdvl.jsonl and grids.jsonl. Sequences without refined
/// shot prompts fall back to their shot captions.
inline int cmd_mdvl_build(const RunConfig& cfg) {
  const auto seqs = detail::read_manifest(cfg.manifest);
  std::vector<chat::ChatRequest> requests;
  std::vector<ordered_json> grids, log;
  for (const auto& seq : seqs) {
    try {
      const auto grid = mdvl::build_grid_spec(seq);
      std::vector<std::string> prompts = seq.shot_prompts;
      if (prompts.empty())
        for (const auto& s : seq.shots) prompts.push_back(s.caption_rewritten.value_or(s.caption));
      requests.push_back(mdvl::build_mdvl_prompt(grid, seq.global_narrative, prompts));
      grids.push_back(mdvl::to_json(grid));
    } catch (const Error& e) {
      log.push_back(detail::log_line(seq.sequence_id, to_string(e.code()), e.what()));
    }
  }
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "requests_mdvl.jsonl", chat::serialize_lines(requests));
  detail::write_lines(cfg.output_dir / "grids.jsonl", grids);
  detail::write_lines(cfg.output_dir / "mdvl_log.jsonl", log);
  return kExitOk;
}

/// Parses judge responses into mdvl_results.jsonl, one line per response.
inline int cmd_mdvl_ingest(const RunConfig& cfg) {
  detail::require_file(cfg.responses, "responses file");
  const auto responses = chat::parse_responses(read_file(cfg.responses));
  std::vector<ordered_json> lines;
  for (const auto& r : responses) {
    if (r.request_id.compare(0, mdvl::kRequestPrefix.size(), mdvl::kRequestPrefix) != 0) continue;
    ordered_json j;
    j["sequence_id"] = r.request_id.substr(mdvl::kRequestPrefix.size());
    try {
      if (!r.ok) throw Error(ErrorCode::Malformed, "client gave up on this request");
      const auto s = mdvl::parse_mdvl_response(r.text);
      j["status"] = "ok";
      j["scene_logic"] = s.scene_logic;
      j["casting_logic"] = s.casting_logic;
      j["act_logic"] = s.act_logic;
      j["spat_logic"] = s.spat_logic;
      j["reasoning"] = s.reasoning;
    } catch (const Error& e) {
      j["status"] = "failed";
      j["code"] = std::string(to_string(e.code()));
    }
    lines.push_back(std::move(j));
  }
  detail::write_lines(cfg.output_dir / "mdvl_results.jsonl", lines);
  return kExitOk;
}

}  // namespace cinebench::cli
