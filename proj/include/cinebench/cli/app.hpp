#pragma once

// Argument parsing for the cinebench executable. Kept separate from main()
// so tests can drive the whole tool in-process.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cinebench/cli/commands.hpp"

namespace cinebench::cli {

struct Flags {
  std::string config, manifest, bundle_dir, gallery, ref_coherence, output_dir, responses, mdvl_results, method, phase;
  std::vector<std::string> results;
  std::vector<std::string> set;  // key=value metric overrides
  std::optional<int> track;
  std::optional<int> jobs;
};

namespace detail {

inline RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    require_file(f.config, "config file");
    load_config_file(f.config, cfg);
  }
  if (!f.manifest.empty()) cfg.manifest = f.manifest;
  if (!f.bundle_dir.empty()) cfg.bundle_dir = f.bundle_dir;
  if (!f.gallery.empty()) cfg.gallery = f.gallery;
  if (!f.ref_coherence.empty()) cfg.ref_coherence = f.ref_coherence;
  if (!f.output_dir.empty()) cfg.output_dir = f.output_dir;
  if (!f.responses.empty()) cfg.responses = f.responses;
  if (!f.mdvl_results.empty()) cfg.mdvl_results = f.mdvl_results;
  if (!f.method.empty()) cfg.method = f.method;
  if (!f.phase.empty()) cfg.phase = f.phase;
  for (const auto& r : f.results) cfg.results.emplace_back(r);
  if (f.track) cfg.track = *f.track;
  if (f.jobs) cfg.jobs = *f.jobs;
  if (!f.set.empty()) {
    ordered_json overrides = ordered_json::object();
    for (const auto& kv : f.set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      const auto key = kv.substr(0, eq);
      const auto value = kv.substr(eq + 1);
      try {
        overrides[key] = ordered_json::parse(value);
      } catch (const nlohmann::json::exception&) {
        throw UsageError("--set " + key + ": not a number");
      }
    }
    try {
      cfg.metrics = apply_overrides(cfg.metrics, overrides);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("--set: ") + e.what());
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  return cfg;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"Multi-shot video benchmark: curation, scoring and reports"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run configuration; flags override it");
    sub->add_option("--manifest", f.manifest, "sequence manifest (.jsonl)");
    sub->add_option("--out", f.output_dir, "output directory");
    sub->add_option("--jobs", f.jobs, "worker threads");
    sub->add_option("--set", f.set, "metric override key=value")->take_all();
  };

  auto* validate = app.add_subcommand("validate", "check a manifest against its bundles");
  common(validate);
  validate->add_option("--bundles", f.bundle_dir, "bundle directory");
  validate->add_option("--track", f.track, "also require the tensors of track 1 or 2");

  auto* curate = app.add_subcommand("curate", "filter shots, cut windows, find reference frames");
  common(curate);
  curate->add_option("--bundles", f.bundle_dir, "bundle directory");

  auto* score = app.add_subcommand("score", "per-sequence metrics for one track");
  common(score);
  score->add_option("--bundles", f.bundle_dir, "bundle directory");
  score->add_option("--track", f.track, "1 or 2");
  score->add_option("--method", f.method, "method name (default: manifest file stem)");
  score->add_option("--gallery", f.gallery, "bundle with a distractor `gallery` tensor");
  score->add_option("--mdvl", f.mdvl_results, "mdvl_results.jsonl to merge into track 1");

  auto* report = app.add_subcommand("report", "render method tables");
  common(report);
  report->add_option("--results", f.results, "scores_track*.jsonl files")->take_all();
  report->add_option("--ref-coherence", f.ref_coherence, "bundle with the reference coherence distribution");

  auto* caption = app.add_subcommand("caption", "captioning batches");
  caption->require_subcommand(1);
  auto* stage1 = caption->add_subcommand("build-stage1", "per-shot caption or rewrite requests");
  common(stage1);
  stage1->add_option("--phase", f.phase, "caption or rewrite");
  auto* stage2 = caption->add_subcommand("build-stage2", "joint multi-shot refinement requests");
  common(stage2);
  auto* cingest = caption->add_subcommand("ingest", "apply responses to the manifest");
  common(cingest);
  cingest->add_option("--responses", f.responses, "response batch file");

  auto* mdvl = app.add_subcommand("mdvl", "visual-logic judging batches");
  mdvl->require_subcommand(1);
  auto* mbuild = mdvl->add_subcommand("build", "judge requests and grid specs");
  common(mbuild);
  auto* mingest = mdvl->add_subcommand("ingest", "parse judge responses");
  common(mingest);
  mingest->add_option("--responses", f.responses, "response batch file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const RunConfig cfg = detail::resolve(f);
    if (validate->parsed()) return cmd_validate(cfg);
    if (curate->parsed()) return cmd_curate(cfg);
    if (score->parsed()) return cmd_score(cfg);
    if (report->parsed()) return cmd_report(cfg);
    if (stage1->parsed()) return cmd_caption_build_stage1(cfg);
    if (stage2->parsed()) return cmd_caption_build_stage2(cfg);
    if (cingest->parsed()) return cmd_caption_ingest(cfg);
    if (mbuild->parsed()) return cmd_mdvl_build(cfg);
    if (mingest->parsed()) return cmd_mdvl_ingest(cfg);
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFindings;
  }
  return kExitUsage;
}

}  // namespace cinebench::cli
