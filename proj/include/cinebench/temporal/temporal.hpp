#pragma once

// Transition timing, narrative-rhythm histogram distance and motion metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cinebench/error.hpp"

namespace cinebench::temporal {

struct BoundarySet {
  std::vector<std::int64_t> frames;  // strictly increasing, each in (0, clip_len)
  std::int64_t clip_len = 0;
};

/// Cut positions implied by consecutive shot durations.
inline BoundarySet expected_boundaries(std::span<const std::int64_t> durations) {
  if (durations.size() < 2) throw Error(ErrorCode::SingleShot, "need at least two shots");
  BoundarySet b;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] <= 0) throw Error(ErrorCode::InvalidConfig, "shot durations must be positive");
    b.clip_len += durations[i];
    if (i + 1 < durations.size()) b.frames.push_back(b.clip_len);
  }
  return b;
}

struct TransitionDeviation {
  std::optional<double> mean_abs_dev;  // empty when nothing was matched
  std::int64_t misses = 0;
  std::int64_t extras = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> matches;  // (expected, detected)
};

/// Order-preserving one-to-one matching of detected to expected cuts. Among
/// matchings of maximum size, the one with the smallest total |Δ| is chosen;
/// found exactly by dynamic programming.
inline TransitionDeviation transition_deviation(std::span<const std::int64_t> expected,
                                                std::span<const std::int64_t> detected) {
  if (expected.empty()) throw Error(ErrorCode::Empty, "no expected boundaries");
  const std::size_t n = expected.size(), m = detected.size();
  struct Cell {
    std::int64_t count = 0;
    std::int64_t cost = 0;
  };
  auto better = [](const Cell& a, const Cell& b) {
    return a.count != b.count ? a.count > b.count : a.cost < b.cost;
  };
  enum class Step : unsigned char { SkipExpected, SkipDetected, Match };
  // best[i][j]: optimum over expected[0, i) and detected[0, j)
  std::vector<std::vector<Cell>> best(n + 1, std::vector<Cell>(m + 1));
  std::vector<std::vector<Step>> step(n + 1, std::vector<Step>(m + 1, Step::SkipExpected));
  for (std::size_t j = 1; j <= m; ++j) step[0][j] = Step::SkipDetected;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      Cell c = best[i - 1][j];
      Step s = Step::SkipExpected;
      if (better(best[i][j - 1], c)) {
        c = best[i][j - 1];
        s = Step::SkipDetected;
      }
      Cell take = best[i - 1][j - 1];
      take.count += 1;
      take.cost += std::llabs(expected[i - 1] - detected[j - 1]);
      if (better(take, c)) {
        c = take;
        s = Step::Match;
      }
      best[i][j] = c;
      step[i][j] = s;
    }
  }

  TransitionDeviation r;
  for (std::size_t i = n, j = m; i > 0 && j > 0;) {
    switch (step[i][j]) {
      case Step::Match:
        r.matches.emplace_back(expected[i - 1], detected[j - 1]);
        --i;
        --j;
        break;
      case Step::SkipExpected: --i; break;
      case Step::SkipDetected: --j; break;
    }
  }
  std::reverse(r.matches.begin(), r.matches.end());
  const Cell& total = best[n][m];
  r.misses = static_cast<std::int64_t>(n) - total.count;
  r.extras = static_cast<std::int64_t>(m) - total.count;
  if (total.count > 0) r.mean_abs_dev = static_cast<double>(total.cost) / static_cast<double>(total.count);
  return r;
}

struct CoherenceHistogram {
  std::vector<double> bins;  // non-negative, sums to 1, equal-width over [-1, 1]

  std::size_t size() const { return bins.size(); }
};

inline double coherence_edge(std::int64_t k, std::size_t bins) {
  return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(bins);
}

inline std::size_t coherence_bin(double v, std::size_t bins) {
  const auto last = static_cast<std::int64_t>(bins) - 1;
  auto idx = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((v + 1.0) * static_cast<double>(bins) / 2.0)), 0, last);
  // The quotient can land an ulp off on an edge; settle against the edges themselves.
  while (idx < last && v >= coherence_edge(idx + 1, bins)) ++idx;
  while (idx > 0 && v < coherence_edge(idx, bins)) --idx;
  return static_cast<std::size_t>(idx);
}

/// Equal-width bins over [-1, 1], right-inclusive at +1, normalized to unit mass.
/// Values are clamped into range (cosines of float vectors overshoot by an ulp).
template <typename T>
CoherenceHistogram coherence_histogram(std::span<const T> values, int bins) {
  if (bins < 2) throw Error(ErrorCode::InvalidConfig, "need at least 2 bins");
  if (values.empty()) throw Error(ErrorCode::Empty, "no coherence values");
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (T v : values) {
    if (!std::isfinite(static_cast<double>(v))) throw Error(ErrorCode::InvalidConfig, "non-finite coherence value");
    ++counts[coherence_bin(std::clamp(static_cast<double>(v), -1.0, 1.0), counts.size())];
  }
  CoherenceHistogram h;
  h.bins.reserve(counts.size());
  for (auto c : counts) h.bins.push_back(static_cast<double>(c) / static_cast<double>(values.size()));
  return h;
}

inline CoherenceHistogram coherence_histogram(const std::vector<double>& values, int bins) {
  return coherence_histogram(std::span<const double>(values), bins);
}

/// Histogram from raw (possibly unnormalized) masses.
inline CoherenceHistogram histogram_from_masses(std::span<const float> masses) {
  if (masses.size() < 2) throw Error(ErrorCode::InvalidConfig, "need at least 2 bins");
  double total = 0.0;
  for (float m : masses) {
    if (!(m >= 0.0f) || !std::isfinite(m)) throw Error(ErrorCode::InvalidConfig, "histogram mass must be >= 0");
    total += m;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::Empty, "histogram has zero mass");
  CoherenceHistogram h;
  for (float m : masses) h.bins.push_back(static_cast<double>(m) / total);
  return h;
}

/// Square root of the base-2 Jensen-Shannon divergence; a metric bounded by [0, 1].
inline double js_distance(const CoherenceHistogram& p, const CoherenceHistogram& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::BinMismatch, "histograms have different bin counts");
  bool overlap = false;
  double jsd = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p.bins[i], b = q.bins[i];
    const double m = 0.5 * (a + b);
    if (a > 0.0) jsd += 0.5 * a * std::log2(a / m);
    if (b > 0.0) jsd += 0.5 * b * std::log2(b / m);
    overlap = overlap || (a > 0.0 && b > 0.0);
  }
  // Disjoint supports are the maximal case, JSD = 1 exactly.
  if (!overlap) return 1.0;
  return std::sqrt(std::clamp(jsd, 0.0, 1.0));
}

/// Distance between the pooled coherence distribution of motion-gated videos
/// and a reference distribution.
inline double consistency_gap(const std::vector<std::vector<double>>& gated_values, const CoherenceHistogram& reference,
                              int bins) {
  std::vector<double> pooled;
  for (const auto& v : gated_values) pooled.insert(pooled.end(), v.begin(), v.end());
  if (pooled.empty()) throw Error(ErrorCode::AllGatedOut, "no coherence values survived the motion gate");
  return js_distance(coherence_histogram(pooled, bins), reference);
}

template <typename T>
double action_strength(std::span<const T> flow_mag) {
  if (flow_mag.empty()) throw Error(ErrorCode::Empty, "no flow magnitudes");
  double sum = 0.0;
  for (T v : flow_mag) sum += static_cast<double>(v);
  return sum / static_cast<double>(flow_mag.size());
}

enum class GateVerdict { Pass, Static, Chaotic };

constexpr std::string_view to_string(GateVerdict v) noexcept {
  switch (v) {
    case GateVerdict::Pass: return "PASS";
    case GateVerdict::Static: return "STATIC";
    case GateVerdict::Chaotic: return "CHAOTIC";
  }
  return "UNKNOWN";
}

/// Inclusive on both ends.
inline GateVerdict motion_gate(double score, double lo, double hi) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidConfig, "motion gate needs lo < hi");
  if (std::isnan(score) || score < lo) return GateVerdict::Static;
  if (score > hi) return GateVerdict::Chaotic;
  return GateVerdict::Pass;
}

}  // namespace cinebench::temporal
