#include <gtest/gtest.h>

#include <cmath>

#include "cinebench/similarity/similarity.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace cinebench;
using similarity::EmbeddingSeries;

namespace {

struct Series {
  std::vector<float> data;
  std::size_t rows = 0, dim = 0;
  EmbeddingSeries view() const { return EmbeddingSeries(data, rows, dim); }
};

Series series(const std::vector<std::vector<float>>& rows) {
  Series s;
  s.rows = rows.size();
  s.dim = rows.empty() ? 0 : rows[0].size();
  for (const auto& r : rows) s.data.insert(s.data.end(), r.begin(), r.end());
  return s;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

const MetricConfig kCfg{};

}  // namespace

TEST(Cosine, BasicCases) {
  const std::vector<float> a{1, 2, 3}, b{-1, -2, -3};
  EXPECT_DOUBLE_EQ(similarity::cosine(a, a), 1.0);
  EXPECT_DOUBLE_EQ(similarity::cosine(a, b), -1.0);
  EXPECT_DOUBLE_EQ(similarity::cosine(std::vector<float>{1, 0}, std::vector<float>{0, 1}), 0.0);
  EXPECT_EQ(code_of([] { similarity::cosine(std::vector<float>{0, 0}, std::vector<float>{1, 0}); }), ErrorCode::ZeroVector);
}

TEST(RefSubCon, AllEqualIsHundredOrthogonalIsZero) {
  const std::vector<float> ref{1, 0};
  auto same = series({{2, 0}, {5, 0}});
  EXPECT_DOUBLE_EQ(similarity::ref_subject_consistency(ref, std::nullopt, same.view(), std::nullopt, kCfg), 100.0);
  auto ortho = series({{0, 1}, {0, -3}});
  EXPECT_DOUBLE_EQ(similarity::ref_subject_consistency(ref, std::nullopt, ortho.view(), std::nullopt, kCfg), 0.0);
  auto opposite = series({{-1, 0}});
  EXPECT_DOUBLE_EQ(similarity::ref_subject_consistency(ref, std::nullopt, opposite.view(), std::nullopt, kCfg), 0.0);
}

TEST(RefSubCon, DirectArithmeticAndFaceBlending) {
  const std::vector<float> ref{1, 0};
  auto frames = series({{0.8f, 0.6f}, {0.6f, 0.8f}});
  EXPECT_NEAR(similarity::ref_subject_consistency(ref, std::nullopt, frames.view(), std::nullopt, kCfg), 70.0, 1e-5);

  // Face in frame 0 only: 0.5 * 0.0 + 0.5 * 0.8 = 0.4, frame 1 stays 0.6.
  const std::vector<float> ref_face{1, 0};
  auto faces = series({{0, 1}, {0, 0}});
  EXPECT_NEAR(similarity::ref_subject_consistency(ref, std::span<const float>(ref_face), frames.view(), faces.view(), kCfg),
              50.0, 1e-5);
}

TEST(RefSubCon, ZeroRowsAreSkipped) {
  const std::vector<float> ref{1, 0};
  auto frames = series({{0, 0}, {1, 0}});
  EXPECT_DOUBLE_EQ(similarity::ref_subject_consistency(ref, std::nullopt, frames.view(), std::nullopt, kCfg), 100.0);
  auto none = series({{0, 0}});
  EXPECT_EQ(code_of([&] { similarity::ref_subject_consistency(ref, std::nullopt, none.view(), std::nullopt, kCfg); }),
            ErrorCode::NoUsableFrames);
}

TEST(InterSubCon, Examples) {
  auto a = series({{1, 0}, {1, 0}});
  auto b = series({{3, 0}});
  auto c = series({{0.5f, static_cast<float>(std::sqrt(0.75))}});
  EXPECT_NEAR(similarity::inter_subject_consistency({a.view(), b.view()}, std::nullopt, kCfg), 100.0, 1e-9);
  auto o = series({{0, 1}});
  EXPECT_NEAR(similarity::inter_subject_consistency({a.view(), o.view()}, std::nullopt, kCfg), 0.0, 1e-9);
  EXPECT_NEAR(similarity::inter_subject_consistency({a.view(), b.view(), c.view()}, std::nullopt, kCfg), 200.0 / 3.0, 1e-4);
}

TEST(InterSubCon, ShotOrderInvarianceAndErrors) {
  synth::Rng r(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<Series> shots;
    for (int s = 0; s < 4; ++s) {
      std::vector<std::vector<float>> rows;
      for (int k = 0; k < 3; ++k) rows.push_back(synth::random_vector(r, 6));
      shots.push_back(series(rows));
    }
    std::vector<EmbeddingSeries> fwd, rev;
    for (auto& s : shots) fwd.push_back(s.view());
    for (auto it = shots.rbegin(); it != shots.rend(); ++it) rev.push_back(it->view());
    EXPECT_NEAR(similarity::inter_subject_consistency(fwd, std::nullopt, kCfg),
                similarity::inter_subject_consistency(rev, std::nullopt, kCfg), 1e-9);
  }
  auto a = series({{1, 0}});
  auto z = series({{0, 0}});
  EXPECT_EQ(code_of([&] { similarity::inter_subject_consistency({a.view(), z.view()}, std::nullopt, kCfg); }),
            ErrorCode::FewerThanTwoShots);
}

TEST(SceneCon, Examples) {
  auto same = series({{1, 2}, {1, 2}, {2, 4}});
  EXPECT_NEAR(similarity::scene_consistency(same.view()), 1.0, 1e-12);
  auto ortho = series({{1, 0}, {0, 1}});
  EXPECT_NEAR(similarity::scene_consistency(ortho.view()), 0.0, 1e-12);
  // Unit vectors cannot give pairwise cosines {0.9, 0.9, 0.0}, so check the mean over realizable triples.
  const float s = static_cast<float>(std::sqrt(0.19));
  auto fan = series({{0.9f, s, 0}, {0.9f, -s, 0}, {1, 0, 0}});
  EXPECT_NEAR(similarity::scene_consistency(fan.view()), (0.62 + 0.9 + 0.9) / 3.0, 1e-6);
  auto rows = series({{1, 0, 0}, {0, 1, 0}, {0.6f, 0.6f, static_cast<float>(std::sqrt(1 - 0.72))}});
  EXPECT_NEAR(similarity::scene_consistency(rows.view()), (0.0 + 0.6 + 0.6) / 3.0, 1e-6);
  auto one = series({{1, 0}, {0, 0}});
  EXPECT_EQ(code_of([&] { similarity::scene_consistency(one.view()); }), ErrorCode::FewerThanTwoShots);
}

TEST(TextAlign, Means) {
  const std::vector<float> one{0.2359f};
  EXPECT_NEAR(similarity::text_alignment(std::span<const float>(one)), 0.2359, 1e-7);
  const std::vector<double> two{0.1, 0.3};
  EXPECT_NEAR(similarity::text_alignment(std::span<const double>(two)), 0.2, 1e-15);
  EXPECT_EQ(code_of([] { similarity::text_alignment(std::span<const double>()); }), ErrorCode::Empty);
}

TEST(ScaleInvariance, PositiveRescalingChangesNothing) {
  synth::Rng r(5);
  for (int i = 0; i < 50; ++i) {
    std::vector<std::vector<float>> rows, scaled;
    for (int k = 0; k < 4; ++k) {
      rows.push_back(synth::random_vector(r, 5));
      auto v = rows.back();
      const float f = static_cast<float>(std::pow(2.0, r.integer(-5, 5)));
      for (auto& x : v) x *= f;
      scaled.push_back(v);
    }
    auto a = series(rows), b = series(scaled);
    EXPECT_NEAR(similarity::scene_consistency(a.view()), similarity::scene_consistency(b.view()), 1e-9);
    EXPECT_NEAR(similarity::ref_subject_consistency(rows[0], std::nullopt, a.view(), std::nullopt, kCfg),
                similarity::ref_subject_consistency(scaled[0], std::nullopt, b.view(), std::nullopt, kCfg), 1e-9);
  }
}

// --- copy-paste entropy ----------------------------------------------------------

namespace {

Series orthogonal_gallery(std::size_t distractors) {
  std::vector<std::vector<float>> rows;
  for (std::size_t i = 0; i <= distractors; ++i) {
    std::vector<float> v(distractors + 1, 0.0f);
    v[i] = 1.0f;
    rows.push_back(v);
  }
  return series(rows);
}

}  // namespace

TEST(CopyPaste, DuplicateAmongNineOrthogonalDistractors) {
  auto g = orthogonal_gallery(9);
  const auto e = similarity::copy_paste_entropy(g.view().row(0), g.view(), 0.10);
  EXPECT_LT(e.entropy, 0.05);
  EXPECT_EQ(e.argmax, 0u);
  EXPECT_TRUE(similarity::is_copy_frame(e.entropy, e.argmax, 0.10));

  std::vector<double> frame(10, 0.0);
  frame[0] = 1.0;
  std::vector<std::vector<double>> gal;
  for (std::size_t i = 0; i < 10; ++i) gal.emplace_back(g.data.begin() + i * 10, g.data.begin() + (i + 1) * 10);
  EXPECT_NEAR(e.entropy, oracle::softmax_entropy(frame, gal, 0.10), 1e-12);
}

TEST(CopyPaste, UniformSimilarityIsExactlyOne) {
  auto g = orthogonal_gallery(9);
  const std::vector<float> frame(10, 1.0f);
  const auto e = similarity::copy_paste_entropy(frame, g.view(), 0.10);
  EXPECT_EQ(e.entropy, 1.0);
  EXPECT_FALSE(similarity::is_copy_frame(e.entropy, e.argmax, 0.10));
}

TEST(CopyPaste, LargeTemperatureApproachesOne) {
  synth::Rng r(8);
  std::vector<std::vector<float>> rows;
  for (int i = 0; i < 6; ++i) rows.push_back(synth::random_vector(r, 8));
  auto g = series(rows);
  const auto frame = synth::random_vector(r, 8);
  EXPECT_NEAR(similarity::copy_paste_entropy(frame, g.view(), 1e6).entropy, 1.0, 1e-6);
}

TEST(CopyPaste, EntropyIncreasesWithTemperatureAndMatchesOracle) {
  synth::Rng r(9);
  std::vector<std::vector<float>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back(synth::random_vector(r, 12));
  auto g = series(rows);
  const auto frame = synth::jitter(r, rows[0], 0.2);
  std::vector<double> fd(frame.begin(), frame.end());
  std::vector<std::vector<double>> gd;
  for (auto& v : rows) gd.emplace_back(v.begin(), v.end());
  double prev = -1;
  for (double tau : {0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0}) {
    const double e = similarity::copy_paste_entropy(frame, g.view(), tau).entropy;
    EXPECT_GT(e, prev);
    EXPECT_NEAR(e, oracle::softmax_entropy(fd, gd, tau), 1e-9);
    prev = e;
  }
}

TEST(CopyPaste, FlagRequiresReferenceArgmax) {
  auto g = orthogonal_gallery(9);
  const auto e = similarity::copy_paste_entropy(g.view().row(3), g.view(), 0.10);
  EXPECT_LT(e.entropy, 0.05);
  EXPECT_EQ(e.argmax, 3u);
  EXPECT_FALSE(similarity::is_copy_frame(e.entropy, e.argmax, 0.10));
}

TEST(CopyPaste, Errors) {
  auto g = orthogonal_gallery(2);
  EXPECT_EQ(code_of([&] { similarity::copy_paste_entropy(std::vector<float>(3, 0.0f), g.view(), 0.1); }),
            ErrorCode::ZeroVector);
  auto zero_row = series({{1, 0}, {0, 0}});
  EXPECT_EQ(code_of([&] { similarity::copy_paste_entropy(std::vector<float>{1, 0}, zero_row.view(), 0.1); }),
            ErrorCode::ZeroVector);
  auto only_ref = series({{1, 0}});
  EXPECT_EQ(code_of([&] { similarity::copy_paste_entropy(std::vector<float>{1, 0}, only_ref.view(), 0.1); }),
            ErrorCode::Empty);
}

TEST(CpRate, Arithmetic) {
  similarity::FrameCopyStats flagged{{0.01, 0.02}, {0, 0}};
  similarity::FrameCopyStats clean{{0.9, 0.5}, {0, 1}};
  EXPECT_DOUBLE_EQ(similarity::cp_rate({flagged, flagged}, 0.1), 100.0);
  EXPECT_DOUBLE_EQ(similarity::cp_rate({clean}, 0.1), 0.0);
  std::vector<similarity::FrameCopyStats> forty(37, clean);
  forty.insert(forty.end(), 3, flagged);
  EXPECT_NEAR(similarity::cp_rate(forty, 0.1), 7.5, 1e-12);
  EXPECT_EQ(code_of([] { similarity::cp_rate({}, 0.1); }), ErrorCode::Empty);
}

TEST(CpRate, MonotoneInFlaggedFrames) {
  synth::Rng r(10);
  for (int i = 0; i < 100; ++i) {
    std::vector<similarity::FrameCopyStats> seqs(3);
    for (auto& s : seqs)
      for (int f = 0; f < 5; ++f) {
        s.entropies.push_back(r.uni(0, 1));
        s.argmax.push_back(static_cast<std::size_t>(r.integer(0, 2)));
      }
    const double before = similarity::cp_rate(seqs, 0.1);
    auto& s = seqs[static_cast<std::size_t>(r.integer(0, 2))];
    const auto f = static_cast<std::size_t>(r.integer(0, 4));
    s.entropies[f] = 0.0;
    s.argmax[f] = 0;
    EXPECT_GE(similarity::cp_rate(seqs, 0.1), before);
  }
}

// --- subject recall --------------------------------------------------------------

TEST(SubjectRecall, Fractions) {
  std::vector<similarity::Detection> dets = {{1, 0, 0.9, {}}, {2, 0, 0.5, {}}, {3, 1, 0.9, {}}, {3, 0, 0.2, {}}};
  EXPECT_DOUBLE_EQ(similarity::subject_recall(dets, {1, 2}, 0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(similarity::subject_recall(dets, {5, 6}, 0, 0.3), 0.0);
  EXPECT_NEAR(similarity::subject_recall(dets, {1, 2, 3}, 0, 0.3), 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(similarity::subject_recall(dets, {3}, 0, 0.2), 1.0);  // conf_min inclusive
  EXPECT_EQ(code_of([&] { similarity::subject_recall(dets, {}, 0, 0.3); }), ErrorCode::EmptyDesignated);
}

TEST(SubjectRecall, MonotoneInConfidence) {
  synth::Rng r(12);
  std::vector<similarity::Detection> dets;
  for (int i = 0; i < 40; ++i) dets.push_back({r.integer(0, 20), static_cast<int>(r.integer(0, 1)), r.uni(0, 1), {}});
  std::set<std::int64_t> frames;
  for (int f = 0; f < 20; f += 2) frames.insert(f);
  double prev = 2.0;
  for (double c = 0.0; c <= 1.0; c += 0.05) {
    const double v = similarity::subject_recall(dets, frames, 0, c);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(SubjectRecall, DetectionsTensorLayout) {
  Tensor t{{2, 7}, {4, 0, 0.8f, 0.1f, 0.1f, 0.2f, 0.2f, 5, 2, 0.3f, 0, 0, 1, 1}};
  const auto d = similarity::detections_from_tensor(t);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[1].frame, 5);
  EXPECT_EQ(d[1].class_id, 2);
  EXPECT_THROW(similarity::detections_from_tensor(Tensor{{1, 6}, std::vector<float>(6)}), Error);
}
