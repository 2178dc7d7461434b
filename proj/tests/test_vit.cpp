#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "facade/png_io.hpp"
#include "facade/vit.hpp"

using namespace facade;
using namespace facade::vit;

namespace {

Matrix<double> identity(int n) {
  Matrix<double> m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

LayerWeights<double> plain_layer(int d) {
  LayerWeights<double> l;
  l.ln1_gamma = l.ln2_gamma = Matrix<double>(1, d, 1.0);
  l.ln1_beta = l.ln2_beta = Matrix<double>(1, d, 0.0);
  l.wq = l.wk = l.wv = l.wo = identity(d);
  l.bq = l.bk = l.bv = l.bo = Matrix<double>(1, d, 0.0);
  l.w1 = Matrix<double>(d, d);
  l.b1 = Matrix<double>(1, d);
  l.w2 = Matrix<double>(d, d);
  l.b2 = Matrix<double>(1, d);
  return l;
}

Matrix<double> random_matrix(int r, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix<double> m(r, c);
  for (auto& v : m.data()) v = n(rng);
  return m;
}

ImageBuffer pattern_image(int w, int h) {
  ImageBuffer img(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const bool box = x >= 12 && x < 40 && y >= 20 && y < 52;
      img.at(x, y) = box ? 60.0f : static_cast<float>((3 * x + 5 * y) % 256);
    }
  return img;
}

}  // namespace

TEST(Patchify, TokenCount) {
  EXPECT_EQ(prepare_patches(ImageBuffer(448, 448, 3), 16).rows(), 784);
  EXPECT_EQ(prepare_patches(ImageBuffer(448, 448, 3), 16).cols(), 16 * 16 * 3);
}

TEST(Patchify, SinglePatchIsWholeImage) {
  ImageBuffer img(8, 8, 3);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<float>(x + 8 * y + 64 * c);
  const auto p = patchify(img, 8);
  ASSERT_EQ(p.rows(), 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(p(0, (y * 8 + x) * 3 + c), img.at(x, y, c));
}

TEST(Patchify, RoundTrip) {
  const ImageBuffer img = pattern_image(64, 48);
  EXPECT_EQ(unpatchify(patchify(img, 16), 16, 64, 48, 1), img);
  EXPECT_THROW(patchify(ImageBuffer(60, 48, 1), 16), std::invalid_argument);
}

TEST(Attention, SingletonToken) {
  const int d = 4;
  std::mt19937_64 rng(3);
  auto w = vit::detail::make_layer(d, 8, rng);
  const Matrix<double> x = random_matrix(1, d, 4);
  AttentionTrace trace;
  const auto out = msa(x, w, 2, &trace);
  for (const auto& p : trace.probabilities) EXPECT_EQ(p(0, 0), 1.0);
  const auto want = linear(linear(x, w.wv, w.bv), w.wo, w.bo);
  for (int j = 0; j < d; ++j) EXPECT_NEAR(out(0, j), want(0, j), 1e-15);
}

TEST(Attention, RowsSumToOne) {
  VitConfig cfg;
  cfg.dim = 32;
  const auto w = make_weights(cfg, 12);
  AttentionTrace trace;
  forward_scores(random_matrix(12, 16 * 16 * 3, 5), w, cfg, &trace);
  ASSERT_EQ(trace.probabilities.size(),
            static_cast<std::size_t>(cfg.layers * cfg.heads + cfg.decoder_layers * cfg.decoder_heads));
  for (const auto& p : trace.probabilities)
    for (int i = 0; i < p.rows(); ++i) {
      double s = 0;
      for (int j = 0; j < p.cols(); ++j) s += p(i, j);
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
}

TEST(Attention, TwoTokenHandOracle) {
  // Identity projections, one head, D = 2: scores = x x^T / sqrt(2).
  const auto w = plain_layer(2);
  Matrix<double> x(2, 2);
  x(0, 0) = 1.0;
  x(0, 1) = 2.0;
  x(1, 0) = -1.0;
  x(1, 1) = 0.5;
  const double s00 = (1 + 4) / std::sqrt(2.0), s01 = (-1 + 1) / std::sqrt(2.0);
  const double s10 = s01, s11 = (1 + 0.25) / std::sqrt(2.0);
  const double p00 = std::exp(s00) / (std::exp(s00) + std::exp(s01)), p01 = 1 - p00;
  const double p10 = std::exp(s10) / (std::exp(s10) + std::exp(s11)), p11 = 1 - p10;
  const auto out = msa(x, w, 1);
  EXPECT_NEAR(out(0, 0), p00 * 1.0 + p01 * -1.0, 1e-12);
  EXPECT_NEAR(out(0, 1), p00 * 2.0 + p01 * 0.5, 1e-12);
  EXPECT_NEAR(out(1, 0), p10 * 1.0 + p11 * -1.0, 1e-12);
  EXPECT_NEAR(out(1, 1), p10 * 2.0 + p11 * 0.5, 1e-12);
}

TEST(Encoder, ZeroDepthIsIdentity) {
  const Matrix<double> s = random_matrix(5, 8, 1);
  const auto out = encoder_forward(s, std::span<const LayerWeights<double>>(), 2);
  for (std::size_t i = 0; i < s.data().size(); ++i) EXPECT_EQ(out.data()[i], s.data()[i]);
}

TEST(Encoder, ShapePreserved) {
  VitConfig cfg;
  cfg.dim = 24;
  cfg.heads = 3;
  cfg.decoder_heads = 4;
  const auto w = make_weights(cfg, 7);
  const auto out = encoder_forward(random_matrix(7, 24, 2), std::span<const LayerWeights<double>>(w.encoder), 3);
  EXPECT_EQ(out.rows(), 7);
  EXPECT_EQ(out.cols(), 24);
}

TEST(Encoder, PermutationEquivariantWithoutPositions) {
  VitConfig cfg;
  cfg.patch = 8;
  cfg.dim = 32;
  const int n = 9;
  const auto w = make_weights(cfg, n);
  const Matrix<double> patches = random_matrix(n, 8 * 8 * 3, 6);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
  Matrix<double> permuted(n, patches.cols());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < patches.cols(); ++j) permuted(i, j) = patches(perm[i], j);
  auto run = [&](const Matrix<double>& p) {
    const auto s = encoder_forward(embed(p, w, false), std::span<const LayerWeights<double>>(w.encoder), cfg.heads);
    return decode_mask(s, w, cfg);
  };
  const auto a = run(patches), b = run(permuted);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < a.cols(); ++k) EXPECT_NEAR(b(i, k), a(perm[i], k), 1e-5);
}

TEST(Decoder, HandCaseWithoutLayers) {
  VitConfig cfg;
  cfg.dim = 2;
  cfg.heads = 1;
  cfg.decoder_heads = 1;
  cfg.decoder_layers = 0;
  cfg.classes = 2;
  WeightSet<double> w;
  w.class_tokens = Matrix<double>(2, 2);
  w.class_tokens(0, 0) = 1.0;
  w.class_tokens(0, 1) = -1.0;
  w.class_tokens(1, 0) = 0.5;
  w.class_tokens(1, 1) = 2.0;
  Matrix<double> s(2, 2);
  s(0, 0) = 3.0;
  s(0, 1) = 1.0;
  s(1, 0) = -2.0;
  s(1, 1) = 4.0;
  const auto scores = decode_mask(s, w, cfg);
  EXPECT_DOUBLE_EQ(scores(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(scores(0, 1), 3.5);
  EXPECT_DOUBLE_EQ(scores(1, 0), -6.0);
  EXPECT_DOUBLE_EQ(scores(1, 1), 7.0);
}

TEST(Decoder, OutputShape) {
  VitConfig cfg;
  cfg.dim = 16;
  cfg.classes = 5;
  const auto w = make_weights(cfg, 6);
  const auto scores = forward_scores(random_matrix(6, 16 * 16 * 3, 9), w, cfg);
  EXPECT_EQ(scores.rows(), 6);
  EXPECT_EQ(scores.cols(), 5);
}

TEST(Upsample, SingleClassIsConstant) {
  VitConfig cfg;
  cfg.classes = 1;
  const LabelMask m = segment_forward(pattern_image(64, 64), cfg);
  for (auto v : m.data()) EXPECT_EQ(v, 0);
}

TEST(Upsample, BilinearArgmax) {
  // Two patches side by side, two classes with opposite scores: the boundary
  // falls halfway between the patch centres.
  Matrix<double> scores(2, 2);
  scores(0, 0) = 1.0;
  scores(1, 1) = 1.0;
  const LabelMask m = upsample_argmax(scores, 2, 1, 4, 2);
  for (int x = 0; x < 8; ++x) EXPECT_EQ(m.at(x, 0), x < 4 ? 0 : 1) << x;
}

TEST(SegmentForward, ContractAndDeterminism) {
  VitConfig cfg;
  cfg.dim = 32;
  const ImageBuffer img = pattern_image(64, 48);
  const LabelMask a = segment_forward(img, cfg), b = segment_forward(img, cfg);
  EXPECT_EQ(a.width(), 64);
  EXPECT_EQ(a.height(), 48);
  EXPECT_NO_THROW(a.validate());
  EXPECT_EQ(a, b);
}

TEST(SegmentForward, DualMatchesFiniteDifference) {
  VitConfig cfg;
  cfg.patch = 8;
  cfg.dim = 16;
  cfg.decoder_heads = 4;
  cfg.classes = 4;
  const int n = 4;
  const auto w = make_weights(cfg, n);
  const auto wd = cast_weights<Dual<double>>(w);
  const Matrix<double> x = random_matrix(n, 8 * 8 * 3, 12);
  const Matrix<double> dir = random_matrix(n, 8 * 8 * 3, 13);

  Matrix<Dual<double>> xd(n, x.cols());
  for (std::size_t i = 0; i < x.data().size(); ++i) xd.data()[i] = {x.data()[i], dir.data()[i]};
  const auto sd = forward_scores(xd, wd, cfg);

  auto shifted = [&](double h) {
    Matrix<double> p = x;
    for (std::size_t i = 0; i < p.data().size(); ++i) p.data()[i] += h * dir.data()[i];
    return forward_scores(p, w, cfg);
  };
  const double h = 1e-5;
  const auto up = shifted(h), down = shifted(-h);
  const auto plain = forward_scores(x, w, cfg);
  double err = 0, norm = 0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < cfg.classes; ++k) {
      const double fd = (up(i, k) - down(i, k)) / (2 * h);
      const double ad = sd(i, k).d;
      EXPECT_NEAR(sd(i, k).v, plain(i, k), 1e-12);
      err += (fd - ad) * (fd - ad);
      norm += ad * ad;
    }
  ASSERT_GT(norm, 0.0);
  EXPECT_LE(std::sqrt(err / norm), 1e-3);
}

TEST(SegmentForward, GoldenMask) {
  const std::filesystem::path dir = FACADE_TEST_DATA;
  VitConfig cfg;
  cfg.classes = 4;
  cfg.seed = 3;
  const ImageBuffer img = load_image_png(dir / "vit_golden_input.png");
  const LabelMask want = load_mask_png(dir / "vit_golden_mask.png", 4);
  EXPECT_EQ(segment_forward(img, cfg), want);
}
