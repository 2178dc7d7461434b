// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "facade/commands.hpp"
#include "facade/lafr.hpp"
#include "facade/metrics.hpp"
#include "facade/synth.hpp"
#include "facade/vit.hpp"
#include "geometry_oracle.hpp"
#include "lafr_oracle.hpp"
#include "metrics_oracle.hpp"
#include "test_util.hpp"

using namespace facade;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Shared by criteria 1 and 2: the 100-facade suite, revised once.
struct SuiteRun {
  std::vector<Fixture> fixtures;
  std::vector<RevisionResult> results;
  double seconds = 0.0;
};

const SuiteRun& suite() {
  static const SuiteRun run = [] {
    SuiteRun r;
    CorruptionParams c;
    c.jitter_amplitude = 3;
    c.dropout = 0.05;
    for (std::uint64_t seed = 0; seed < 100; ++seed) r.fixtures.push_back(make_fixture(FacadeSpec{}, c, seed));
    const auto t0 = Clock::now();
    for (const auto& fx : r.fixtures) r.results.push_back(run_lafr(fx.image, fx.pred, {}));
    r.seconds = seconds_since(t0);
    return r;
  }();
  return run;
}

Outcome revision_gain() {
  const auto& s = suite();
  double gain = 0;
  int improved = 0, anchors = 0, complete = 0;
  for (std::size_t i = 0; i < s.fixtures.size(); ++i) {
    const double before = *class_iou(s.fixtures[i].gt, s.fixtures[i].pred, cls::kWindow);
    const double after = *class_iou(s.fixtures[i].gt, s.results[i].revised, cls::kWindow);
    gain += after - before;
    improved += after > before;
    for (const auto& a : s.results[i].assignments) {
      ++anchors;
      complete += a.complete();
    }
  }
  const double n = static_cast<double>(s.fixtures.size());
  const double gain_pp = 100.0 * gain / n, improved_pct = 100.0 * improved / n;
  const double filled_pct = 100.0 * complete / anchors;
  return {gain_pp >= 3.0 && improved_pct >= 80.0 && filled_pct >= 70.0 && s.seconds < 60.0,
          fmt("mean window IoU %+.2f pp (>= 3), improved %.0f%% (>= 80), four edges filled %.1f%% of %d anchors "
              "(>= 70), %.2f s (< 60)",
              gain_pp, improved_pct, filled_pct, anchors, s.seconds)};
}

Outcome locality() {
  const auto& s = suite();
  std::size_t stray = 0, self_touched = 0, neighbour_covered = 0, discards = 0;
  for (std::size_t i = 0; i < s.fixtures.size(); ++i) {
    const LabelMask& in = s.fixtures[i].pred;
    const auto& res = s.results[i];
    // Pixels each revised anchor may write: its component plus its rectangle.
    BinaryMask allowed(in.width(), in.height());
    for (std::size_t b = 0; b < res.instances.size(); ++b) {
      if (!res.assignments[b].integrated) continue;
      for (const Point& p : res.instances[b].component.pixels) allowed.set(p.x, p.y, true);
      if (auto px = rasterize(*res.assignments[b].integrated, in.width(), in.height()))
        for (int y = px->top; y <= px->bottom; ++y)
          for (int x = px->left; x <= px->right; ++x) allowed.set(x, y, true);
    }
    for (int y = 0; y < in.height(); ++y)
      for (int x = 0; x < in.width(); ++x) stray += !allowed.at(x, y) && in.at(x, y) != res.revised.at(x, y);
    // A discarded anchor writes nothing; changes inside its box must come from a revised neighbour.
    for (std::size_t b = 0; b < res.instances.size(); ++b) {
      if (res.assignments[b].complete()) continue;
      ++discards;
      const PixelRect& r = res.instances[b].anchor;
      bool own = false, covered = false;
      for (int y = r.top; y <= r.bottom; ++y)
        for (int x = r.left; x <= r.right; ++x) {
          if (in.at(x, y) == res.revised.at(x, y)) continue;
          (allowed.at(x, y) ? covered : own) = true;
        }
      self_touched += own;
      neighbour_covered += covered;
    }
  }
  return {stray == 0 && self_touched == 0,
          fmt("%zu changed pixels outside components and rectangles; %zu of %zu blank-edge anchors changed by "
              "their own revision (%zu overlapped by a revised neighbour)",
              stray, self_touched, discards, neighbour_covered)};
}

Outcome filtering_oracle() {
  std::mt19937_64 rng(20240601);
  int mismatches = 0, filled = 0;
  const LafrParams p;
  for (int t = 0; t < 1000; ++t) {
    const auto c = oracle::random_assign_case(rng);
    WindowInstance inst;
    inst.anchor = c.anchor;
    inst.component.bounding_rect = c.anchor;
    const auto got = assign_segments(inst, c.segments, p);
    const auto want = oracle::brute_force_assign(c.anchor, c.segments, p.delta, p.theta, p.overlap_ratio);
    bool same = true;
    for (int e = 0; e < 4; ++e) {
      if (got.edges[e].has_value() != want[e].has_value()) same = false;
      else if (want[e]) same = same && got.edges[e]->segment == want[e]->segment && got.edges[e]->distance == want[e]->distance;
    }
    mismatches += !same;
    filled += got.filled();
  }
  return {mismatches == 0, fmt("%d / 1000 cases differ from brute force (%d edge slots filled)", mismatches, filled)};
}

Outcome metrics_oracle() {
  std::mt19937_64 rng(77);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const auto g = oracle::random_label_mask(64, 64, 9, rng);
    const auto p = oracle::random_label_mask(64, 64, 9, rng);
    const auto r = evaluate(accumulate(ConfusionMatrix(9), g, p));
    const auto o = oracle::brute_force_scores({&g}, {&p}, 9);
    for (double d : {r.acc - o.acc, r.class_avg - o.class_avg, r.f1_macro - o.f1, r.miou - o.miou})
      worst = std::max(worst, std::abs(d));
  }
  ConfusionMatrix hand(2);
  hand.at(0, 0) = 1;
  hand.at(0, 1) = 1;
  hand.at(1, 1) = 2;
  const auto h = evaluate(hand);
  const bool hand_ok = std::abs(h.acc - 0.75) < 1e-12 && std::abs(h.miou - 0.58333) < 5e-6 &&
                       std::abs(h.class_avg - 0.83333) < 5e-6 && std::abs(*h.per_class[1].f1 - 0.8) < 1e-12;
  return {worst <= 1e-12 && hand_ok,
          fmt("max deviation %.1e over 50 pairs (<= 1e-12); hand example Acc %.5f mIoU %.5f Class_avg %.5f F1(1) %.5f",
              worst, h.acc, h.miou, h.class_avg, *h.per_class[1].f1)};
}

Outcome lsd_recovery() {
  std::mt19937_64 rng(5150);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int ok = 0;
  double worst_end = 0, worst_ang = 0;
  for (int t = 0; t < 20; ++t) {
    const int w = uni(80, 220), h = uni(80, 220);
    const int rw = uni(24, w - 20), rh = uni(24, h - 20);
    const int left = uni(8, w - rw - 8), top = uni(8, h - rh - 8);
    const PixelRect r{top, top + rh - 1, left, left + rw - 1};
    const float bg = static_cast<float>(uni(0, 100)), fg = static_cast<float>(uni(160, 255));
    ImageBuffer img(w, h, 1, bg);
    for (int y = r.top; y <= r.bottom; ++y)
      for (int x = r.left; x <= r.right; ++x) img.at(x, y) = fg;
    const auto m = oracle::match_rectangle(detect_lines(img), r);
    worst_end = std::max(worst_end, m.endpoint_error);
    worst_ang = std::max(worst_ang, m.angle_error);
    ok += m.matched && m.endpoint_error <= 2.0 && m.angle_error <= std::numbers::pi / 180.0;
  }
  std::size_t constant_segs = 0;
  for (float v : {0.0f, 97.0f, 255.0f}) constant_segs += detect_lines(ImageBuffer(128, 96, 1, v)).size();
  return {ok == 20 && constant_segs == 0,
          fmt("%d / 20 rectangles with 4 dominant segments, worst endpoint %.2f px, worst angle %.3f deg; "
              "%zu segments on constant images",
              ok, worst_end, worst_ang * 180.0 / std::numbers::pi, constant_segs)};
}

Outcome efficiency() {
  FacadeSpec spec;
  spec.width = 2560;
  spec.height = 1440;
  spec.rows = 6;
  spec.cols = 14;
  spec.window_width = 110;
  spec.window_height = 130;
  spec.margin_left = 70;
  spec.margin_top = 160;
  spec.spacing_x = 65;
  spec.spacing_y = 75;
  spec.frame = 6;
  spec.sky_height = 60;
  spec.roof_height = 40;
  const Fixture fx = make_fixture(spec, {}, 1);
  double total = 0;
  int revised = 0;
  for (int i = 0; i < 5; ++i) {
    const auto t0 = Clock::now();
    const auto res = run_lafr(fx.image, fx.pred, {});
    total += seconds_since(t0);
    revised = res.stats.revised;
  }
  const double mean = total / 5;
  return {mean < 1.67, fmt("2560x1440 revision stage %.3f s mean of 5 (< 1.67), %d of %d anchors revised", mean,
                           revised, spec.rows * spec.cols)};
}

Outcome vit_invariants() {
  using namespace facade::vit;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto random_matrix = [&](int r, int c) {
    Matrix<double> m(r, c);
    for (auto& v : m.data()) v = nd(rng);
    return m;
  };

  VitConfig cfg;
  const auto w = make_weights(cfg, 16);
  AttentionTrace trace;
  forward_scores(random_matrix(16, 16 * 16 * 3), w, cfg, &trace);
  double row_err = 0;
  for (const auto& p : trace.probabilities)
    for (int i = 0; i < p.rows(); ++i) {
      double s = 0;
      for (int j = 0; j < p.cols(); ++j) s += p(i, j);
      row_err = std::max(row_err, std::abs(s - 1.0));
    }

  const Matrix<double> patches = random_matrix(16, 16 * 16 * 3);
  std::vector<int> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix<double> permuted(16, patches.cols());
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < patches.cols(); ++j) permuted(i, j) = patches(perm[i], j);
  auto no_pos = [&](const Matrix<double>& p) {
    return decode_mask(encoder_forward(embed(p, w, false), std::span<const LayerWeights<double>>(w.encoder), cfg.heads),
                       w, cfg);
  };
  const auto a = no_pos(patches), b = no_pos(permuted);
  double perm_err = 0;
  for (int i = 0; i < 16; ++i)
    for (int k = 0; k < a.cols(); ++k) perm_err = std::max(perm_err, std::abs(b(i, k) - a(perm[i], k)));

  const int n_tokens = prepare_patches(ImageBuffer(448, 448, 3), 16).rows();

  VitConfig small;
  small.patch = 8;
  small.dim = 16;
  small.decoder_heads = 4;
  small.classes = 4;
  const auto ws = make_weights(small, 4);
  const Matrix<double> x = random_matrix(4, 8 * 8 * 3), dir = random_matrix(4, 8 * 8 * 3);
  Matrix<Dual<double>> xd(4, x.cols());
  for (std::size_t i = 0; i < x.data().size(); ++i) xd.data()[i] = {x.data()[i], dir.data()[i]};
  const auto sd = forward_scores(xd, cast_weights<Dual<double>>(ws), small);
  auto shifted = [&](double h) {
    Matrix<double> p = x;
    for (std::size_t i = 0; i < p.data().size(); ++i) p.data()[i] += h * dir.data()[i];
    return forward_scores(p, ws, small);
  };
  const auto up = shifted(1e-5), down = shifted(-1e-5);
  double err = 0, norm = 0;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      const double fd = (up(i, k) - down(i, k)) / 2e-5;
      err += (fd - sd(i, k).d) * (fd - sd(i, k).d);
      norm += sd(i, k).d * sd(i, k).d;
    }
  const double fd_rel = std::sqrt(err / norm);

  const std::filesystem::path data = FACADE_TEST_DATA;
  VitConfig golden;
  golden.classes = 4;
  golden.seed = 3;
  const bool golden_ok = segment_forward(load_image_png(data / "vit_golden_input.png"), golden) ==
                         load_mask_png(data / "vit_golden_mask.png", 4);

  return {row_err <= 1e-6 && perm_err <= 1e-5 && n_tokens == 784 && fd_rel <= 1e-3 && golden_ok,
          fmt("row sum err %.1e (<= 1e-6), permutation err %.1e (<= 1e-5), N=%d (784), finite-difference rel err "
              "%.1e (<= 1e-3), golden mask %s",
              row_err, perm_err, n_tokens, fd_rel, golden_ok ? "reproduced" : "DIFFERS")};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  testutil::TempDir dir;
  cli::SynthOptions so;
  so.count = 12;
  so.seed = 0;
  so.out = dir / "suite";
  cli::cmd_synth(so);
  auto run = [&](const std::string& name, int jobs) {
    cli::PipelineConfig cfg;
    cfg.input_dir = so.out;
    cfg.output_dir = dir / name;
    cfg.jobs = jobs;
    std::ostringstream log;
    cli::cmd_pipeline(cfg, log);
    auto tree = testutil::snapshot_tree(cfg.output_dir);
    tree["<stdout>"] = log.str();
    return tree;
  };
  const auto s1 = run("serial1", 1), s2 = run("serial2", 1);
  const auto p1 = run("parallel1", 4), p2 = run("parallel2", 8);
  const bool same = s1 == s2 && s1 == p1 && s1 == p2;
  return {same && s1.size() > 12,
          fmt("%zu output files; serial/serial %s, serial/parallel(4) %s, serial/parallel(8) %s", s1.size() - 1,
              s1 == s2 ? "identical" : "DIFFER", s1 == p1 ? "identical" : "DIFFER",
              s1 == p2 ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 revision gain", revision_gain},
      {"2 locality and discards", locality},
      {"3 filtering oracle", filtering_oracle},
      {"4 metrics oracle", metrics_oracle},
      {"5 line recovery", lsd_recovery},
      {"6 efficiency", efficiency},
      {"7 transformer invariants", vit_invariants},
      {"8 end-to-end determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  [%s] %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d / %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
