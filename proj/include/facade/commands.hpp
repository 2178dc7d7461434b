#pragma once

// Batch front end: each cmd_* function backs one subcommand of the `facade`
// executable. Failures are reported as exceptions; exit_code_for() maps them.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "facade/error.hpp"
#include "facade/lafr.hpp"
#include "facade/lsd.hpp"
#include "facade/metrics.hpp"
#include "facade/palette.hpp"
#include "facade/png_io.hpp"
#include "facade/render.hpp"
#include "facade/report.hpp"
#include "facade/synth.hpp"
#include "facade/vit.hpp"

namespace facade::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kBadInput = 3, kUnknownClass = 4 };

class UnknownClassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const UnknownClassError*>(&e)) return kUnknownClass;
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e) ||
      dynamic_cast<const std::out_of_range*>(&e) || dynamic_cast<const std::domain_error*>(&e))
    return kBadInput;
  return kUsage;
}

// Re-throws the active exception with `context` prepended, keeping its type.
[[noreturn]] inline void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const IoError& e) {
    throw IoError(context + ": " + e.what());
  } catch (const UnknownClassError& e) {
    throw UnknownClassError(context + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(context + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(context + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw std::out_of_range(context + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw std::domain_error(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(context + ": " + e.what());
  }
}

inline Palette load_palette(const std::optional<fs::path>& path) {
  return path ? Palette::load(*path) : Palette::cfp();
}

inline int resolve_class(const Palette& palette, const std::string& name) {
  if (auto idx = palette.index_of(name)) return *idx;
  throw UnknownClassError("class '" + name + "' is not in the palette");
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------- detect-lines

struct DetectLinesOptions {
  fs::path image;
  fs::path out;
  LafrParams lafr;  // only the blur steps are used
  LsdParams lsd;
};

inline std::vector<LineSegment> cmd_detect_lines(const DetectLinesOptions& opt) {
  const ImageBuffer img = load_image_png(opt.image);
  auto segs = acquire_lines(img, opt.lafr, opt.lsd);
  write_json(opt.out, segments_to_json(segs));
  return segs;
}

// ---------------------------------------------------------------------- revise

struct ReviseOptions {
  fs::path image;
  fs::path mask;
  std::optional<fs::path> palette;
  fs::path out;
  std::optional<fs::path> report;  // default: <out stem>.report.json
  std::optional<fs::path> lines;
  std::optional<fs::path> debug_dir;
  std::string window_class = "window";
  std::optional<std::string> replacement_class;
  LafrParams lafr;
  LsdParams lsd;
  double overlay_alpha = 0.5;
};

inline fs::path default_report_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension();
  return fs::path(p.string() + ".report.json");
}

// Intermediate images: window mask, all lines, integrated lines, revised mask.
inline void write_debug(const fs::path& dir, const ImageBuffer& image, const LabelMask& prelim,
                        const RevisionResult& res, const LafrParams& params, double alpha) {
  ensure_dir(dir);
  save_image_png(dir / "window_mask.png",
                 binary_to_image(BinaryMask::from_class(prelim, params.window_class)));
  ImageBuffer all = to_rgb(image);
  for (const auto& s : res.segments) draw_segment(all, s, {255, 0, 0});
  save_image_png(dir / "lines_all.png", all);
  ImageBuffer integ = to_rgb(image);
  for (const auto& a : res.assignments) {
    if (!a.integrated) continue;
    for (Edge e : kEdges) draw_segment(integ, res.segments.at(a.slot(e)->segment), {255, 0, 0});
    draw_rect(integ, *a.integrated, {0, 255, 0});
  }
  save_image_png(dir / "lines_integrated.png", integ);
  save_image_png(dir / "revised_mask.png", colorize(res.revised));
  save_image_png(dir / "overlay.png", overlay(image, res.revised, alpha));
}

inline RevisionResult cmd_revise(const ReviseOptions& opt) {
  const Palette palette = load_palette(opt.palette);
  LafrParams params = opt.lafr;
  params.window_class = resolve_class(palette, opt.window_class);
  if (opt.replacement_class) params.replacement_class = resolve_class(palette, *opt.replacement_class);

  const ImageBuffer image = load_image_png(opt.image);
  const LabelMask prelim = load_mask_png(opt.mask, palette.size());
  if (image.width() != prelim.width() || image.height() != prelim.height())
    throw FormatError("image " + opt.image.string() + " and mask " + opt.mask.string() +
                      " differ in size");

  RevisionResult res = opt.lines
                           ? revise_with_segments(prelim, segments_from_json(read_json(*opt.lines)), params)
                           : run_lafr(image, prelim, params, opt.lsd);
  if (opt.out.has_parent_path()) ensure_dir(opt.out.parent_path());
  save_mask_png(opt.out, res.revised);
  write_json(opt.report.value_or(default_report_path(opt.out)), revision_to_json(res));
  if (opt.debug_dir) write_debug(*opt.debug_dir, image, prelim, res, params, opt.overlay_alpha);
  return res;
}

// ------------------------------------------------------------------------ eval

struct EvalOptions {
  fs::path pred_dir;
  fs::path gt_dir;
  std::optional<fs::path> palette;
  std::optional<fs::path> out;
};

inline std::vector<std::string> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

// One line: Acc Class_avg F1 mIoU.
inline void print_headline(std::ostream& os, const MetricsReport& r) {
  os << "Acc " << std::fixed << std::setprecision(4) << r.acc << "  Class_avg " << r.class_avg
     << "  F1 " << r.f1_macro << "  mIoU " << r.miou << '\n';
  os.unsetf(std::ios::floatfield);
}

inline MetricsReport cmd_eval(const EvalOptions& opt, std::ostream& os) {
  const Palette palette = load_palette(opt.palette);
  const auto preds = list_pngs(opt.pred_dir);
  const auto gts = list_pngs(opt.gt_dir);
  if (preds.empty() && gts.empty()) throw FormatError("no PNG masks to evaluate");
  std::vector<std::string> unpaired;
  std::set_symmetric_difference(preds.begin(), preds.end(), gts.begin(), gts.end(),
                                std::back_inserter(unpaired));
  if (!unpaired.empty()) throw FormatError("unpaired mask file: " + unpaired.front());

  ConfusionMatrix cm(palette.size());
  for (const auto& name : preds) {
    const LabelMask gt = load_mask_png(opt.gt_dir / name, palette.size());
    const LabelMask pred = load_mask_png(opt.pred_dir / name, palette.size());
    if (!gt.same_shape(pred)) throw FormatError("dimension mismatch for " + name);
    cm.accumulate(gt, pred);
  }
  const MetricsReport report = evaluate(cm);
  print_headline(os, report);
  if (opt.out) write_json(*opt.out, to_json(report, palette.names()));
  return report;
}

// ----------------------------------------------------------------------- synth

struct SynthOptions {
  FacadeSpec spec;
  CorruptionParams corruption;
  int count = 1;
  std::uint64_t seed = 0;
  fs::path out;
};

inline std::string indexed_name(const std::string& prefix, int i) {
  std::ostringstream os;
  os << prefix << '_' << std::setw(4) << std::setfill('0') << i << ".png";
  return os.str();
}

inline void cmd_synth(const SynthOptions& opt) {
  if (opt.count < 1) throw std::invalid_argument("synth: count must be >= 1");
  opt.spec.validate();
  opt.corruption.validate();
  ensure_dir(opt.out);
  ojson seeds = ojson::array();
  for (int i = 0; i < opt.count; ++i) {
    const std::uint64_t seed = opt.seed + static_cast<std::uint64_t>(i);
    const Fixture fx = make_fixture(opt.spec, opt.corruption, seed);
    save_image_png(opt.out / indexed_name("img", i), fx.image);
    save_mask_png(opt.out / indexed_name("gt", i), fx.gt);
    save_mask_png(opt.out / indexed_name("pred", i), fx.pred);
    seeds.push_back(seed);
  }
  ojson manifest;
  manifest["count"] = opt.count;
  manifest["seed"] = opt.seed;
  manifest["spec"] = to_json(opt.spec);
  manifest["corruption"] = to_json(opt.corruption);
  manifest["seeds"] = seeds;
  manifest["palette"] = Palette::cfp().to_json()["classes"];
  write_json(opt.out / "manifest.json", manifest);
}

// ----------------------------------------------------------------- segment-toy

struct SegmentToyOptions {
  fs::path image;
  vit::VitConfig config;
  fs::path out;
};

inline LabelMask cmd_segment_toy(const SegmentToyOptions& opt) {
  const ImageBuffer img = load_image_png(opt.image);
  const LabelMask mask = vit::segment_forward(img, opt.config);
  if (opt.out.has_parent_path()) ensure_dir(opt.out.parent_path());
  save_mask_png(opt.out, mask);
  return mask;
}

// -------------------------------------------------------------------- pipeline

struct PipelineConfig {
  fs::path input_dir;
  fs::path output_dir;
  std::optional<fs::path> palette;
  std::string window_class = "window";
  LafrParams lafr;
  LsdParams lsd;
  std::optional<vit::VitConfig> segmenter;  // used when no pred_*.png exists
  int jobs = 1;
  double overlay_alpha = 0.5;
  bool overlays = true;
};

// Reads a flat JSON document. Relative paths resolve against the config file.
inline PipelineConfig load_pipeline_config(const fs::path& path) {
  const nlohmann::json j = read_json(path);
  if (!j.is_object()) throw FormatError("pipeline config must be a JSON object");
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  PipelineConfig c;
  try {
    if (!j.contains("input_dir") || !j.contains("output_dir"))
      throw FormatError("pipeline config needs input_dir and output_dir");
    c.input_dir = resolve(j.at("input_dir").get<std::string>());
    c.output_dir = resolve(j.at("output_dir").get<std::string>());
    if (j.contains("palette")) c.palette = resolve(j.at("palette").get<std::string>());
    c.window_class = j.value("window_class", c.window_class);
    c.lafr.delta = j.value("delta", c.lafr.delta);
    c.lafr.theta = j.value("theta", c.lafr.theta);
    c.lafr.overlap_ratio = j.value("overlap_ratio", c.lafr.overlap_ratio);
    c.lafr.min_component_area = j.value("min_area", c.lafr.min_component_area);
    c.lafr.morph_radius = j.value("morph_radius", c.lafr.morph_radius);
    c.lafr.morph_iterations = j.value("morph_iterations", c.lafr.morph_iterations);
    c.lsd.nfa_epsilon = j.value("lsd_epsilon", c.lsd.nfa_epsilon);
    c.lsd.scale = j.value("lsd_scale", c.lsd.scale);
    c.jobs = j.value("jobs", c.jobs);
    c.overlay_alpha = j.value("overlay_alpha", c.overlay_alpha);
    c.overlays = j.value("overlays", c.overlays);
    const std::string seg = j.value("segmenter", std::string("none"));
    if (seg == "toy") {
      vit::VitConfig v;
      v.patch = j.value("toy_patch", v.patch);
      v.dim = j.value("toy_dim", v.dim);
      v.layers = j.value("toy_layers", v.layers);
      v.heads = j.value("toy_heads", v.heads);
      v.seed = j.value("toy_seed", v.seed);
      c.segmenter = v;
    } else if (seg != "none") {
      throw FormatError("segmenter must be \"none\" or \"toy\"");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("pipeline config " + path.string() + ": " + e.what());
  }
  return c;
}

struct PipelineItem {
  std::string key;  // e.g. "0003" from img_0003.png
  RevisionStats stats;
  std::optional<ConfusionMatrix> before;
  std::optional<ConfusionMatrix> after;
  std::optional<double> window_before;
  std::optional<double> window_after;
  bool segmented = false;
};

inline std::vector<std::string> pipeline_keys(const fs::path& dir) {
  std::vector<std::string> keys;
  for (const auto& name : list_pngs(dir))
    if (name.rfind("img_", 0) == 0) keys.push_back(name.substr(4, name.size() - 8));
  if (keys.empty()) throw FormatError("no img_*.png inputs in " + dir.string());
  return keys;
}

inline PipelineItem run_pipeline_item(const PipelineConfig& cfg, const Palette& palette,
                                      const LafrParams& params, const std::string& key) {
  PipelineItem item;
  item.key = key;
  std::string stage = "load";
  try {
    const ImageBuffer image = load_image_png(cfg.input_dir / ("img_" + key + ".png"));
    const fs::path pred_path = cfg.input_dir / ("pred_" + key + ".png");
    LabelMask prelim;
    if (fs::exists(pred_path)) {
      prelim = load_mask_png(pred_path, palette.size());
    } else if (cfg.segmenter) {
      stage = "segment";
      vit::VitConfig v = *cfg.segmenter;
      v.classes = palette.size();
      prelim = vit::segment_forward(image, v);
      save_mask_png(cfg.output_dir / ("prelim_" + key + ".png"), prelim);
      item.segmented = true;
    } else {
      throw FormatError("missing " + pred_path.filename().string() + " and no segmenter configured");
    }
    stage = "revise";
    const RevisionResult res = run_lafr(image, prelim, params, cfg.lsd);
    item.stats = res.stats;
    stage = "write";
    save_mask_png(cfg.output_dir / ("revised_" + key + ".png"), res.revised);
    write_json(cfg.output_dir / ("report_" + key + ".json"), revision_to_json(res));
    if (cfg.overlays)
      save_image_png(cfg.output_dir / ("overlay_" + key + ".png"), overlay(image, res.revised, cfg.overlay_alpha));
    stage = "evaluate";
    const fs::path gt_path = cfg.input_dir / ("gt_" + key + ".png");
    if (fs::exists(gt_path)) {
      const LabelMask gt = load_mask_png(gt_path, palette.size());
      item.before = accumulate(ConfusionMatrix(palette.size()), gt, prelim);
      item.after = accumulate(ConfusionMatrix(palette.size()), gt, res.revised);
      item.window_before = class_iou(gt, prelim, params.window_class);
      item.window_after = class_iou(gt, res.revised, params.window_class);
    }
  } catch (...) {
    rethrow_with_context("pipeline img_" + key + " [" + stage + "]");
  }
  return item;
}

// Applies `fn` to indices 0..n-1 on up to `jobs` threads; results keep index order.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, int jobs, F&& fn) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

inline ojson cmd_pipeline(const PipelineConfig& cfg, std::ostream& os) {
  const Palette palette = load_palette(cfg.palette);
  LafrParams params = cfg.lafr;
  params.window_class = resolve_class(palette, cfg.window_class);
  params.validate(palette.size());
  cfg.lsd.validate();
  if (cfg.jobs < 1) throw std::invalid_argument("pipeline: jobs must be >= 1");
  ensure_dir(cfg.output_dir);

  const auto keys = pipeline_keys(cfg.input_dir);
  const auto items = parallel_map<PipelineItem>(keys.size(), cfg.jobs, [&](std::size_t i) {
    return run_pipeline_item(cfg, palette, params, keys[i]);
  });

  ojson report;
  report["config"] = {{"window_class", cfg.window_class},
                      {"delta", params.delta},
                      {"theta", params.theta},
                      {"overlap_ratio", params.overlap_ratio},
                      {"min_area", params.min_component_area},
                      {"morph_radius", params.morph_radius},
                      {"morph_iterations", params.morph_iterations},
                      {"lsd_epsilon", cfg.lsd.nfa_epsilon},
                      {"lsd_scale", cfg.lsd.scale},
                      {"segmenter", cfg.segmenter ? "toy" : "none"}};
  ojson images = ojson::array();
  ConfusionMatrix before(palette.size()), after(palette.size());
  bool have_gt = false;
  for (const auto& it : items) {
    ojson row;
    row["name"] = "img_" + it.key + ".png";
    row["segmented"] = it.segmented;
    row["anchors"] = it.stats.total;
    row["revised"] = it.stats.revised;
    row["discarded"] = it.stats.discarded;
    row["window_iou_before"] = it.window_before ? ojson(*it.window_before) : ojson(nullptr);
    row["window_iou_after"] = it.window_after ? ojson(*it.window_after) : ojson(nullptr);
    images.push_back(row);
    if (it.before) {
      have_gt = true;
      before += *it.before;
      after += *it.after;
    }
  }
  report["images"] = images;

  if (have_gt) {
    const MetricsReport mb = evaluate(before), ma = evaluate(after);
    report["metrics"] = {{"before", to_json(mb, palette.names())}, {"after", to_json(ma, palette.names())}};
    ojson table = ojson::array();
    os << "class        IoU before  IoU after   delta\n";
    for (int k = 0; k < palette.size(); ++k) {
      const auto& b = mb.per_class[k].iou;
      const auto& a = ma.per_class[k].iou;
      ojson row;
      row["class"] = palette.name(k);
      row["before"] = b ? ojson(*b) : ojson(nullptr);
      row["after"] = a ? ojson(*a) : ojson(nullptr);
      row["delta"] = (a && b) ? ojson(*a - *b) : ojson(nullptr);
      const bool highlight = k == params.window_class || palette.name(k) == "building";
      row["highlight"] = highlight;
      table.push_back(row);
      if (!a && !b) continue;
      os << (highlight ? '*' : ' ') << std::left << std::setw(11) << palette.name(k) << std::right
         << std::fixed << std::setprecision(4) << std::setw(10) << b.value_or(0.0) << std::setw(11)
         << a.value_or(0.0) << std::showpos << std::setw(10) << (a.value_or(0.0) - b.value_or(0.0))
         << std::noshowpos << '\n';
    }
    os.unsetf(std::ios::floatfield);
    report["per_class_iou"] = table;
    const auto wb = mb.per_class[params.window_class].iou;
    const auto wa = ma.per_class[params.window_class].iou;
    report["window_iou_delta"] = (wa && wb) ? ojson(*wa - *wb) : ojson(nullptr);
    os << "before: ";
    print_headline(os, mb);
    os << "after:  ";
    print_headline(os, ma);
  }
  write_json(cfg.output_dir / "report.json", report);
  return report;
}

}  // namespace facade::cli
