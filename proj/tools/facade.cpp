// facade: batch front end for line detection, mask revision, evaluation,
// synthetic fixtures and the toy segmenter.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "facade/commands.hpp"

namespace {

using namespace facade;
using namespace facade::cli;

void add_lsd_options(CLI::App* cmd, LsdParams& lsd) {
  cmd->add_option("--lsd-scale", lsd.scale, "LSD downscale factor")->capture_default_str();
  cmd->add_option("--lsd-epsilon", lsd.nfa_epsilon, "LSD NFA threshold")->capture_default_str();
}

void add_lafr_options(CLI::App* cmd, LafrParams& p) {
  cmd->add_option("--delta", p.delta, "Max distance from segment to anchor edge, pixels")
      ->capture_default_str();
  cmd->add_option("--theta", p.theta, "Max angle gap to edge orientation, radians")
      ->capture_default_str();
  cmd->add_option("--overlap", p.overlap_ratio, "Min projected overlap with the edge (0 disables)")
      ->capture_default_str();
  cmd->add_option("--min-area", p.min_component_area, "Drop window components below this area")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Window-outline revision of facade segmentation masks"};
  app.require_subcommand(1);

  // detect-lines
  DetectLinesOptions dl;
  auto* detect = app.add_subcommand("detect-lines", "Blur an image and write detected line segments");
  detect->add_option("--image", dl.image, "Input PNG")->required();
  detect->add_option("--out", dl.out, "Output segments JSON")->required();
  add_lsd_options(detect, dl.lsd);

  // revise
  ReviseOptions rv;
  std::string rv_palette, rv_report, rv_lines, rv_debug, rv_replacement;
  auto* revise = app.add_subcommand("revise", "Snap predicted windows to line-framed rectangles");
  revise->add_option("--image", rv.image, "Input PNG")->required();
  revise->add_option("--mask", rv.mask, "Preliminary label mask PNG")->required();
  revise->add_option("--out", rv.out, "Revised mask PNG")->required();
  revise->add_option("--palette", rv_palette, "Palette JSON (default: the nine facade classes)");
  revise->add_option("--report", rv_report, "Report JSON (default: <out>.report.json)");
  revise->add_option("--lines", rv_lines, "Precomputed segments JSON");
  revise->add_option("--debug-dir", rv_debug, "Directory for intermediate images");
  revise->add_option("--window-class", rv.window_class, "Window class name")->capture_default_str();
  revise->add_option("--replacement-class", rv_replacement, "Fallback class for cleared pixels");
  revise->add_option("--alpha", rv.overlay_alpha, "Overlay alpha")->capture_default_str();
  add_lafr_options(revise, rv.lafr);
  add_lsd_options(revise, rv.lsd);

  // eval
  EvalOptions ev;
  std::string ev_palette, ev_out;
  auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval->add_option("--pred", ev.pred_dir, "Directory of predicted masks")->required();
  eval->add_option("--gt", ev.gt_dir, "Directory of ground-truth masks")->required();
  eval->add_option("--palette", ev_palette, "Palette JSON");
  eval->add_option("--out", ev_out, "Metrics JSON");

  // synth
  SynthOptions sy;
  auto* synth = app.add_subcommand("synth", "Write synthetic facades with corrupted predictions");
  synth->add_option("--out", sy.out, "Output directory")->required();
  synth->add_option("--count", sy.count, "Number of facades")->capture_default_str();
  synth->add_option("--seed", sy.seed, "First seed")->capture_default_str();
  synth->add_option("--width", sy.spec.width)->capture_default_str();
  synth->add_option("--height", sy.spec.height)->capture_default_str();
  synth->add_option("--rows", sy.spec.rows)->capture_default_str();
  synth->add_option("--cols", sy.spec.cols)->capture_default_str();
  synth->add_option("--window-width", sy.spec.window_width)->capture_default_str();
  synth->add_option("--window-height", sy.spec.window_height)->capture_default_str();
  synth->add_option("--margin-left", sy.spec.margin_left)->capture_default_str();
  synth->add_option("--margin-top", sy.spec.margin_top)->capture_default_str();
  synth->add_option("--spacing-x", sy.spec.spacing_x)->capture_default_str();
  synth->add_option("--spacing-y", sy.spec.spacing_y)->capture_default_str();
  synth->add_option("--shear", sy.spec.shear, "Window shear, pixels per row")->capture_default_str();
  synth->add_option("--noise", sy.spec.noise_sigma, "Gaussian noise sigma")->capture_default_str();
  synth->add_option("--amplitude", sy.corruption.jitter_amplitude, "Boundary jitter, pixels")
      ->capture_default_str();
  synth->add_option("--dropout", sy.corruption.dropout)->capture_default_str();
  synth->add_option("--blobs", sy.corruption.blob_count)->capture_default_str();
  synth->add_option("--blob-radius", sy.corruption.blob_radius)->capture_default_str();

  // segment-toy
  SegmentToyOptions st;
  auto* toy = app.add_subcommand("segment-toy", "Run the randomly initialised transformer segmenter");
  toy->add_option("--image", st.image, "Input PNG")->required();
  toy->add_option("--out", st.out, "Output mask PNG")->required();
  toy->add_option("--patch", st.config.patch)->capture_default_str();
  toy->add_option("--dim", st.config.dim)->capture_default_str();
  toy->add_option("--layers", st.config.layers)->capture_default_str();
  toy->add_option("--heads", st.config.heads)->capture_default_str();
  toy->add_option("--classes", st.config.classes)->capture_default_str();
  toy->add_option("--seed", st.config.seed)->capture_default_str();

  // pipeline
  std::string pl_config;
  std::string pl_input, pl_output, pl_palette, pl_window;
  double pl_delta = 0, pl_theta = 0, pl_alpha = 0;
  int pl_jobs = 0;
  bool pl_no_overlays = false;
  auto* pipeline = app.add_subcommand("pipeline", "Revise a directory of fixtures and report before/after metrics");
  pipeline->add_option("--config", pl_config, "Flat JSON config")->required();
  auto* o_input = pipeline->add_option("--input-dir", pl_input);
  auto* o_output = pipeline->add_option("--output-dir", pl_output);
  auto* o_palette = pipeline->add_option("--palette", pl_palette);
  auto* o_window = pipeline->add_option("--window-class", pl_window);
  auto* o_delta = pipeline->add_option("--delta", pl_delta);
  auto* o_theta = pipeline->add_option("--theta", pl_theta);
  auto* o_jobs = pipeline->add_option("--jobs", pl_jobs, "Worker threads");
  auto* o_alpha = pipeline->add_option("--alpha", pl_alpha, "Overlay alpha");
  pipeline->add_flag("--no-overlays", pl_no_overlays, "Skip overlay images");

  CLI11_PARSE(app, argc, argv);

  auto opt_path = [](const std::string& s) -> std::optional<std::filesystem::path> {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
  };

  try {
    if (detect->parsed()) {
      const auto segs = cmd_detect_lines(dl);
      std::cout << segs.size() << " segments -> " << dl.out.string() << '\n';
    } else if (revise->parsed()) {
      rv.palette = opt_path(rv_palette);
      rv.report = opt_path(rv_report);
      rv.lines = opt_path(rv_lines);
      rv.debug_dir = opt_path(rv_debug);
      if (!rv_replacement.empty()) rv.replacement_class = rv_replacement;
      const auto res = cmd_revise(rv);
      std::cout << "anchors " << res.stats.total << "  revised " << res.stats.revised << "  discarded "
                << res.stats.discarded << '\n';
    } else if (eval->parsed()) {
      ev.palette = opt_path(ev_palette);
      ev.out = opt_path(ev_out);
      cmd_eval(ev, std::cout);
    } else if (synth->parsed()) {
      cmd_synth(sy);
      std::cout << sy.count << " facades -> " << sy.out.string() << '\n';
    } else if (toy->parsed()) {
      cmd_segment_toy(st);
    } else if (pipeline->parsed()) {
      PipelineConfig cfg = load_pipeline_config(pl_config);
      if (*o_input) cfg.input_dir = pl_input;
      if (*o_output) cfg.output_dir = pl_output;
      if (*o_palette) cfg.palette = pl_palette;
      if (*o_window) cfg.window_class = pl_window;
      if (*o_delta) cfg.lafr.delta = pl_delta;
      if (*o_theta) cfg.lafr.theta = pl_theta;
      if (*o_jobs) cfg.jobs = pl_jobs;
      if (*o_alpha) cfg.overlay_alpha = pl_alpha;
      if (pl_no_overlays) cfg.overlays = false;
      cmd_pipeline(cfg, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "facade: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return EXIT_SUCCESS;
}
