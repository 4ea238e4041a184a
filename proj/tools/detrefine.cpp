// Command line driver: each subcommand exposes one stage of the chain,
// plus `pipeline` for the whole thing and `synth` for generating test
// data. Exit codes: 0 success, 1 bad arguments or bad data, 2 I/O failure.
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detrefine/config.hpp"
#include "detrefine/detfile.hpp"
#include "detrefine/eval.hpp"
#include "detrefine/expander.hpp"
#include "detrefine/fusion.hpp"
#include "detrefine/harness.hpp"
#include "detrefine/pipeline.hpp"
#include "detrefine/tracker.hpp"

namespace {

using namespace detrefine;

// Writes to the file when a path is set, otherwise to stdout.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw IoError("cannot write " + path);
      path_ = path;
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void finish() {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw IoError("failed writing " + path_);
    }
  }

 private:
  std::ofstream file_;
  std::string path_;
};

struct CommonOpts {
  std::string config_path;
  bool strict = false;
  std::optional<int> top_k;
  bool disable_al = false;
  bool disable_ce = false;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path,
                  "JSON configuration file")
      ->envname("DETREFINE_CONFIG");
  cmd->add_flag("--strict", opts.strict,
                "fail on the first malformed input line instead of "
                "skipping it");
  cmd->add_option("--top-k", opts.top_k,
                  "per-frame detection budget after expansion");
  cmd->add_flag("--disable-al", opts.disable_al,
                "skip track-based label correction");
  cmd->add_flag("--disable-ce", opts.disable_ce,
                "skip context expansion");
  cmd->add_option("--jobs", opts.jobs, "worker threads across videos")
      ->check(CLI::PositiveNumber);
}

PipelineConfig build_config(const CommonOpts& opts) {
  PipelineConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = load_pipeline_config(opts.config_path);
  }
  if (opts.top_k) cfg.top_k = *opts.top_k;
  if (opts.disable_al) cfg.enable_adaptive_labeling = false;
  if (opts.disable_ce) cfg.enable_expander = false;
  return cfg;
}

std::vector<FrameSet> read_detections(const std::string& path, bool strict) {
  std::vector<std::string> rejects;
  std::vector<FrameSet> videos = load_detections(path, strict, &rejects);
  for (const std::string& r : rejects) std::cerr << "skipped " << r << '\n';
  return videos;
}

std::vector<GroundTruth> read_ground_truth(const std::string& path,
                                           bool strict) {
  std::vector<std::string> rejects;
  std::vector<GroundTruth> gts = load_ground_truth(path, strict, &rejects);
  for (const std::string& r : rejects) std::cerr << "skipped " << r << '\n';
  return gts;
}

void print_counts(const StageCounts& c) {
  std::cerr << "input=" << c.input << " fused=" << c.fused
            << " tracked=" << c.tracked << " relabeled=" << c.relabeled
            << " removed=" << c.removed << " virtuals=" << c.virtuals
            << " output=" << c.output << '\n';
}

int run_track(const std::vector<std::string>& inputs,
              const std::string& out_path, const CommonOpts& opts) {
  const PipelineConfig cfg = build_config(opts);
  OutputTarget out(out_path);
  for (const std::string& path : inputs) {
    for (const FrameSet& fs : read_detections(path, opts.strict)) {
      const std::vector<Track> tracks = run_video(fs, cfg.tracker);
      // Rows sorted by frame then original detection position.
      std::vector<const TrackObservation*> rows;
      std::vector<int> row_track;
      for (const Track& t : tracks) {
        for (const TrackObservation& obs : t.history) {
          rows.push_back(&obs);
          row_track.push_back(t.id);
        }
      }
      std::vector<std::size_t> order(rows.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) {
                  if (rows[a]->frame != rows[b]->frame)
                    return rows[a]->frame < rows[b]->frame;
                  return rows[a]->det_index < rows[b]->det_index;
                });
      for (std::size_t i : order) {
        const Detection& d = rows[i]->det;
        out.stream() << fs.video_id << ',' << rows[i]->frame << ','
                     << row_track[i] << ',' << format_double(d.box.left)
                     << ',' << format_double(d.box.top) << ','
                     << format_double(d.box.width) << ','
                     << format_double(d.box.height) << ',' << d.label << ','
                     << format_double(d.confidence) << '\n';
      }
    }
  }
  out.finish();
  return 0;
}

int run_pipeline_cmd(const std::vector<std::string>& inputs,
                     const std::string& out_path,
                     const std::string& journal_path,
                     const std::string& gt_path, const CommonOpts& opts,
                     bool force_no_expand) {
  PipelineConfig cfg = build_config(opts);
  if (force_no_expand) cfg.enable_expander = false;

  std::vector<std::vector<FrameSet>> sources;
  sources.reserve(inputs.size());
  for (const std::string& path : inputs) {
    sources.push_back(read_detections(path, opts.strict));
  }

  const PipelineResult result = run_pipeline(sources, cfg, opts.jobs);

  OutputTarget out(out_path);
  write_detections(out.stream(), result.videos);
  out.finish();

  if (!journal_path.empty()) {
    std::ofstream journal(journal_path);
    if (!journal) throw IoError("cannot write " + journal_path);
    write_corrections(journal, result.corrections);
    if (!journal) throw IoError("failed writing " + journal_path);
  }
  if (!gt_path.empty()) {
    const std::vector<GroundTruth> gts =
        read_ground_truth(gt_path, opts.strict);
    const EvalReport report = evaluate(result.videos, gts, cfg.top_k);
    // Detections own stdout when no output file was named; the report then
    // moves to stderr so the streams stay separable.
    write_eval_report(out_path.empty() ? std::cerr : std::cout, report);
  }
  print_counts(result.counts);
  return 0;
}

int run_expand(const std::string& input, const std::string& out_path,
               const CommonOpts& opts) {
  const PipelineConfig cfg = build_config(opts);
  std::vector<FrameSet> videos = read_detections(input, opts.strict);
  for (FrameSet& fs : videos) {
    FrameSet grown;
    grown.video_id = fs.video_id;
    for (const auto& [frame, dets] : fs.frames) {
      std::vector<Detection> expanded =
          expand_frame(dedup_overlaps(dets, cfg.expander), cfg.expander);
      expanded = cap_top_k(expanded, cfg.top_k);
      if (!expanded.empty()) grown.frames.emplace(frame, std::move(expanded));
    }
    fs = std::move(grown);
  }
  OutputTarget out(out_path);
  write_detections(out.stream(), videos);
  out.finish();
  return 0;
}

int run_fuse(const std::vector<std::string>& inputs,
             const std::string& out_path, const CommonOpts& opts) {
  PipelineConfig cfg = build_config(opts);
  cfg.enable_adaptive_labeling = false;
  cfg.enable_expander = false;
  cfg.enable_fusion = true;
  // Reuse the pipeline's source alignment but stop after fusion: turn the
  // remaining stages off and keep the tracker from filtering anything.
  std::vector<std::vector<FrameSet>> sources;
  for (const std::string& path : inputs) {
    sources.push_back(read_detections(path, opts.strict));
  }
  if (sources.size() < 2) {
    throw ValidationError("fuse needs at least two input files");
  }
  std::set<int> ids;
  for (const auto& source : sources) {
    for (const FrameSet& fs : source) ids.insert(fs.video_id);
  }
  std::vector<FrameSet> fused;
  for (int id : ids) {
    std::vector<FrameSet> aligned;
    for (const auto& source : sources) {
      auto it = std::find_if(source.begin(), source.end(),
                             [id](const FrameSet& fs) {
                               return fs.video_id == id;
                             });
      if (it != source.end()) {
        aligned.push_back(*it);
      } else {
        FrameSet blank;
        blank.video_id = id;
        aligned.push_back(blank);
      }
    }
    fused.push_back(fuse_video(aligned, cfg.fusion));
  }
  OutputTarget out(out_path);
  write_detections(out.stream(), fused);
  out.finish();
  return 0;
}

int run_eval(const std::string& pred_path, const std::string& gt_path,
             bool as_json, const CommonOpts& opts) {
  const PipelineConfig cfg = build_config(opts);
  const std::vector<FrameSet> preds = read_detections(pred_path, opts.strict);
  const std::vector<GroundTruth> gts =
      read_ground_truth(gt_path, opts.strict);
  const EvalReport report = evaluate(preds, gts, cfg.top_k);
  if (as_json) {
    std::cout << eval_report_json(report) << '\n';
  } else {
    write_eval_report(std::cout, report);
  }
  return 0;
}

int run_synth(const std::string& scenario_path, const std::string& out_path,
              const std::string& truth_path, const std::string& journal_path,
              const std::string& pristine_path,
              std::optional<std::uint64_t> seed,
              std::optional<double> flip_rate, std::optional<double> drop_rate,
              std::optional<double> jitter_px,
              const std::string& flip_mode) {
  ScenarioFile file;
  if (!scenario_path.empty()) {
    file = load_scenario(scenario_path);
  } else {
    file.scenario = demo_scenario();
  }
  if (flip_rate || drop_rate || jitter_px || seed || !flip_mode.empty()) {
    file.has_corruption = true;
    if (flip_rate) file.corruption.flip_rate = *flip_rate;
    if (drop_rate) file.corruption.drop_rate = *drop_rate;
    if (jitter_px) file.corruption.jitter_px = *jitter_px;
    if (seed) file.corruption.seed = *seed;
    if (!flip_mode.empty()) {
      if (flip_mode == "per_detection") {
        file.corruption.flip_mode = FlipMode::per_detection;
      } else if (flip_mode == "one_per_track") {
        file.corruption.flip_mode = FlipMode::one_per_track;
      } else {
        throw ValidationError("unknown flip mode '" + flip_mode + "'");
      }
    }
  }

  const GeneratedScene scene = generate(file.scenario);
  if (!pristine_path.empty()) {
    save_detections(pristine_path, {scene.detections});
  }
  if (!truth_path.empty()) {
    save_ground_truth(truth_path, scene.truth);
  }

  FrameSet final_dets = scene.detections;
  std::vector<CorruptionEvent> journal;
  if (file.has_corruption) {
    CorruptionResult corrupted = corrupt(scene, file.corruption);
    final_dets = std::move(corrupted.detections);
    journal = std::move(corrupted.journal);
  }
  OutputTarget out(out_path);
  write_detections(out.stream(), {final_dets});
  out.finish();

  if (!journal_path.empty()) {
    std::ofstream jf(journal_path);
    if (!jf) throw IoError("cannot write " + journal_path);
    write_corruption_journal(jf, journal);
    if (!jf) throw IoError("failed writing " + journal_path);
  }
  std::cerr << "frames=" << file.scenario.num_frames
            << " detections=" << final_dets.total_detections()
            << " events=" << journal.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Post-processing for motorcycle helmet detection: tracking, label "
      "correction, context expansion, fusion, and scoring"};
  app.require_subcommand(1);

  CommonOpts opts;

  // track
  auto* track = app.add_subcommand(
      "track", "assign track ids to detections");
  std::vector<std::string> track_inputs;
  std::string track_out;
  track->add_option("input", track_inputs, "detection files")->required();
  track->add_option("-o,--out", track_out, "output file (default stdout)");
  add_common(track, opts);

  // refine
  auto* refine = app.add_subcommand(
      "refine", "track detections and correct unstable labels");
  std::vector<std::string> refine_inputs;
  std::string refine_out, refine_journal;
  refine->add_option("input", refine_inputs, "detection files")->required();
  refine->add_option("-o,--out", refine_out, "output file (default stdout)");
  refine->add_option("--journal", refine_journal,
                     "write applied corrections here");
  add_common(refine, opts);

  // expand
  auto* expand = app.add_subcommand(
      "expand", "add plausible low-confidence boxes to each frame");
  std::string expand_input, expand_out;
  expand->add_option("input", expand_input, "detection file")->required();
  expand->add_option("-o,--out", expand_out, "output file (default stdout)");
  add_common(expand, opts);

  // fuse
  auto* fuse = app.add_subcommand(
      "fuse", "merge detection files from several detectors");
  std::vector<std::string> fuse_inputs;
  std::string fuse_out;
  fuse->add_option("input", fuse_inputs, "detection files")->required();
  fuse->add_option("-o,--out", fuse_out, "output file (default stdout)");
  add_common(fuse, opts);

  // eval
  auto* eval_cmd = app.add_subcommand(
      "eval", "score predictions against ground truth");
  std::string eval_pred, eval_gt;
  bool eval_json = false;
  eval_cmd->add_option("predictions", eval_pred, "prediction file")
      ->required();
  eval_cmd->add_option("--gt", eval_gt, "ground truth file")->required();
  eval_cmd->add_flag("--json", eval_json, "emit the report as JSON");
  add_common(eval_cmd, opts);

  // synth
  auto* synth = app.add_subcommand(
      "synth", "generate synthetic detections with optional damage");
  std::string synth_scenario, synth_out, synth_truth, synth_journal,
      synth_pristine, synth_flip_mode;
  std::optional<std::uint64_t> synth_seed;
  std::optional<double> synth_flip_rate, synth_drop_rate, synth_jitter;
  synth->add_option("--scenario", synth_scenario, "scenario JSON file");
  synth->add_option("-o,--out", synth_out, "output file (default stdout)");
  synth->add_option("--truth", synth_truth, "write ground truth here");
  synth->add_option("--journal", synth_journal,
                    "write the damage journal here");
  synth->add_option("--pristine", synth_pristine,
                    "write the undamaged detections here");
  synth->add_option("--seed", synth_seed, "damage seed");
  synth->add_option("--flip-rate", synth_flip_rate,
                    "label flip probability");
  synth->add_option("--drop-rate", synth_drop_rate,
                    "detection drop probability");
  synth->add_option("--jitter", synth_jitter, "box jitter in pixels");
  synth->add_option("--flip-mode", synth_flip_mode,
                    "per_detection or one_per_track");

  // pipeline
  auto* pipe = app.add_subcommand(
      "pipeline", "run the full post-processing chain");
  std::vector<std::string> pipe_inputs;
  std::string pipe_out, pipe_journal, pipe_gt;
  pipe->add_option("input", pipe_inputs, "detection files")->required();
  pipe->add_option("-o,--out", pipe_out, "output file (default stdout)");
  pipe->add_option("--journal", pipe_journal,
                   "write applied corrections here");
  pipe->add_option("--gt", pipe_gt,
                   "score the refined output against this ground truth");
  add_common(pipe, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (track->parsed()) return run_track(track_inputs, track_out, opts);
    if (refine->parsed()) {
      return run_pipeline_cmd(refine_inputs, refine_out, refine_journal, "",
                              opts, /*force_no_expand=*/true);
    }
    if (expand->parsed()) return run_expand(expand_input, expand_out, opts);
    if (fuse->parsed()) return run_fuse(fuse_inputs, fuse_out, opts);
    if (eval_cmd->parsed()) {
      return run_eval(eval_pred, eval_gt, eval_json, opts);
    }
    if (synth->parsed()) {
      return run_synth(synth_scenario, synth_out, synth_truth, synth_journal,
                       synth_pristine, synth_seed, synth_flip_rate,
                       synth_drop_rate, synth_jitter, synth_flip_mode);
    }
    if (pipe->parsed()) {
      return run_pipeline_cmd(pipe_inputs, pipe_out, pipe_journal, pipe_gt,
                              opts, /*force_no_expand=*/false);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
