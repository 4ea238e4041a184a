#include "detrefine/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <set>
#include <thread>

#include "detrefine/adaptive_labeling.hpp"
#include "detrefine/expander.hpp"
#include "detrefine/fusion.hpp"
#include "detrefine/tracker.hpp"

namespace detrefine {
namespace {

struct VideoOutcome {
  FrameSet video;
  std::vector<Correction> corrections;
  StageCounts counts;
};

VideoOutcome process_video(FrameSet fs, const PipelineConfig& cfg) {
  VideoOutcome out;
  out.counts.fused = fs.total_detections();

  const std::vector<Track> tracks = run_video(fs, cfg.tracker);
  for (const Track& t : tracks) out.counts.tracked += t.history.size();

  if (cfg.enable_adaptive_labeling) {
    out.corrections = refine_video(fs, tracks, cfg.refine);
    for (const Correction& c : out.corrections) {
      if (c.action == CorrectionAction::relabel) {
        ++out.counts.relabeled;
      } else {
        ++out.counts.removed;
      }
    }
  }

  if (cfg.enable_expander) {
    FrameSet expanded;
    expanded.video_id = fs.video_id;
    for (const auto& [frame, dets] : fs.frames) {
      std::vector<Detection> grown =
          expand_frame(dedup_overlaps(dets, cfg.expander), cfg.expander);
      grown = cap_top_k(grown, cfg.top_k);
      if (!grown.empty()) expanded.frames.emplace(frame, std::move(grown));
    }
    fs = std::move(expanded);
  }

  for (const auto& [frame, dets] : fs.frames) {
    for (const Detection& d : dets) {
      if (d.origin == Origin::virtual_box) ++out.counts.virtuals;
    }
  }
  out.counts.output = fs.total_detections();
  out.video = std::move(fs);
  return out;
}

}  // namespace

PipelineResult run_pipeline(const std::vector<std::vector<FrameSet>>& inputs,
                            const PipelineConfig& cfg, int jobs) {
  PipelineResult result;
  if (inputs.empty()) return result;

  std::size_t input_count = 0;
  for (const std::vector<FrameSet>& source : inputs) {
    for (const FrameSet& fs : source) input_count += fs.total_detections();
  }
  result.counts.input = input_count;

  // Collapse the sources into one detection set per video.
  std::vector<FrameSet> videos;
  if (inputs.size() == 1) {
    videos = inputs[0];
    std::sort(videos.begin(), videos.end(),
              [](const FrameSet& a, const FrameSet& b) {
                return a.video_id < b.video_id;
              });
  } else {
    if (!cfg.enable_fusion) {
      throw ValidationError(
          "several detection sources need fusion enabled to combine them");
    }
    std::set<int> ids;
    for (const std::vector<FrameSet>& source : inputs) {
      for (const FrameSet& fs : source) ids.insert(fs.video_id);
    }
    for (int id : ids) {
      std::vector<FrameSet> aligned;
      aligned.reserve(inputs.size());
      for (const std::vector<FrameSet>& source : inputs) {
        auto it = std::find_if(
            source.begin(), source.end(),
            [id](const FrameSet& fs) { return fs.video_id == id; });
        if (it != source.end()) {
          aligned.push_back(*it);
        } else {
          FrameSet blank;
          blank.video_id = id;
          aligned.push_back(blank);
        }
      }
      videos.push_back(fuse_video(aligned, cfg.fusion));
    }
  }

  // Each video is independent; spread them over workers. Results land in
  // slots indexed by position, so thread scheduling cannot reorder them.
  const int n = static_cast<int>(videos.size());
  std::vector<VideoOutcome> outcomes(n);
  std::vector<std::exception_ptr> failures(n);
  const int workers = std::max(1, std::min(jobs, n));

  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      outcomes[i] = process_video(std::move(videos[i]), cfg);
    }
  } else {
    std::atomic<int> next{0};
    auto work = [&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          outcomes[i] = process_video(std::move(videos[i]), cfg);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
    for (int i = 0; i < n; ++i) {
      if (failures[i]) std::rethrow_exception(failures[i]);
    }
  }

  for (VideoOutcome& out : outcomes) {
    const int video_id = out.video.video_id;
    for (Correction& c : out.corrections) {
      result.corrections.emplace_back(video_id, std::move(c));
    }
    result.counts.fused += out.counts.fused;
    result.counts.tracked += out.counts.tracked;
    result.counts.relabeled += out.counts.relabeled;
    result.counts.removed += out.counts.removed;
    result.counts.virtuals += out.counts.virtuals;
    result.counts.output += out.counts.output;
    result.videos.push_back(std::move(out.video));
  }
  return result;
}

}  // namespace detrefine
