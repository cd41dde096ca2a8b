// Copyright 2026 The E2E Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "e2e/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "e2e/errors.hpp"

namespace e2e {

namespace {

void require_nonempty(const Episode& episode) {
  if (episode.duration_s <= 0.0) {
    throw SegmentationError(SegmentationError::Kind::kEmptyEpisode,
                            "episode " + episode.episode_id +
                                " has zero duration");
  }
}

// Interior candidates must leave min_clip_s of room on both sides; the
// final boundary is always duration_s so clips keep tiling [0, duration).
std::vector<double> coalesce_boundaries(const std::vector<double>& interior,
                                        double duration, double min_clip_s) {
  std::vector<double> kept{0.0};
  for (double b : interior) {
    if (b - kept.back() >= min_clip_s && duration - b >= min_clip_s) {
      kept.push_back(b);
    }
  }
  kept.push_back(duration);
  return kept;
}

std::vector<Clip> make_clips(const Episode& episode,
                             const std::vector<double>& boundaries,
                             Strategy strategy) {
  std::vector<Clip> clips;
  clips.reserve(boundaries.size() - 1);
  size_t frame = 0;
  for (size_t i = 0; i + 1 < boundaries.size(); ++i) {
    Clip clip;
    clip.clip_id = make_clip_id(episode.episode_id, i);
    clip.t_start = boundaries[i];
    clip.t_end = boundaries[i + 1];
    clip.strategy = strategy;
    while (frame < episode.frames.size() &&
           episode.frames[frame].t < clip.t_start) {
      ++frame;
    }
    size_t f = frame;
    while (f < episode.frames.size() && episode.frames[f].t < clip.t_end) {
      clip.frame_indices.push_back(f);
      ++f;
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

std::vector<double> interior_marker_times(const Episode& episode) {
  std::vector<double> times;
  for (const FrameRecord& f : episode.frames) {
    if (f.event_marker && f.t > 0.0 && f.t < episode.duration_s) {
      times.push_back(f.t);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

}  // namespace

void SegmentationParams::validate() const {
  auto bad = [](const std::string& what) {
    throw SegmentationError(SegmentationError::Kind::kBadParams, what);
  };
  if (!(fixed_interval_s > 0)) bad("fixed_interval_s must be positive");
  if (!(min_tail_fraction > 0) || min_tail_fraction > 1) {
    bad("min_tail_fraction must be in (0, 1]");
  }
  if (!(kinematic_threshold > 0)) bad("kinematic_threshold must be positive");
  if (kinematic_smooth_window <= 0 || kinematic_smooth_window % 2 == 0) {
    bad("kinematic_smooth_window must be a positive odd integer");
  }
  if (!(min_clip_s > 0)) bad("min_clip_s must be positive");
}

std::vector<Clip> segment_fixed(const Episode& episode,
                                const SegmentationParams& params) {
  params.validate();
  require_nonempty(episode);
  const double interval = params.fixed_interval_s;
  const double duration = episode.duration_s;

  size_t n_full = static_cast<size_t>(duration / interval);
  std::vector<double> boundaries;
  if (n_full == 0) {
    boundaries = {0.0, duration};
  } else {
    for (size_t k = 0; k <= n_full; ++k) {
      boundaries.push_back(static_cast<double>(k) * interval);
    }
    double tail = duration - static_cast<double>(n_full) * interval;
    if (tail > 0 && tail >= params.min_tail_fraction * interval) {
      boundaries.push_back(duration);  // tail long enough: own clip
    } else {
      boundaries.back() = duration;  // short or zero tail: absorb
    }
  }
  return make_clips(episode, boundaries, Strategy::kFixed);
}

std::vector<Clip> segment_event(const Episode& episode,
                                const SegmentationParams& params) {
  params.validate();
  require_nonempty(episode);
  std::vector<double> boundaries = coalesce_boundaries(
      interior_marker_times(episode), episode.duration_s, params.min_clip_s);
  return make_clips(episode, boundaries, Strategy::kEvent);
}

std::vector<Clip> segment_kinematic(const Episode& episode,
                                    const SegmentationParams& params) {
  params.validate();
  require_nonempty(episode);

  bool any_motion = false;
  for (const FrameRecord& f : episode.frames) {
    if (f.motion.has_value()) {
      any_motion = true;
      break;
    }
  }
  if (!any_motion) {
    throw SegmentationError(SegmentationError::Kind::kNoMotionSignal,
                            "episode " + episode.episode_id +
                                " carries no motion values");
  }

  const size_t n = episode.frames.size();
  std::vector<double> values(n);
  for (size_t i = 0; i < n; ++i) {
    values[i] = episode.frames[i].motion.value_or(0.0);
  }

  const int half = params.kinematic_smooth_window / 2;
  std::vector<double> smoothed(n);
  for (size_t i = 0; i < n; ++i) {
    size_t lo = (static_cast<int>(i) >= half) ? i - half : 0;
    size_t hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (size_t j = lo; j <= hi; ++j) sum += values[j];
    smoothed[i] = sum / static_cast<double>(hi - lo + 1);
  }

  // Boundary at the first frame on the far side of the threshold.
  std::vector<double> crossings;
  for (size_t i = 1; i < n; ++i) {
    bool above_prev = smoothed[i - 1] >= params.kinematic_threshold;
    bool above_now = smoothed[i] >= params.kinematic_threshold;
    if (above_prev != above_now) {
      double t = episode.frames[i].t;
      if (t > 0.0 && t < episode.duration_s) crossings.push_back(t);
    }
  }
  std::sort(crossings.begin(), crossings.end());
  crossings.erase(std::unique(crossings.begin(), crossings.end()),
                  crossings.end());

  std::vector<double> boundaries =
      coalesce_boundaries(crossings, episode.duration_s, params.min_clip_s);
  return make_clips(episode, boundaries, Strategy::kKinematic);
}

const std::map<Domain, Strategy>& default_strategy_map() {
  static const std::map<Domain, Strategy> kMap = {
      {Domain::kHousehold, Strategy::kEvent},
      {Domain::kFactory, Strategy::kFixed},
      {Domain::kLab, Strategy::kKinematic},
  };
  return kMap;
}

Strategy select_strategy(Domain domain,
                         const std::map<Domain, Strategy>& strategy_map) {
  auto it = strategy_map.find(domain);
  if (it != strategy_map.end()) return it->second;
  return default_strategy_map().at(domain);
}

std::vector<Clip> segment(const Episode& episode, Strategy strategy,
                          const SegmentationParams& params) {
  switch (strategy) {
    case Strategy::kFixed:
      return segment_fixed(episode, params);
    case Strategy::kEvent:
      return segment_event(episode, params);
    case Strategy::kKinematic:
      return segment_kinematic(episode, params);
  }
  return segment_fixed(episode, params);
}

}  // namespace e2e
