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

#ifndef E2E_SEGMENTATION_HPP_
#define E2E_SEGMENTATION_HPP_

#include <map>
#include <vector>

#include "e2e/corpus.hpp"

namespace e2e {

struct SegmentationParams {
  double fixed_interval_s = 2.0;
  double min_tail_fraction = 0.25;  // in (0, 1]
  double kinematic_threshold = 0.5;
  int kinematic_smooth_window = 5;  // odd
  double min_clip_s = 0.5;

  void validate() const;  // throws SegmentationError(kBadParams)
};

// All strategies produce half-open clips tiling [0, duration) exactly.
// Every clip is at least min_clip_s long except a single episode-spanning
// clip when the episode itself is shorter.

// Consecutive clips of fixed_interval_s; a trailing remainder shorter than
// min_tail_fraction * interval merges into the last full clip.
std::vector<Clip> segment_fixed(const Episode& episode,
                                const SegmentationParams& params);

// Boundaries at distinct timestamps of frames carrying an event_marker.
std::vector<Clip> segment_event(const Episode& episode,
                                const SegmentationParams& params);

// Boundaries where the smoothed motion series crosses the threshold in
// either direction; the boundary snaps to the timestamp of the first frame
// on the far side. Smoothing is a centered moving average, edge-truncated.
std::vector<Clip> segment_kinematic(const Episode& episode,
                                    const SegmentationParams& params);

const std::map<Domain, Strategy>& default_strategy_map();

Strategy select_strategy(Domain domain,
                         const std::map<Domain, Strategy>& strategy_map =
                             default_strategy_map());

std::vector<Clip> segment(const Episode& episode, Strategy strategy,
                          const SegmentationParams& params);

}  // namespace e2e

#endif  // E2E_SEGMENTATION_HPP_
