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

#ifndef E2E_TESTS_FIXTURES_HPP_
#define E2E_TESTS_FIXTURES_HPP_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "e2e/corpus.hpp"
#include "e2e/hashing.hpp"

namespace e2e::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<uint64_t> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("e2e-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Relative path -> bytes for every regular file under root.
inline std::map<std::string, std::string> dir_snapshot(
    const std::filesystem::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files[std::filesystem::relative(entry.path(), root).string()] =
        read_file(entry.path());
  }
  return files;
}

inline InteractionEvent make_event(double t0, double t1, std::string verb,
                                   std::string object, Hand hand,
                                   bool contact) {
  InteractionEvent ev;
  ev.t0 = t0;
  ev.t1 = t1;
  ev.verb = std::move(verb);
  ev.object = std::move(object);
  ev.hand = hand;
  ev.contact = contact;
  return ev;
}

inline EvidenceRecord make_evidence(std::string clip_id, bool left, bool right,
                                    std::vector<InteractionEvent> events,
                                    std::vector<std::string> extra_objects = {}) {
  EvidenceRecord ev;
  ev.clip_id = std::move(clip_id);
  ev.visible_hands.left = left;
  ev.visible_hands.right = right;
  ev.events = std::move(events);
  for (const InteractionEvent& e : ev.events) ev.object_lemmas.insert(e.object);
  for (std::string& o : extra_objects) ev.object_lemmas.insert(std::move(o));
  return ev;
}

// Gate-consistent evidence in all the shapes the mock has to narrate:
// single events, reorderable chains, same-verb-same-object hand pairs,
// contact-only clips, one-hand visibility, and both-hands events.
inline std::vector<EvidenceRecord> consistent_fixtures() {
  using H = Hand;
  std::vector<EvidenceRecord> out;
  out.push_back(make_evidence("fix-00", false, true,
                              {make_event(0, 2, "grasp", "cup", H::kRight, true)}));
  out.push_back(make_evidence(
      "fix-01", true, true,
      {make_event(0, 1.5, "grasp", "cup", H::kLeft, true),
       make_event(1.5, 3, "lift", "plate", H::kRight, false),
       make_event(3, 4, "place", "bowl", H::kBoth, true)}));
  out.push_back(make_evidence(
      "fix-02", true, true,
      {make_event(0, 1, "lift", "cup", H::kLeft, false),
       make_event(1, 2, "lift", "cup", H::kRight, false),
       make_event(2, 3.5, "wipe", "pan", H::kLeft, false)}));
  out.push_back(make_evidence(
      "fix-03", false, true,
      {make_event(0, 2, "push", "crate", H::kRight, false),
       make_event(2, 4, "slide", "panel", H::kRight, false)}));
  out.push_back(make_evidence(
      "fix-04", true, true,
      {make_event(0, 1, "pour", "jar", H::kLeft, true),
       make_event(1, 2.5, "stir", "bowl", H::kRight, false),
       make_event(2.5, 4, "wipe", "plate", H::kLeft, false)}));
  out.push_back(make_evidence(
      "fix-05", false, true,
      {make_event(0, 1, "fasten", "bolt", H::kRight, true),
       make_event(1, 2, "tighten", "valve", H::kRight, false),
       make_event(2, 3, "align", "bracket", H::kRight, false),
       make_event(3, 4, "insert", "pipe", H::kRight, true),
       make_event(4, 5, "rotate", "gear", H::kRight, false)},
      {"wrench"}));
  out.push_back(make_evidence(
      "fix-06", true, false,
      {make_event(0, 3, "rinse", "beaker", H::kLeft, true)}));
  out.push_back(make_evidence(
      "fix-07", true, true,
      {make_event(0, 1, "grasp", "cup", H::kRight, true),
       make_event(1, 2, "lift", "cup", H::kRight, true),
       make_event(2, 3, "place", "cup", H::kRight, true)}));
  out.push_back(make_evidence(
      "fix-08", true, true,
      {make_event(0, 2, "hold", "tray", H::kBoth, true),
       make_event(2, 3.5, "tilt", "flask", H::kRight, false)}));
  out.push_back(make_evidence(
      "fix-09", true, true,
      {make_event(0, 1.5, "touch", "dish", H::kLeft, true),
       make_event(1.5, 3, "grip", "funnel", H::kRight, true)}));
  out.push_back(make_evidence(
      "fix-10", true, true,
      {make_event(0, 1, "measure", "vial", H::kLeft, false),
       make_event(1, 2, "adjust", "burner", H::kRight, false),
       make_event(2, 3, "shake", "tube", H::kLeft, false),
       make_event(3, 4, "load", "filter", H::kRight, true)}));
  out.push_back(make_evidence("fix-11", true, true, {}, {"cup", "plate"}));
  return out;
}

// Randomized but structurally valid episode for segmentation properties.
inline Episode random_episode(uint64_t seed) {
  SplitMix64 rng(seed);
  Episode e;
  e.episode_id = "rnd-" + std::to_string(seed);
  e.domain = static_cast<Domain>(rng.next_below(3));
  e.duration_s = 0.3 + 19.7 * rng.next_double();
  const double dt = 0.05 + 0.3 * rng.next_double();
  double motion = rng.next_double();
  for (double t = 0.0; t < e.duration_s; t += dt) {
    FrameRecord f;
    f.t = t;
    motion = std::min(1.0, std::max(0.0, motion + 0.4 * rng.next_double() - 0.2));
    if (rng.next_double() < 0.9 || e.frames.empty()) f.motion = motion;
    if (rng.next_double() < 0.15) f.event_marker = "m";
    e.frames.push_back(std::move(f));
  }
  return e;
}

}  // namespace e2e::testing

#endif  // E2E_TESTS_FIXTURES_HPP_
