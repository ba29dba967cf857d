#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "heatgait/graph.hpp"
#include "heatgait/rng.hpp"

namespace heatgait {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

struct PoseFrame {
  std::array<Keypoint, coco::kNumJoints> keypoints;
};

enum class Condition { NM, BG, CL };

std::string condition_name(Condition c);
Condition condition_from_name(const std::string& name);

// The 11 camera angles of the standard capture setup.
inline constexpr std::array<int, 11> kViewAngles = {0,  18,  36,  54,  72, 90,
                                                    108, 126, 144, 162, 180};
bool is_valid_view_angle(int angle);

struct PoseSequence {
  std::vector<PoseFrame> frames;
  std::string subject_id;
  Condition condition = Condition::NM;
  int sequence_index = 1;
  int view_angle = 90;
};

struct DatasetSplit {
  std::vector<PoseSequence> train;
  std::vector<PoseSequence> validation;
  std::vector<PoseSequence> test;
};

// Mean detector confidence over the 17 joints of one frame.
double mean_confidence(const PoseFrame& frame);

// Keeps exactly the frames with mean confidence >= threshold ("below" is
// strict removal, so boundary frames survive). Throws EmptySequenceError
// when nothing survives; the caller decides whether to drop the sequence.
PoseSequence filter_low_confidence(const PoseSequence& seq,
                                   double threshold = 0.6);

// Subtracts the sequence-wide coordinate mean per axis and divides both
// axes by the pooled standard deviation of all centered coordinates.
// Confidences are untouched. Throws DegenerateSequenceError when the
// spread is below 1e-9.
PoseSequence normalize_coordinates(const PoseSequence& seq);

enum class WindowMode { Train, Eval };

// Shapes a sequence to exactly `target` frames: longer sequences take a
// contiguous window (random start when training, centered otherwise),
// shorter ones repeat the final frame.
PoseSequence fixed_length(const PoseSequence& seq, int target, WindowMode mode,
                          Rng* rng = nullptr);

// Subject-level partition: subjects sorted by id, shuffled by seed, split
// by cumulative ratio with floor rounding; the remainder goes to test.
DatasetSplit split_by_subject(const std::vector<PoseSequence>& sequences,
                              const std::array<double, 3>& ratios,
                              std::uint64_t seed);

// JSON Lines, one sequence per line:
// {"subject": "s001", "condition": "NM", "seq": 1, "angle": 90,
//  "frames": [[[x, y, c] x 17] x N]}
std::vector<PoseSequence> load_keypoint_file(const std::filesystem::path& path);
void save_keypoint_file(const std::vector<PoseSequence>& sequences,
                        const std::filesystem::path& path);

// Every *.jsonl under `dir` in sorted filename order.
std::vector<PoseSequence> load_keypoint_dir(const std::filesystem::path& dir);

}  // namespace heatgait
