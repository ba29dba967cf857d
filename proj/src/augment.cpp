#include "heatgait/augment.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace heatgait {

PoseSequence reverse_time(const PoseSequence& seq) {
  if (seq.frames.empty()) {
    throw std::invalid_argument("reverse_time: empty sequence");
  }
  PoseSequence out = seq;
  std::reverse(out.frames.begin(), out.frames.end());
  return out;
}

PoseSequence mirror(const PoseSequence& seq, bool swap_lr) {
  if (seq.frames.empty()) {
    throw std::invalid_argument("mirror: empty sequence");
  }
  double sum_x = 0.0;
  for (const PoseFrame& frame : seq.frames) {
    for (const Keypoint& kp : frame.keypoints) sum_x += kp.x;
  }
  const double center =
      sum_x / (static_cast<double>(seq.frames.size()) * coco::kNumJoints);
  const double twice_center = 2.0 * center;

  PoseSequence out = seq;
  for (PoseFrame& frame : out.frames) {
    for (Keypoint& kp : frame.keypoints) kp.x = twice_center - kp.x;
    if (swap_lr) {
      for (const auto& [left, right] : coco::kLeftRightPairs) {
        std::swap(frame.keypoints[left], frame.keypoints[right]);
      }
    }
  }
  return out;
}

PoseSequence jitter(const PoseSequence& seq, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("jitter: sigma must be >= 0");
  if (sigma == 0.0) return seq;
  PoseSequence out = seq;
  for (PoseFrame& frame : out.frames) {
    for (Keypoint& kp : frame.keypoints) {
      kp.x += rng.normal(0.0, sigma);
      kp.y += rng.normal(0.0, sigma);
    }
  }
  return out;
}

PoseSequence augment_pipeline(const PoseSequence& seq,
                              const AugmentConfig& config, Rng& rng) {
  PoseSequence out = seq;
  if (config.enable_reverse && rng.bernoulli(0.5)) out = reverse_time(out);
  if (config.enable_mirror && rng.bernoulli(0.5)) {
    out = mirror(out, config.swap_lr_on_mirror);
  }
  return jitter(out, config.noise_sigma, rng);
}

}  // namespace heatgait
