#pragma once

#include <cstdint>

#include "heatgait/data.hpp"
#include "heatgait/rng.hpp"

namespace heatgait {

struct AugmentConfig {
  bool enable_reverse = true;
  bool enable_mirror = true;
  double noise_sigma = 0.01;  // normalized-coordinate units
  bool swap_lr_on_mirror = true;
  std::uint64_t rng_seed = 0;
};

// Frame order inverted; metadata unchanged.
PoseSequence reverse_time(const PoseSequence& seq);

// Reflects every x about the sequence-wide mean x (the center of gravity
// along the vertical axis). With swap_lr, anatomical left/right joint
// indices are exchanged within each frame.
PoseSequence mirror(const PoseSequence& seq, bool swap_lr);

// Adds independent zero-mean Gaussian noise of the given sigma to every
// coordinate. sigma == 0 is the identity.
PoseSequence jitter(const PoseSequence& seq, double sigma, Rng& rng);

// Training-time pipeline: reverse with probability 0.5 (when enabled),
// mirror with probability 0.5 (when enabled), then jitter.
PoseSequence augment_pipeline(const PoseSequence& seq,
                              const AugmentConfig& config, Rng& rng);

}  // namespace heatgait
