#pragma once

#include <cstdint>

#include "ashield/numerics.hpp"
#include "ashield/types.hpp"

namespace ashield {

// Draw the generated-content manifold: K standard-Gaussian centers in R^D.
Codebook make_manifold(std::uint64_t seed, int k, int dim);

// Synthesize one labeled clip. Fake clips sit near a manifold center and
// carry a family-specific temporal artifact scaled by `strength`; real clips
// follow a smooth two-sinusoid trajectory anchored well off the manifold.
//
//   pose  : square-wave flicker, sign flipping every 2 frames, +-0.4*strength
//           on 4 coordinates
//   audio : sinusoid of amplitude 0.3*strength and period 6 frames on
//           4 coordinates
//   text  : per-frame drift of 0.02*strength plus a single level jump of
//           magnitude 0.8*strength at a random frame
VideoClip generate_clip(RngStream& rng, Label label, Family family,
                        const Codebook& manifold, double strength,
                        const GeneratorConfig& config = GeneratorConfig{});

// Build a balanced dataset with a 9:1 train/test split per (family, label)
// group. Deterministic in `seed`.
DatasetManifest build_dataset(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace ashield
