#pragma once

#include <array>
#include <span>
#include <vector>

#include "ashield/numerics.hpp"
#include "ashield/types.hpp"

namespace ashield {

// K-means with k-means++ seeding and exactly `iters` Lloyd iterations.
// Empty clusters are re-seeded to the point farthest from its assigned
// center. `points` is row-major n x dim.
Codebook fit_codebook(std::span<const double> points, int n, int dim, int k,
                      int iters, RngStream& rng);

// Index of the nearest center for each frame; ties break to the lowest
// center index.
std::vector<int> nearest_centers(const VideoClip& clip, const Codebook& cb);

// Elementwise residual |x_t - x_hat_t| against the nearest-center
// reconstruction. Row-major T x D, all entries >= 0.
std::vector<double> quantize_and_residual(const VideoClip& clip, const Codebook& cb);

// Order-sensitive temporal statistics of the frame sequence:
//   0 mean frame norm / sqrt(D)
//   1 std of frame norms
//   2 mean first-difference norm / sqrt(D)
//   3 std of first-difference norms
//   4 lag-1 autocorrelation of frame norms (0 if variance < 1e-12)
//   5 least-squares slope of frame norms vs frame index
//   6 max frame-norm deviation from its mean
//   7 mean second-difference norm / sqrt(D)
std::array<double, 8> semantic_features(const VideoClip& clip);

// Aggregate row-norm statistics of a T x D matrix:
//   0 mean row norm / sqrt(D)
//   1 max row norm / sqrt(D)
//   2 std of row norms
//   3 least-squares slope of row norms vs row index
//   4 fraction of rows with norm / sqrt(D) > 0.5
//   5 lag-1 autocorrelation of row norms (0 if variance < 1e-12)
std::array<double, 6> residual_features(std::span<const double> rows, int t, int dim);

// Fuse both encoders into one episode feature vector
// [semantic(8) | residual(6) | 1.0]. In shuffled mode one frame permutation
// is drawn and applied before BOTH encoders. Mode no_residual zeroes the
// residual slots; mode reconstruction feeds the reconstruction rows instead
// of the residual rows to the row-statistics encoder.
Episode fuse(const VideoClip& clip, const Codebook& cb, Ordering ordering,
             RngStream* shuffle_rng, FuseMode mode);

}  // namespace ashield
