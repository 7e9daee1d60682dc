#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ashield {

// Splittable deterministic PRNG built on the SplitMix64 finalizer.
// A stream is fully described by (state, stream_id); identical pairs replay
// identical draws on every platform. Streams are never shared between
// callers; hand out children via split_rng instead.
struct RngStream {
  std::uint64_t state = 0;
  std::uint64_t stream_id = 0;

  static RngStream from_seed(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53-bit resolution.
  double next_double();
  // Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double next_gaussian();
  // Unbiased uniform integer in [0, bound), bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);
};

// Pure derivation: the same (parent state, child_id) always yields the same
// child, and distinct child ids yield distinct states.
RngStream split_rng(const RngStream& parent, std::uint64_t child_id);

// Fisher-Yates permutation of {0..n-1} drawn from the stream.
std::vector<std::size_t> random_permutation(RngStream& rng, std::size_t n);

struct StatSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

// Temperature-scaled log-softmax, numerically stable under arbitrary shifts.
// Logits are divided by the temperature before normalization.
std::vector<double> log_softmax(std::span<const double> logits, double temperature);

StatSummary stats(std::span<const double> values);

// Central-difference gradient verification oracle. Returns the maximum over
// coordinates of |central difference - analytic| / (|analytic| + 1e-8).
double grad_check(
    const std::function<double(std::span<const double>)>& f,
    const std::function<std::vector<double>(std::span<const double>)>& analytic_grad,
    std::span<const double> point, double step);

}  // namespace ashield
