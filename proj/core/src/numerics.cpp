#include "ashield/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ashield/errors.hpp"

namespace ashield {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer as a stateless hash.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream RngStream::from_seed(std::uint64_t seed) {
  return RngStream{mix64(seed + kGolden), 0};
}

std::uint64_t RngStream::next_u64() {
  state += kGolden;
  return mix64(state);
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  const double u1 = next_double();
  const double u2 = next_double();
  // 1-u1 keeps the log argument in (0, 1].
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw InvalidInput("next_below: bound must be positive");
  if (bound == 1) return 0;
  // Rejection sampling over the largest multiple of bound.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % bound);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % bound;
}

RngStream split_rng(const RngStream& parent, std::uint64_t child_id) {
  return RngStream{mix64(parent.state + kGolden * (child_id + 1)), child_id};
}

std::vector<std::size_t> random_permutation(RngStream& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<double> log_softmax(std::span<const double> logits, double temperature) {
  if (logits.empty()) throw InvalidInput("log_softmax: empty logits");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw InvalidInput("log_softmax: temperature must be positive and finite");
  }
  for (double v : logits) {
    if (!std::isfinite(v)) throw InvalidInput("log_softmax: non-finite logit");
  }

  std::vector<double> scaled(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] / temperature;

  const double hi = *std::max_element(scaled.begin(), scaled.end());
  double sum = 0.0;
  for (double v : scaled) sum += std::exp(v - hi);
  const double log_z = hi + std::log(sum);

  std::vector<double> out(scaled.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) out[i] = scaled[i] - log_z;
  return out;
}

StatSummary stats(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("stats: empty input");
  StatSummary s;
  s.count = values.size();
  s.min = values[0];
  s.max = values[0];
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - s.mean;
    ss += d * d;
  }
  s.std = std::sqrt(ss / static_cast<double>(s.count));
  return s;
}

double grad_check(
    const std::function<double(std::span<const double>)>& f,
    const std::function<std::vector<double>(std::span<const double>)>& analytic_grad,
    std::span<const double> point, double step) {
  if (point.empty()) throw InvalidInput("grad_check: empty point");
  if (!(step >= 1e-7 && step <= 1e-3)) {
    throw InvalidInput("grad_check: step must lie in [1e-7, 1e-3]");
  }

  const std::vector<double> analytic = analytic_grad(point);
  if (analytic.size() != point.size()) {
    throw InvalidInput("grad_check: gradient size mismatch");
  }

  std::vector<double> x(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double fp = f(x);
    x[i] = saved - step;
    const double fm = f(x);
    x[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalFailure("grad_check: non-finite function evaluation");
    }
    const double cd = (fp - fm) / (2.0 * step);
    const double rel = std::abs(cd - analytic[i]) / (std::abs(analytic[i]) + 1e-8);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace ashield
