#include "ashield/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ashield/errors.hpp"

namespace ashield {
namespace {

double sq_dist(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

double row_norm(const double* row, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += row[d] * row[d];
  return std::sqrt(s);
}

double lag1_autocorr(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double x : v) denom += (x - mean) * (x - mean);
  if (denom / static_cast<double>(n) < 1e-12) return 0.0;
  double num = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) num += (v[i] - mean) * (v[i + 1] - mean);
  return num / denom;
}

double ls_slope(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double tbar = (static_cast<double>(n) - 1.0) / 2.0;
  double vbar = 0.0;
  for (double x : v) vbar += x;
  vbar /= static_cast<double>(n);
  double num = 0.0, denom = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = static_cast<double>(i) - tbar;
    num += dt * (v[i] - vbar);
    denom += dt * dt;
  }
  return num / denom;
}

int nearest_center_index(const double* point, const Codebook& cb) {
  int best = 0;
  double best_d = sq_dist(point, cb.center(0), cb.dim);
  for (int j = 1; j < cb.k; ++j) {
    const double d = sq_dist(point, cb.center(j), cb.dim);
    if (d < best_d) {  // strict: ties keep the lowest index
      best_d = d;
      best = j;
    }
  }
  return best;
}

void apply_permutation(VideoClip& clip, const std::vector<std::size_t>& perm) {
  std::vector<double> shuffled(clip.frames.size());
  for (int t = 0; t < clip.t_frames; ++t) {
    const double* src = clip.frame(static_cast<int>(perm[t]));
    std::copy(src, src + clip.dim,
              shuffled.begin() + static_cast<std::ptrdiff_t>(t) * clip.dim);
  }
  clip.frames = std::move(shuffled);
}

}  // namespace

Codebook fit_codebook(std::span<const double> points, int n, int dim, int k,
                      int iters, RngStream& rng) {
  if (k < 2) throw InvalidInput("fit_codebook: k must be >= 2");
  if (n < k) throw InvalidInput("fit_codebook: fewer points than clusters");
  if (iters < 0) throw InvalidInput("fit_codebook: negative iteration count");
  if (points.size() != static_cast<std::size_t>(n) * dim) {
    throw InvalidInput("fit_codebook: point buffer size mismatch");
  }

  const auto point = [&](int i) { return points.data() + static_cast<std::size_t>(i) * dim; };

  Codebook cb;
  cb.k = k;
  cb.dim = dim;
  cb.trained_on = Codebook::Source::fitted;
  cb.centers.resize(static_cast<std::size_t>(k) * dim);

  // k-means++ seeding: first center uniform, then D^2-weighted.
  std::vector<double> d2(static_cast<std::size_t>(n), 0.0);
  {
    const int first = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    std::copy(point(first), point(first) + dim, cb.centers.begin());
    for (int i = 0; i < n; ++i) d2[i] = sq_dist(point(i), cb.center(0), dim);
    for (int j = 1; j < k; ++j) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) total += d2[i];
      int chosen;
      if (total > 0.0) {
        const double u = rng.next_double() * total;
        double cum = 0.0;
        chosen = n - 1;
        for (int i = 0; i < n; ++i) {
          cum += d2[i];
          if (u < cum) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      }
      std::copy(point(chosen), point(chosen) + dim,
                cb.centers.begin() + static_cast<std::ptrdiff_t>(j) * dim);
      for (int i = 0; i < n; ++i) {
        d2[i] = std::min(d2[i], sq_dist(point(i), cb.center(j), dim));
      }
    }
  }

  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist(static_cast<std::size_t>(n), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);

  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_dist(point(i), cb.center(0), dim);
      for (int j = 1; j < k; ++j) {
        const double d = sq_dist(point(i), cb.center(j), dim);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      assign[i] = best;
      dist[i] = best_d;
    }

    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) counts[assign[i]]++;

    // Re-seed empty clusters to the currently farthest point.
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      int far = 0;
      for (int i = 1; i < n; ++i) {
        if (dist[i] > dist[far]) far = i;
      }
      counts[assign[far]]--;
      assign[far] = j;
      counts[j] = 1;
      dist[far] = 0.0;
    }

    std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
    for (int i = 0; i < n; ++i) {
      double* c = sums.data() + static_cast<std::size_t>(assign[i]) * dim;
      const double* p = point(i);
      for (int d = 0; d < dim; ++d) c[d] += p[d];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;  // keep the previous center
      double* c = cb.centers.data() + static_cast<std::size_t>(j) * dim;
      const double* s = sums.data() + static_cast<std::size_t>(j) * dim;
      for (int d = 0; d < dim; ++d) c[d] = s[d] / counts[j];
    }
  }
  return cb;
}

std::vector<int> nearest_centers(const VideoClip& clip, const Codebook& cb) {
  if (clip.dim != cb.dim) throw InvalidInput("nearest_centers: dimension mismatch");
  std::vector<int> idx(static_cast<std::size_t>(clip.t_frames));
  for (int t = 0; t < clip.t_frames; ++t) idx[t] = nearest_center_index(clip.frame(t), cb);
  return idx;
}

std::vector<double> quantize_and_residual(const VideoClip& clip, const Codebook& cb) {
  if (clip.dim != cb.dim) {
    throw InvalidInput("quantize_and_residual: dimension mismatch");
  }
  std::vector<double> residual(clip.frames.size());
  for (int t = 0; t < clip.t_frames; ++t) {
    const double* x = clip.frame(t);
    const double* c = cb.center(nearest_center_index(x, cb));
    double* r = residual.data() + static_cast<std::size_t>(t) * clip.dim;
    for (int d = 0; d < clip.dim; ++d) r[d] = std::abs(x[d] - c[d]);
  }
  return residual;
}

std::array<double, 8> semantic_features(const VideoClip& clip) {
  if (clip.t_frames < 2) throw InvalidInput("semantic_features: need at least 2 frames");
  const int t_frames = clip.t_frames;
  const int dim = clip.dim;
  const double sqrt_d = std::sqrt(static_cast<double>(dim));

  std::vector<double> norms(static_cast<std::size_t>(t_frames));
  for (int t = 0; t < t_frames; ++t) norms[t] = row_norm(clip.frame(t), dim);

  std::vector<double> fd(static_cast<std::size_t>(t_frames - 1));
  for (int t = 0; t + 1 < t_frames; ++t) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double diff = clip.at(t + 1, d) - clip.at(t, d);
      s += diff * diff;
    }
    fd[t] = std::sqrt(s);
  }

  const StatSummary norm_stats = stats(norms);
  const StatSummary fd_stats = stats(fd);

  double max_dev = 0.0;
  for (double v : norms) max_dev = std::max(max_dev, std::abs(v - norm_stats.mean));

  double sd2 = 0.0;
  if (t_frames >= 3) {
    for (int t = 1; t + 1 < t_frames; ++t) {
      double s = 0.0;
      for (int d = 0; d < dim; ++d) {
        const double diff = clip.at(t + 1, d) - 2.0 * clip.at(t, d) + clip.at(t - 1, d);
        s += diff * diff;
      }
      sd2 += std::sqrt(s);
    }
    sd2 /= static_cast<double>(t_frames - 2);
  }

  return {norm_stats.mean / sqrt_d,
          norm_stats.std,
          fd_stats.mean / sqrt_d,
          fd_stats.std,
          lag1_autocorr(norms),
          ls_slope(norms),
          max_dev,
          sd2 / sqrt_d};
}

std::array<double, 6> residual_features(std::span<const double> rows, int t, int dim) {
  if (t < 1 || dim < 1 || rows.size() != static_cast<std::size_t>(t) * dim) {
    throw InvalidInput("residual_features: shape mismatch");
  }
  const double sqrt_d = std::sqrt(static_cast<double>(dim));

  std::vector<double> norms(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) {
    norms[i] = row_norm(rows.data() + static_cast<std::size_t>(i) * dim, dim);
  }
  const StatSummary norm_stats = stats(norms);

  int above = 0;
  for (double v : norms) {
    if (v / sqrt_d > 0.5) ++above;
  }

  return {norm_stats.mean / sqrt_d,
          norm_stats.max / sqrt_d,
          norm_stats.std,
          ls_slope(norms),
          static_cast<double>(above) / static_cast<double>(t),
          lag1_autocorr(norms)};
}

Episode fuse(const VideoClip& clip, const Codebook& cb, Ordering ordering,
             RngStream* shuffle_rng, FuseMode mode) {
  if (ordering == Ordering::shuffled && shuffle_rng == nullptr) {
    throw InvalidConfig("fuse: shuffled ordering requires an rng");
  }

  Episode ep;
  ep.clip_id = clip.id;
  ep.label = clip.label;
  ep.family = clip.family;
  ep.ordering = ordering;

  const VideoClip* src = &clip;
  VideoClip permuted;
  if (ordering == Ordering::shuffled) {
    ep.shuffle_seed = shuffle_rng->state;
    permuted = clip;
    apply_permutation(permuted,
                      random_permutation(*shuffle_rng, static_cast<std::size_t>(clip.t_frames)));
    src = &permuted;
  }

  const std::array<double, 8> sem = semantic_features(*src);
  std::array<double, 6> res{};
  switch (mode) {
    case FuseMode::full: {
      const std::vector<double> r = quantize_and_residual(*src, cb);
      res = residual_features(r, src->t_frames, src->dim);
      break;
    }
    case FuseMode::no_residual:
      break;
    case FuseMode::reconstruction: {
      std::vector<double> recon(src->frames.size());
      const std::vector<int> idx = nearest_centers(*src, cb);
      for (int t = 0; t < src->t_frames; ++t) {
        const double* c = cb.center(idx[t]);
        std::copy(c, c + src->dim,
                  recon.begin() + static_cast<std::ptrdiff_t>(t) * src->dim);
      }
      res = residual_features(recon, src->t_frames, src->dim);
      break;
    }
  }

  for (int i = 0; i < 8; ++i) ep.features[i] = sem[i];
  for (int i = 0; i < 6; ++i) ep.features[8 + i] = res[i];
  ep.features[14] = 1.0;  // prompt constant
  return ep;
}

}  // namespace ashield
