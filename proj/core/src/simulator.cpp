#include "ashield/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "ashield/errors.hpp"

namespace ashield {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kArtifactCoords = 4;   // artifacts live on coordinates 0..3
constexpr double kFrameNoiseStd = 0.05;
constexpr double kRealOffsetNorm = 1.5;
constexpr double kRealSinAmp = 0.7;
// Quality gradient on the real side: a small share of real clips sit close
// to the manifold (heavily compressed captures), so the residual cue alone
// cannot rank every pair and temporal structure has to carry the rest.
constexpr double kNearRealFraction = 0.15;
constexpr double kNearRealMinDist = 0.7;
constexpr double kNearRealMaxDist = 1.3;

// Unit vector from D gaussian draws.
void random_unit(RngStream& rng, int dim, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(dim), 0.0);
  double norm2 = 0.0;
  for (int d = 0; d < dim; ++d) {
    out[d] = rng.next_gaussian();
    norm2 += out[d] * out[d];
  }
  const double norm = std::sqrt(norm2);
  if (norm > 0.0) {
    for (int d = 0; d < dim; ++d) out[d] /= norm;
  } else {
    out[0] = 1.0;
  }
}

int draw_length(RngStream& rng, const GeneratorConfig& cfg) {
  const int span = cfg.t_max - cfg.t_min + 1;
  return cfg.t_min + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span)));
}

void fill_fake_frames(RngStream& rng, VideoClip& clip, const Codebook& manifold,
                      double strength) {
  const int dim = clip.dim;
  const int t_frames = clip.t_frames;
  const int base = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(manifold.k)));
  const double* center = manifold.center(base);

  // Family-specific artifact parameters drawn up front so the per-frame loop
  // consumes rng only for noise, keeping draw order stable across families.
  double audio_phase = 0.0;
  std::vector<double> drift_dir, jump_dir;
  int jump_frame = 0;
  switch (clip.family) {
    case Family::pose:
      break;
    case Family::audio:
      audio_phase = kTwoPi * rng.next_double();
      break;
    case Family::text:
      random_unit(rng, dim, drift_dir);
      random_unit(rng, dim, jump_dir);
      jump_frame = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(t_frames - 1)));
      break;
  }

  for (int t = 0; t < t_frames; ++t) {
    for (int d = 0; d < dim; ++d) {
      double v = center[d] + kFrameNoiseStd * rng.next_gaussian();
      switch (clip.family) {
        case Family::pose:
          if (d < kArtifactCoords) {
            const double sign = ((t / 2) % 2 == 0) ? 1.0 : -1.0;
            v += sign * 0.4 * strength;
          }
          break;
        case Family::audio:
          if (d < kArtifactCoords) {
            v += 0.3 * strength * std::sin(kTwoPi * t / 6.0 + audio_phase);
          }
          break;
        case Family::text:
          v += 0.02 * strength * t * drift_dir[d];
          if (t >= jump_frame) v += 0.8 * strength * jump_dir[d];
          break;
      }
      clip.at(t, d) = v;
    }
  }
}

void fill_real_frames(RngStream& rng, VideoClip& clip, const Codebook& manifold) {
  const int dim = clip.dim;
  const int t_frames = clip.t_frames;

  std::vector<double> anchor(static_cast<std::size_t>(dim));
  const bool near_manifold = rng.next_double() < kNearRealFraction;
  if (near_manifold) {
    const int base =
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(manifold.k)));
    const double dist =
        kNearRealMinDist + (kNearRealMaxDist - kNearRealMinDist) * rng.next_double();
    std::vector<double> dir;
    random_unit(rng, dim, dir);
    for (int d = 0; d < dim; ++d) anchor[d] = manifold.center(base)[d] + dist * dir[d];
  } else {
    for (int d = 0; d < dim; ++d) anchor[d] = rng.next_gaussian();
    std::vector<double> offset;
    random_unit(rng, dim, offset);
    for (int d = 0; d < dim; ++d) anchor[d] += kRealOffsetNorm * offset[d];
  }

  // Long-period sinusoids: locally smooth steps, clip-scale swings.
  std::vector<double> dir1, dir2;
  random_unit(rng, dim, dir1);
  random_unit(rng, dim, dir2);
  const double period1 = 40.0 + 10.0 * rng.next_double();
  const double period2 = 50.0 + 10.0 * rng.next_double();
  const double phase1 = kTwoPi * rng.next_double();
  const double phase2 = kTwoPi * rng.next_double();

  for (int t = 0; t < t_frames; ++t) {
    const double s1 = kRealSinAmp * std::sin(kTwoPi * t / period1 + phase1);
    const double s2 = kRealSinAmp * std::sin(kTwoPi * t / period2 + phase2);
    for (int d = 0; d < dim; ++d) {
      clip.at(t, d) = anchor[d] + s1 * dir1[d] + s2 * dir2[d] +
                      kFrameNoiseStd * rng.next_gaussian();
    }
  }
}

}  // namespace

Codebook make_manifold(std::uint64_t seed, int k, int dim) {
  if (k < 2) throw InvalidConfig("make_manifold: need at least 2 centers");
  if (dim < 1) throw InvalidConfig("make_manifold: dimension must be positive");
  Codebook cb;
  cb.k = k;
  cb.dim = dim;
  cb.trained_on = Codebook::Source::manifold;
  cb.centers.resize(static_cast<std::size_t>(k) * dim);
  RngStream rng = RngStream::from_seed(seed);
  for (double& v : cb.centers) v = rng.next_gaussian();
  return cb;
}

VideoClip generate_clip(RngStream& rng, Label label, Family family,
                        const Codebook& manifold, double strength,
                        const GeneratorConfig& config) {
  if (manifold.dim < kArtifactCoords) {
    throw InvalidConfig("generate_clip: manifold dimension too small");
  }
  if (label == Label::fake &&
      (strength < config.strength_min || strength > config.strength_max)) {
    throw InvalidConfig("generate_clip: strength outside configured range");
  }

  VideoClip clip;
  clip.dim = manifold.dim;
  clip.label = label;
  clip.family = family;
  clip.seed = rng.state;
  clip.artifact_strength = (label == Label::fake) ? strength : 0.0;
  clip.t_frames = draw_length(rng, config);
  clip.frames.assign(static_cast<std::size_t>(clip.t_frames) * clip.dim, 0.0);

  if (label == Label::fake) {
    fill_fake_frames(rng, clip, manifold, strength);
  } else {
    fill_real_frames(rng, clip, manifold);
  }
  return clip;
}

DatasetManifest build_dataset(const GeneratorConfig& config, std::uint64_t seed) {
  if (config.clips_per_family < 2 || config.clips_per_family % 2 != 0) {
    throw InvalidConfig("build_dataset: clips_per_family must be even and >= 2");
  }
  if (config.families.empty()) {
    throw InvalidConfig("build_dataset: no families requested");
  }
  if (config.t_min < 2 || config.t_max < config.t_min) {
    throw InvalidConfig("build_dataset: bad frame-count range");
  }

  DatasetManifest manifest;
  manifest.config = config;
  manifest.seed = seed;

  RngStream root = RngStream::from_seed(seed);
  manifest.codebook_seed = split_rng(root, 0).state;
  const Codebook manifold =
      make_manifold(manifest.codebook_seed, config.codebook_k, config.frame_dim);

  const int per_label = config.clips_per_family / 2;
  const int test_n = per_label / 10;  // 9:1 split per (family, label) group

  for (std::size_t fi = 0; fi < config.families.size(); ++fi) {
    const Family family = config.families[fi];
    const RngStream family_stream = split_rng(root, 1 + fi);
    for (int li = 0; li < 2; ++li) {
      const Label label = (li == 0) ? Label::real : Label::fake;
      const RngStream label_stream = split_rng(family_stream, static_cast<std::uint64_t>(li));
      for (int idx = 0; idx < per_label; ++idx) {
        RngStream clip_rng = split_rng(label_stream, static_cast<std::uint64_t>(idx));
        double strength = 0.0;
        if (label == Label::fake) {
          strength = config.strength_min +
                     (config.strength_max - config.strength_min) * clip_rng.next_double();
        }
        VideoClip clip = generate_clip(clip_rng, label, family, manifold, strength, config);
        clip.split = (idx >= per_label - test_n) ? Split::test : Split::train;
        char id[64];
        std::snprintf(id, sizeof(id), "%s-%s-%s-%04d", to_string(clip.split).c_str(),
                      to_string(family).c_str(), to_string(label).c_str(), idx);
        clip.id = id;
        manifest.clips.push_back(std::move(clip));
      }
    }
  }
  return manifest;
}

}  // namespace ashield
