#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ashield {

enum class Label { real, fake };
enum class Family { pose, audio, text };
enum class Split { train, test };
enum class Ordering { ordered, shuffled };
enum class FuseMode { full, no_residual, reconstruction };

constexpr int kFrameDim = 16;    // per-frame feature width D
constexpr int kFeatureDim = 15;  // 8 semantic + 6 residual + 1 prompt constant

std::string to_string(Label v);
std::string to_string(Family v);
std::string to_string(Split v);
std::string to_string(FuseMode v);
Label label_from_string(const std::string& s);
Family family_from_string(const std::string& s);
Split split_from_string(const std::string& s);
FuseMode fuse_mode_from_string(const std::string& s);

// One clip as a T x D sequence of frame feature vectors. Real clips carry
// artifact_strength 0 exactly.
struct VideoClip {
  std::string id;
  int t_frames = 0;
  int dim = kFrameDim;
  std::vector<double> frames;  // row-major T x D
  Label label = Label::real;
  Family family = Family::pose;
  double artifact_strength = 0.0;
  std::uint64_t seed = 0;
  Split split = Split::train;

  double at(int t, int d) const { return frames[static_cast<std::size_t>(t) * dim + d]; }
  double& at(int t, int d) { return frames[static_cast<std::size_t>(t) * dim + d]; }
  const double* frame(int t) const { return frames.data() + static_cast<std::size_t>(t) * dim; }
};

// K reference vectors defining the generated-content manifold.
struct Codebook {
  enum class Source { manifold, fitted };

  int k = 0;
  int dim = 0;
  std::vector<double> centers;  // row-major K x D
  Source trained_on = Source::manifold;

  const double* center(int j) const { return centers.data() + static_cast<std::size_t>(j) * dim; }
};

// Fused feature vector for one clip: the unit of rollout and evaluation.
struct Episode {
  std::string clip_id;
  std::array<double, kFeatureDim> features{};
  Label label = Label::real;
  Family family = Family::pose;
  Ordering ordering = Ordering::ordered;
  std::optional<std::uint64_t> shuffle_seed;
};

enum class Answer { real, fake, malformed };

struct ParsedFormat {
  bool well_formed = false;
  Answer answer = Answer::malformed;
  // Token index range [begin, end) of the cue tokens between the think tags.
  std::optional<std::pair<int, int>> think_span;
};

// One emitted token sequence with its temperature-1 log-probabilities.
struct Response {
  std::vector<int> tokens;
  std::vector<double> logprobs;
  ParsedFormat parsed;
};

struct GeneratorConfig {
  int clips_per_family = 200;  // must be even: half real, half fake
  std::vector<Family> families = {Family::pose, Family::audio, Family::text};
  int codebook_k = 32;
  int frame_dim = kFrameDim;
  int t_min = 20;
  int t_max = 40;
  double strength_min = 0.5;
  double strength_max = 1.5;
};

struct DatasetManifest {
  std::vector<VideoClip> clips;
  GeneratorConfig config;
  std::uint64_t seed = 0;
  std::uint64_t codebook_seed = 0;
};

}  // namespace ashield
