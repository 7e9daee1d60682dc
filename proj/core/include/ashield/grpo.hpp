#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ashield/encoders.hpp"
#include "ashield/numerics.hpp"
#include "ashield/policy.hpp"
#include "ashield/rewards.hpp"
#include "ashield/types.hpp"

namespace ashield {

struct GrpoConfig {
  int group_size = 8;        // N responses per episode
  double clip_epsilon = 0.2;
  double kl_beta = 0.04;
  int inner_updates = 1;
  double learning_rate = 0.1;
  double temperature = 1.0;
  int ref_refresh_every = 0;  // 0 = reference stays at initialization
  int steps = 300;
  int batch_size = 4;
  int max_len = kDefaultMaxLen;
  std::uint64_t seed = 0;
  RewardConfig reward;
  bool ablate_tcr = false;
  FuseMode fuse_mode = FuseMode::full;
  std::vector<Family> train_families;  // empty = all families

  void validate() const;
};

// N sampled responses for one ordered episode, their shuffled probes,
// rewards, normalized advantages, and the sampling-time and reference
// log-probabilities that the surrogate ratio needs.
struct GroupRollout {
  Episode episode;
  std::vector<Response> responses;
  std::vector<Response> shuffled_responses;
  std::vector<RewardBreakdown> rewards;
  std::vector<double> advantages;
  std::vector<std::vector<double>> old_logprobs;
  std::vector<std::vector<double>> ref_logprobs;
};

struct StepMetrics {
  int step = 0;
  double mean_total = 0.0;
  double mean_det = 0.0;
  double mean_tmp = 0.0;
  double mean_len = 0.0;
  double mean_fmt = 0.0;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
  double loss = 0.0;
};

struct TrainState {
  PolicyParams params;
  PolicyParams ref_params;
  int step = 0;
  RngStream rng;
  std::vector<StepMetrics> metrics;
};

// An episode the trainer can reshuffle: the source clip plus its ordered
// fused view under the configured mode.
struct EpisodeContext {
  const VideoClip* clip = nullptr;
  const Codebook* codebook = nullptr;
  Episode ordered;
};

// Group-relative advantages: (r - mean) / population std, all zero when the
// group is degenerate (std < 1e-12).
std::vector<double> compute_advantages(std::span<const double> totals);

// Per-token KL estimator exp(ref - pol) - (ref - pol) - 1. Nonnegative,
// zero at equality.
std::vector<double> kl_term(std::span<const double> policy_lp,
                            std::span<const double> ref_lp);

struct LossGrad {
  double loss = 0.0;
  PolicyGrad grad;
  double mean_kl = 0.0;
  double clip_fraction = 0.0;
};

// Clipped group-relative surrogate with per-token KL regularization,
// averaged as (1/N) sum_i (1/|o_i|) sum_t. Returns the loss (negated
// objective) and its exact gradient.
LossGrad grpo_loss_and_grad(const PolicyParams& params, const GroupRollout& rollout,
                            const GrpoConfig& cfg);

// Sample one rollout group for an episode: N ordered responses, N shuffled
// probes on a single fresh permutation, rewards, and advantages.
GroupRollout sample_group(const PolicyParams& params, const PolicyParams& ref_params,
                          const EpisodeContext& ctx, const GrpoConfig& cfg,
                          RngStream& rng);

// One optimization step over a batch of episodes.
void train_step(TrainState& state, std::span<const EpisodeContext> batch,
                const GrpoConfig& cfg);

// Full training loop over the manifest's train split. Writes a checkpoint
// and a metrics log when the paths are nonempty.
TrainState train(const GrpoConfig& cfg, const DatasetManifest& manifest,
                 const std::string& checkpoint_path, const std::string& metrics_path);

}  // namespace ashield
