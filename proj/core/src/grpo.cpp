#include "ashield/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "ashield/errors.hpp"
#include "ashield/io.hpp"
#include "ashield/simulator.hpp"

namespace ashield {

void GrpoConfig::validate() const {
  if (group_size < 2) throw InvalidConfig("grpo config: group size must be >= 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw InvalidConfig("grpo config: clip epsilon must be in (0, 1)");
  }
  if (kl_beta < 0.0) throw InvalidConfig("grpo config: beta must be nonnegative");
  if (inner_updates < 1) throw InvalidConfig("grpo config: inner updates must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidConfig("grpo config: learning rate must be positive");
  if (!(temperature > 0.0)) throw InvalidConfig("grpo config: temperature must be positive");
  if (steps < 0) throw InvalidConfig("grpo config: negative step count");
  if (batch_size < 1) throw InvalidConfig("grpo config: batch size must be >= 1");
  if (max_len < kMinResponseLen) {
    throw InvalidConfig("grpo config: max_len below minimal response length");
  }
  if (ref_refresh_every < 0) throw InvalidConfig("grpo config: negative refresh interval");
  reward.validate(max_len);
}

std::vector<double> compute_advantages(std::span<const double> totals) {
  if (totals.size() < 2) throw InvalidInput("compute_advantages: need a group of >= 2");
  const StatSummary s = stats(totals);
  std::vector<double> adv(totals.size(), 0.0);
  if (s.std < 1e-12) return adv;
  for (std::size_t i = 0; i < totals.size(); ++i) adv[i] = (totals[i] - s.mean) / s.std;
  return adv;
}

std::vector<double> kl_term(std::span<const double> policy_lp,
                            std::span<const double> ref_lp) {
  if (policy_lp.size() != ref_lp.size()) {
    throw InvalidInput("kl_term: misaligned logprob arrays");
  }
  std::vector<double> out(policy_lp.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = ref_lp[i] - policy_lp[i];
    // expm1 keeps the estimator exact near zero and nonnegative.
    out[i] = std::expm1(d) - d;
  }
  return out;
}

LossGrad grpo_loss_and_grad(const PolicyParams& params, const GroupRollout& rollout,
                            const GrpoConfig& cfg) {
  const std::size_t n = rollout.responses.size();
  if (n == 0) throw InvalidInput("grpo_loss_and_grad: empty rollout");
  if (rollout.advantages.size() != n || rollout.old_logprobs.size() != n ||
      rollout.ref_logprobs.size() != n) {
    throw InvalidInput("grpo_loss_and_grad: rollout arrays misaligned");
  }

  LossGrad result;
  double objective = 0.0;
  double kl_sum = 0.0;
  long clipped_tokens = 0;
  long total_tokens = 0;
  const double inv_n = 1.0 / static_cast<double>(n);
  const double lo = 1.0 - cfg.clip_epsilon;
  const double hi = 1.0 + cfg.clip_epsilon;

  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<int>& tokens = rollout.responses[i].tokens;
    const std::size_t len = tokens.size();
    if (len == 0) throw InvalidInput("grpo_loss_and_grad: empty response");
    if (rollout.old_logprobs[i].size() != len || rollout.ref_logprobs[i].size() != len) {
      throw InvalidInput("grpo_loss_and_grad: logprob arrays misaligned with tokens");
    }

    const std::vector<double> cur =
        sequence_logprob(params, rollout.episode, tokens, cfg.max_len);
    const double adv = rollout.advantages[i];
    const double inv_len = 1.0 / static_cast<double>(len);

    std::vector<double> token_weights(len, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
      const double ratio = std::exp(cur[t] - rollout.old_logprobs[i][t]);
      if (!std::isfinite(ratio)) {
        throw NumericalFailure("grpo_loss_and_grad: non-finite probability ratio");
      }
      const double clipped = std::clamp(ratio, lo, hi);
      const double surr_unclipped = ratio * adv;
      const double surr_clipped = clipped * adv;
      const double surr = std::min(surr_unclipped, surr_clipped);

      const double d = rollout.ref_logprobs[i][t] - cur[t];
      const double kl = std::expm1(d) - d;

      objective += inv_n * inv_len * (surr - cfg.kl_beta * kl);
      kl_sum += inv_n * inv_len * kl;
      ++total_tokens;
      if (surr_clipped < surr_unclipped) ++clipped_tokens;

      // Ratio path contributes only where the unclipped branch is selected;
      // the KL path always flows through the current policy.
      const bool ratio_flows = surr_unclipped <= surr_clipped;
      const double d_obj_d_cur =
          (ratio_flows ? ratio * adv : 0.0) + cfg.kl_beta * std::expm1(d);
      token_weights[t] = -inv_n * inv_len * d_obj_d_cur;  // loss = -objective
    }

    const PolicyGrad g =
        logprob_grad(params, rollout.episode, tokens, token_weights, cfg.max_len);
    result.grad.add_scaled(g, 1.0);
  }

  result.loss = -objective;
  if (!std::isfinite(result.loss)) {
    throw NumericalFailure("grpo_loss_and_grad: non-finite loss");
  }
  result.mean_kl = kl_sum;
  result.clip_fraction =
      total_tokens > 0 ? static_cast<double>(clipped_tokens) / total_tokens : 0.0;
  return result;
}

GroupRollout sample_group(const PolicyParams& params, const PolicyParams& ref_params,
                          const EpisodeContext& ctx, const GrpoConfig& cfg,
                          RngStream& rng) {
  GroupRollout rollout;
  rollout.episode = ctx.ordered;

  rollout.responses.reserve(cfg.group_size);
  for (int i = 0; i < cfg.group_size; ++i) {
    rollout.responses.push_back(
        sample_response(params, ctx.ordered, rng, cfg.temperature, cfg.max_len));
  }

  // One fresh permutation per episode per step; both encoders see it.
  const Episode shuffled_ep =
      fuse(*ctx.clip, *ctx.codebook, Ordering::shuffled, &rng, cfg.fuse_mode);
  rollout.shuffled_responses.reserve(cfg.group_size);
  for (int i = 0; i < cfg.group_size; ++i) {
    rollout.shuffled_responses.push_back(
        sample_response(params, shuffled_ep, rng, cfg.temperature, cfg.max_len));
  }

  const Label label = ctx.ordered.label;
  std::vector<double> tmp(cfg.group_size, 0.0);
  if (!cfg.ablate_tcr) {
    tmp = reward_temporal(rollout.responses, rollout.shuffled_responses, label, cfg.reward);
  }

  std::vector<double> totals(cfg.group_size, 0.0);
  rollout.rewards.reserve(cfg.group_size);
  for (int i = 0; i < cfg.group_size; ++i) {
    const Response& r = rollout.responses[i];
    const RewardBreakdown b =
        combine(reward_accuracy(r, label), tmp[i], reward_length(r, cfg.reward),
                reward_format(r), cfg.reward);
    totals[i] = b.total;
    rollout.rewards.push_back(b);
  }
  rollout.advantages = compute_advantages(totals);

  rollout.old_logprobs.reserve(cfg.group_size);
  rollout.ref_logprobs.reserve(cfg.group_size);
  for (int i = 0; i < cfg.group_size; ++i) {
    rollout.old_logprobs.push_back(rollout.responses[i].logprobs);
    rollout.ref_logprobs.push_back(sequence_logprob(
        ref_params, ctx.ordered, rollout.responses[i].tokens, cfg.max_len));
  }
  return rollout;
}

void train_step(TrainState& state, std::span<const EpisodeContext> batch,
                const GrpoConfig& cfg) {
  if (batch.empty()) throw InvalidInput("train_step: empty batch");

  if (cfg.ref_refresh_every > 0 && state.step > 0 &&
      state.step % cfg.ref_refresh_every == 0) {
    state.ref_params = state.params;
  }

  // The sampling policy is frozen for the whole step; inner updates move
  // state.params away from it, which is what lets the clip bind.
  std::vector<GroupRollout> rollouts;
  rollouts.reserve(batch.size());
  for (const EpisodeContext& ctx : batch) {
    rollouts.push_back(sample_group(state.params, state.ref_params, ctx, cfg, state.rng));
  }

  StepMetrics m;
  m.step = state.step;
  {
    double n_resp = 0.0;
    for (const GroupRollout& r : rollouts) {
      for (const RewardBreakdown& b : r.rewards) {
        m.mean_total += b.total;
        m.mean_det += b.det;
        m.mean_tmp += b.tmp;
        m.mean_len += b.len;
        m.mean_fmt += b.fmt;
        n_resp += 1.0;
      }
    }
    m.mean_total /= n_resp;
    m.mean_det /= n_resp;
    m.mean_tmp /= n_resp;
    m.mean_len /= n_resp;
    m.mean_fmt /= n_resp;
  }

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (int u = 0; u < cfg.inner_updates; ++u) {
    PolicyGrad batch_grad;
    double loss = 0.0, kl = 0.0, clip_frac = 0.0;
    for (const GroupRollout& r : rollouts) {
      const LossGrad lg = grpo_loss_and_grad(state.params, r, cfg);
      batch_grad.add_scaled(lg.grad, inv_batch);
      loss += inv_batch * lg.loss;
      kl += inv_batch * lg.mean_kl;
      clip_frac += inv_batch * lg.clip_fraction;
    }
    for (std::size_t i = 0; i < state.params.w.size(); ++i) {
      state.params.w[i] -= cfg.learning_rate * batch_grad.w[i];
    }
    for (std::size_t i = 0; i < state.params.b.size(); ++i) {
      state.params.b[i] -= cfg.learning_rate * batch_grad.b[i];
    }
    const double inv_updates = 1.0 / static_cast<double>(cfg.inner_updates);
    m.loss += inv_updates * loss;
    m.mean_kl += inv_updates * kl;
    m.clip_fraction += inv_updates * clip_frac;
  }

  state.params.version++;
  state.metrics.push_back(m);
  state.step++;
}

TrainState train(const GrpoConfig& cfg, const DatasetManifest& manifest,
                 const std::string& checkpoint_path, const std::string& metrics_path) {
  cfg.validate();

  const Codebook codebook = make_manifold(manifest.codebook_seed,
                                          manifest.config.codebook_k,
                                          manifest.config.frame_dim);

  const auto family_selected = [&](Family f) {
    if (cfg.train_families.empty()) return true;
    return std::find(cfg.train_families.begin(), cfg.train_families.end(), f) !=
           cfg.train_families.end();
  };

  std::vector<EpisodeContext> items;
  for (const VideoClip& clip : manifest.clips) {
    if (clip.split != Split::train || !family_selected(clip.family)) continue;
    EpisodeContext ctx;
    ctx.clip = &clip;
    ctx.codebook = &codebook;
    ctx.ordered = fuse(clip, codebook, Ordering::ordered, nullptr, cfg.fuse_mode);
    items.push_back(std::move(ctx));
  }
  if (items.empty()) throw InvalidConfig("train: no training episodes after filtering");

  TrainState state;
  state.params = PolicyParams::grammar_prior();
  state.ref_params = state.params;
  state.rng = RngStream::from_seed(cfg.seed);

  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  std::vector<EpisodeContext> batch;
  for (int s = 0; s < cfg.steps; ++s) {
    batch.clear();
    for (int j = 0; j < cfg.batch_size; ++j) {
      if (cursor == order.size()) {  // reshuffle at each epoch boundary
        order = random_permutation(state.rng, items.size());
        cursor = 0;
      }
      batch.push_back(items[order[cursor++]]);
    }
    train_step(state, batch, cfg);
  }

  if (!checkpoint_path.empty()) {
    Checkpoint ckpt;
    ckpt.params = state.params;
    ckpt.codebook = codebook;
    ckpt.config_echo = grpo_config_to_json(cfg);
    ckpt.rng_state = state.rng.state;
    ckpt.step = state.step;
    write_checkpoint(ckpt, checkpoint_path);
  }
  if (!metrics_path.empty()) {
    write_metrics(state.metrics, metrics_path);
  }
  return state;
}

}  // namespace ashield
