#include "ashield/policy.hpp"

#include <cmath>

#include "ashield/errors.hpp"
#include "ashield/rewards.hpp"

namespace ashield {

PolicyParams PolicyParams::zeros() {
  PolicyParams p;
  p.w.assign(static_cast<std::size_t>(kVocabSize) * kContextDim, 0.0);
  p.b.assign(kVocabSize, 0.0);
  return p;
}

PolicyParams PolicyParams::grammar_prior(double gain) {
  PolicyParams p = zeros();
  constexpr int kLastTokenBase = kFeatureDim;
  constexpr int kCountBase = kFeatureDim + kVocabSize;

  // Position 0 has an all-zero last-token block, so the opening tag rides on
  // the bias; the count block then shuts it off for the rest of the response.
  p.b[kThinkOpen] = gain;
  p.weight(kThinkOpen, kCountBase + kThinkOpen) = -16.0 * gain * kDefaultMaxLen;

  const auto allow = [&](int next, int prev) {
    p.weight(next, kLastTokenBase + prev) = gain;
  };

  allow(kThinkClose, kThinkOpen);
  for (int c = 0; c < kNumCues; ++c) {
    allow(kCueFirst + c, kThinkOpen);
    allow(kThinkClose, kCueFirst + c);
    for (int c2 = 0; c2 < kNumCues; ++c2) allow(kCueFirst + c2, kCueFirst + c);
  }
  allow(kAnswerOpen, kThinkClose);
  allow(kRealToken, kAnswerOpen);
  allow(kFakeToken, kAnswerOpen);
  allow(kAnswerClose, kRealToken);
  allow(kAnswerClose, kFakeToken);
  allow(kEos, kAnswerClose);
  return p;
}

PolicyGrad::PolicyGrad()
    : w(static_cast<std::size_t>(kVocabSize) * kContextDim, 0.0), b(kVocabSize, 0.0) {}

void PolicyGrad::add_scaled(const PolicyGrad& other, double scale) {
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * other.w[i];
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += scale * other.b[i];
}

std::vector<double> context_features(const Episode& episode, std::span<const int> prefix,
                                     int max_len) {
  if (static_cast<int>(prefix.size()) > max_len) {
    throw InvalidInput("context_features: prefix longer than max_len");
  }
  std::vector<double> ctx(kContextDim, 0.0);
  for (int i = 0; i < kFeatureDim; ++i) ctx[i] = episode.features[i];
  if (!prefix.empty()) {
    const int last = prefix.back();
    if (!is_valid_token(last)) throw InvalidInput("context_features: unknown token id");
    ctx[kFeatureDim + last] = 1.0;
  }
  const double inv_max = 1.0 / static_cast<double>(max_len);
  for (int tok : prefix) {
    if (!is_valid_token(tok)) throw InvalidInput("context_features: unknown token id");
    ctx[kFeatureDim + kVocabSize + tok] += inv_max;
  }
  ctx[kContextDim - 1] = static_cast<double>(prefix.size()) * inv_max;
  return ctx;
}

std::vector<double> next_logits(const PolicyParams& params, std::span<const double> ctx) {
  if (ctx.size() != kContextDim) throw InvalidInput("next_logits: context size mismatch");
  std::vector<double> logits(kVocabSize, 0.0);
  for (int v = 0; v < kVocabSize; ++v) {
    const double* row = params.w.data() + static_cast<std::size_t>(v) * kContextDim;
    double acc = params.b[v];
    for (int f = 0; f < kContextDim; ++f) acc += row[f] * ctx[f];
    if (!std::isfinite(acc)) throw NumericalFailure("next_logits: non-finite logit");
    logits[v] = acc;
  }
  return logits;
}

Response sample_response(const PolicyParams& params, const Episode& episode,
                         RngStream& rng, double temperature, int max_len) {
  if (max_len < kMinResponseLen) {
    throw InvalidInput("sample_response: max_len below minimal response length");
  }
  if (!(temperature > 0.0)) throw InvalidInput("sample_response: temperature must be positive");

  Response resp;
  resp.tokens.reserve(static_cast<std::size_t>(max_len));
  resp.logprobs.reserve(static_cast<std::size_t>(max_len));

  while (static_cast<int>(resp.tokens.size()) < max_len) {
    const std::vector<double> ctx = context_features(episode, resp.tokens, max_len);
    const std::vector<double> logits = next_logits(params, ctx);
    const std::vector<double> lp1 = log_softmax(logits, 1.0);
    const std::vector<double>& lps =
        (temperature == 1.0) ? lp1 : log_softmax(logits, temperature);

    const double u = rng.next_double();
    double cum = 0.0;
    int pick = kVocabSize - 1;
    for (int v = 0; v < kVocabSize; ++v) {
      cum += std::exp(lps[v]);
      if (u < cum) {
        pick = v;
        break;
      }
    }
    resp.tokens.push_back(pick);
    resp.logprobs.push_back(lp1[pick]);
    if (pick == kEos) break;
  }
  resp.parsed = parse_format(resp.tokens);
  return resp;
}

std::vector<double> sequence_logprob(const PolicyParams& params, const Episode& episode,
                                     std::span<const int> tokens, int max_len) {
  if (tokens.empty()) throw InvalidInput("sequence_logprob: empty token sequence");
  std::vector<double> out;
  out.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (!is_valid_token(tokens[t])) throw InvalidInput("sequence_logprob: unknown token id");
    const std::vector<double> ctx =
        context_features(episode, tokens.subspan(0, t), max_len);
    const std::vector<double> lp = log_softmax(next_logits(params, ctx), 1.0);
    out.push_back(lp[tokens[t]]);
  }
  return out;
}

PolicyGrad logprob_grad(const PolicyParams& params, const Episode& episode,
                        std::span<const int> tokens, std::span<const double> weights,
                        int max_len) {
  if (tokens.size() != weights.size()) {
    throw InvalidInput("logprob_grad: weights length mismatch");
  }
  PolicyGrad grad;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (!is_valid_token(tokens[t])) throw InvalidInput("logprob_grad: unknown token id");
    if (!std::isfinite(weights[t])) throw InvalidInput("logprob_grad: non-finite weight");
    if (weights[t] == 0.0) continue;
    const std::vector<double> ctx =
        context_features(episode, tokens.subspan(0, t), max_len);
    const std::vector<double> lp = log_softmax(next_logits(params, ctx), 1.0);
    // d log pi(tok) / d logits = onehot(tok) - softmax(logits)
    for (int v = 0; v < kVocabSize; ++v) {
      const double dlogit =
          weights[t] * ((v == tokens[t] ? 1.0 : 0.0) - std::exp(lp[v]));
      grad.b[v] += dlogit;
      double* row = grad.w.data() + static_cast<std::size_t>(v) * kContextDim;
      for (int f = 0; f < kContextDim; ++f) row[f] += dlogit * ctx[f];
    }
  }
  return grad;
}

double detection_score(const PolicyParams& params, const Episode& episode, int max_len) {
  const int prefix[] = {kThinkOpen, kThinkClose, kAnswerOpen};
  const std::vector<double> ctx = context_features(episode, prefix, max_len);
  const std::vector<double> lp = log_softmax(next_logits(params, ctx), 1.0);
  const double p_fake = std::exp(lp[kFakeToken]);
  const double p_real = std::exp(lp[kRealToken]);
  return p_fake / (p_fake + p_real);
}

}  // namespace ashield
