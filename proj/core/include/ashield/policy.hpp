#pragma once

#include <span>
#include <vector>

#include "ashield/numerics.hpp"
#include "ashield/types.hpp"
#include "ashield/vocab.hpp"

namespace ashield {

// Conditioning width: episode features, last-token one-hot, normalized
// per-token counts, normalized prefix length.
constexpr int kContextDim = kFeatureDim + 2 * kVocabSize + 1;  // 46
constexpr int kDefaultMaxLen = 32;

// Linear autoregressive policy over the response vocabulary. Logits are
// W * ctx + b with W of shape V x F.
struct PolicyParams {
  std::vector<double> w;  // row-major V x F
  std::vector<double> b;  // V
  int version = 0;

  static PolicyParams zeros();

  // Initialization that softly follows the response grammar through the
  // structural context blocks while leaving every episode-feature weight at
  // zero. Detection behavior starts exactly uninformed (score 0.5 for every
  // episode); training only has to learn the feature-to-answer mapping.
  static PolicyParams grammar_prior(double gain = 7.0);

  double weight(int token, int feature) const {
    return w[static_cast<std::size_t>(token) * kContextDim + feature];
  }
  double& weight(int token, int feature) {
    return w[static_cast<std::size_t>(token) * kContextDim + feature];
  }
};

struct PolicyGrad {
  std::vector<double> w;  // row-major V x F
  std::vector<double> b;  // V

  PolicyGrad();
  void add_scaled(const PolicyGrad& other, double scale);
};

std::vector<double> context_features(const Episode& episode, std::span<const int> prefix,
                                     int max_len);

std::vector<double> next_logits(const PolicyParams& params, std::span<const double> ctx);

// Autoregressive sampling until EOS or max_len. Sampling uses the given
// temperature; recorded log-probabilities are always temperature 1.
Response sample_response(const PolicyParams& params, const Episode& episode,
                         RngStream& rng, double temperature, int max_len);

// Teacher-forced per-token log-probabilities at temperature 1.
std::vector<double> sequence_logprob(const PolicyParams& params, const Episode& episode,
                                     std::span<const int> tokens, int max_len);

// Exact gradient of sum_t weights[t] * log pi(tokens[t] | prefix) with
// respect to (W, b).
PolicyGrad logprob_grad(const PolicyParams& params, const Episode& episode,
                        std::span<const int> tokens, std::span<const double> weights,
                        int max_len);

// Probability mass of the FAKE answer renormalized over {REAL, FAKE} after
// teacher-forcing the prefix [<think>, </think>, <answer>].
double detection_score(const PolicyParams& params, const Episode& episode,
                       int max_len = kDefaultMaxLen);

}  // namespace ashield
