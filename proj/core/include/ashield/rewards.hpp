#pragma once

#include <array>
#include <span>
#include <vector>

#include "ashield/types.hpp"
#include "ashield/vocab.hpp"

namespace ashield {

struct RewardConfig {
  double alpha = 0.3;   // temporal compensation bonus
  double mu = 0.8;      // ordered-vs-shuffled accuracy margin
  double lambda = 0.1;  // length bonus
  int l_min = 8;
  int l_max = 24;
  std::array<double, 4> weights = {1.0, 1.0, 1.0, 1.0};  // det, tmp, len, fmt

  void validate(int max_len) const;
};

struct RewardBreakdown {
  double det = 0.0;
  double tmp = 0.0;
  double len = 0.0;
  double fmt = 0.0;
  double total = 0.0;
};

// Accepts exactly <think> CUE* </think> <answer> (REAL|FAKE) </answer> <eos>
// with nothing after the terminator. Anything else is malformed; malformed
// is a value, never an error.
ParsedFormat parse_format(std::span<const int> tokens);

// 1 iff the parsed answer matches the label; malformed responses score 0.
double reward_accuracy(const Response& response, Label label);

// lambda iff l_min <= len <= l_max (inclusive), counting every emitted token.
double reward_length(const Response& response, const RewardConfig& cfg);

// 1 iff the response parses.
double reward_format(const Response& response);

// Group-level temporal compensation. p_norm and p_shuffle are the correct
// fractions of the ordered and shuffled groups; when p_norm > mu * p_shuffle
// every correct ordered response earns alpha, otherwise nobody does.
// Shuffled responses never receive rewards themselves.
std::vector<double> reward_temporal(std::span<const Response> ordered_group,
                                    std::span<const Response> shuffled_group,
                                    Label label, const RewardConfig& cfg);

RewardBreakdown combine(double det, double tmp, double len, double fmt,
                        const RewardConfig& cfg);

}  // namespace ashield
