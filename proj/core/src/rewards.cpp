#include "ashield/rewards.hpp"

#include "ashield/errors.hpp"

namespace ashield {

void RewardConfig::validate(int max_len) const {
  if (alpha < 0.0 || lambda < 0.0) {
    throw InvalidConfig("reward config: alpha and lambda must be nonnegative");
  }
  if (!(mu > 0.0 && mu <= 1.0)) {
    throw InvalidConfig("reward config: mu must be in (0, 1]");
  }
  if (l_min < kMinResponseLen || l_min > l_max || l_max > max_len) {
    throw InvalidConfig("reward config: need 7 <= l_min <= l_max <= max_len");
  }
}

ParsedFormat parse_format(std::span<const int> tokens) {
  ParsedFormat out;
  const int n = static_cast<int>(tokens.size());
  int i = 0;

  if (i >= n || tokens[i] != kThinkOpen) return out;
  ++i;
  const int think_begin = i;
  while (i < n && is_cue(tokens[i])) ++i;
  const int think_end = i;
  if (i >= n || tokens[i] != kThinkClose) return out;
  ++i;
  if (i >= n || tokens[i] != kAnswerOpen) return out;
  ++i;
  if (i >= n || (tokens[i] != kRealToken && tokens[i] != kFakeToken)) return out;
  const bool is_real = tokens[i] == kRealToken;
  ++i;
  if (i >= n || tokens[i] != kAnswerClose) return out;
  ++i;
  if (i >= n || tokens[i] != kEos) return out;
  ++i;
  if (i != n) return out;  // nothing may follow the terminator

  out.well_formed = true;
  out.answer = is_real ? Answer::real : Answer::fake;
  out.think_span = {think_begin, think_end};
  return out;
}

double reward_accuracy(const Response& response, Label label) {
  if (!response.parsed.well_formed) return 0.0;
  const Answer want = (label == Label::real) ? Answer::real : Answer::fake;
  return response.parsed.answer == want ? 1.0 : 0.0;
}

double reward_length(const Response& response, const RewardConfig& cfg) {
  const int len = static_cast<int>(response.tokens.size());
  return (len >= cfg.l_min && len <= cfg.l_max) ? cfg.lambda : 0.0;
}

double reward_format(const Response& response) {
  return response.parsed.well_formed ? 1.0 : 0.0;
}

std::vector<double> reward_temporal(std::span<const Response> ordered_group,
                                    std::span<const Response> shuffled_group,
                                    Label label, const RewardConfig& cfg) {
  if (ordered_group.empty() || shuffled_group.empty()) {
    throw InvalidInput("reward_temporal: empty group");
  }
  if (ordered_group.size() != shuffled_group.size()) {
    throw InvalidInput("reward_temporal: group size mismatch");
  }

  const auto correct_fraction = [&](std::span<const Response> group) {
    double c = 0.0;
    for (const Response& r : group) c += reward_accuracy(r, label);
    return c / static_cast<double>(group.size());
  };
  const double p_norm = correct_fraction(ordered_group);
  const double p_shuffle = correct_fraction(shuffled_group);

  std::vector<double> out(ordered_group.size(), 0.0);
  if (p_norm > cfg.mu * p_shuffle) {
    for (std::size_t i = 0; i < ordered_group.size(); ++i) {
      if (reward_accuracy(ordered_group[i], label) == 1.0) out[i] = cfg.alpha;
    }
  }
  return out;
}

RewardBreakdown combine(double det, double tmp, double len, double fmt,
                        const RewardConfig& cfg) {
  RewardBreakdown b;
  b.det = det;
  b.tmp = tmp;
  b.len = len;
  b.fmt = fmt;
  b.total = cfg.weights[0] * det + cfg.weights[1] * tmp + cfg.weights[2] * len +
            cfg.weights[3] * fmt;
  return b;
}

}  // namespace ashield
