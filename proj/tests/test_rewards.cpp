#include <regex>
#include <string>
#include <vector>

#include <doctest.h>

#include "ashield/errors.hpp"
#include "ashield/numerics.hpp"
#include "ashield/rewards.hpp"

using namespace ashield;

namespace {

Response make_response(std::vector<int> tokens) {
  Response r;
  r.tokens = std::move(tokens);
  r.logprobs.assign(r.tokens.size(), -1.0);
  r.parsed = parse_format(r.tokens);
  return r;
}

// Independent recognizer: token classes mapped onto characters, matched by
// the standard regex engine.
bool regex_reference(const std::vector<int>& tokens) {
  static const std::regex pattern("tC*ca[RF]zE");
  std::string s;
  s.reserve(tokens.size());
  for (int tok : tokens) {
    switch (tok) {
      case kThinkOpen: s += 't'; break;
      case kThinkClose: s += 'c'; break;
      case kAnswerOpen: s += 'a'; break;
      case kAnswerClose: s += 'z'; break;
      case kRealToken: s += 'R'; break;
      case kFakeToken: s += 'F'; break;
      case kEos: s += 'E'; break;
      default: s += 'C'; break;
    }
  }
  return std::regex_match(s, pattern);
}

const RewardConfig kDefaults;

}  // namespace

TEST_SUITE_BEGIN("rewards");

TEST_CASE("parse_format accepts the grammar") {
  const auto parsed = parse_format(std::vector<int>{
      kThinkOpen, kCueFirst, kCueFirst + 2, kThinkClose, kAnswerOpen, kFakeToken,
      kAnswerClose, kEos});
  CHECK(parsed.well_formed);
  CHECK(parsed.answer == Answer::fake);
  REQUIRE(parsed.think_span.has_value());
  CHECK(parsed.think_span->first == 1);
  CHECK(parsed.think_span->second == 3);

  const auto empty_think = parse_format(std::vector<int>{
      kThinkOpen, kThinkClose, kAnswerOpen, kRealToken, kAnswerClose, kEos});
  CHECK(empty_think.well_formed);
  CHECK(empty_think.answer == Answer::real);
}

TEST_CASE("parse_format rejects structural violations") {
  // missing think block
  CHECK_FALSE(parse_format(std::vector<int>{kAnswerOpen, kRealToken, kAnswerClose, kEos})
                  .well_formed);
  // two answer tokens
  CHECK_FALSE(parse_format(std::vector<int>{kThinkOpen, kThinkClose, kAnswerOpen,
                                            kRealToken, kFakeToken, kAnswerClose, kEos})
                  .well_formed);
  // truncated, no EOS
  CHECK_FALSE(parse_format(std::vector<int>{kThinkOpen, kThinkClose, kAnswerOpen,
                                            kRealToken, kAnswerClose})
                  .well_formed);
  // trailing cue after the terminator
  CHECK_FALSE(parse_format(std::vector<int>{kThinkOpen, kThinkClose, kAnswerOpen,
                                            kRealToken, kAnswerClose, kEos, kCueFirst})
                  .well_formed);
  CHECK_FALSE(parse_format(std::vector<int>{}).well_formed);
}

TEST_CASE("parser agrees with the regex reference on short strings") {
  // exhaustive over all token strings of length <= 4
  std::vector<int> buf;
  long checked = 0;
  const auto walk = [&](auto&& self, int depth) -> void {
    const ParsedFormat mine = parse_format(buf);
    CHECK(mine.well_formed == regex_reference(buf));
    ++checked;
    if (depth == 4) return;
    for (int tok = 0; tok < kVocabSize; ++tok) {
      buf.push_back(tok);
      self(self, depth + 1);
      buf.pop_back();
    }
  };
  walk(walk, 0);
  CHECK(checked == 1 + 15 + 15 * 15 + 15 * 15 * 15 + 15 * 15 * 15 * 15);

  // random longer strings, biased toward near-misses of the grammar
  RngStream rng = RngStream::from_seed(42);
  for (int trial = 0; trial < 20000; ++trial) {
    const int len = 5 + static_cast<int>(rng.next_below(12));
    std::vector<int> tokens(static_cast<std::size_t>(len));
    for (int& t : tokens) {
      if (rng.next_double() < 0.55) {
        const int skeleton[] = {kThinkOpen, kCueFirst, kThinkClose, kAnswerOpen,
                                kRealToken, kFakeToken, kAnswerClose, kEos};
        t = skeleton[rng.next_below(8)];
      } else {
        t = static_cast<int>(rng.next_below(kVocabSize));
      }
    }
    CHECK(parse_format(tokens).well_formed == regex_reference(tokens));
  }
}

TEST_CASE("reward_accuracy compares the parsed answer to the label") {
  const Response fake_ans = make_response({kThinkOpen, kThinkClose, kAnswerOpen,
                                           kFakeToken, kAnswerClose, kEos});
  CHECK(reward_accuracy(fake_ans, Label::fake) == 1.0);
  CHECK(reward_accuracy(fake_ans, Label::real) == 0.0);

  const Response malformed = make_response({kFakeToken, kEos});
  CHECK(reward_accuracy(malformed, Label::real) == 0.0);
  CHECK(reward_accuracy(malformed, Label::fake) == 0.0);
}

TEST_CASE("reward_length is inclusive on both bounds") {
  RewardConfig cfg;
  cfg.l_min = 8;
  cfg.l_max = 24;
  const auto with_len = [&](int n) {
    Response r;
    r.tokens.assign(static_cast<std::size_t>(n), kCueFirst);
    r.logprobs.assign(r.tokens.size(), -1.0);
    return r;
  };
  CHECK(reward_length(with_len(12), cfg) == doctest::Approx(0.1));
  CHECK(reward_length(with_len(7), cfg) == 0.0);
  CHECK(reward_length(with_len(8), cfg) == doctest::Approx(0.1));
  CHECK(reward_length(with_len(24), cfg) == doctest::Approx(0.1));
  CHECK(reward_length(with_len(25), cfg) == 0.0);
}

TEST_CASE("reward_format mirrors the parser") {
  CHECK(reward_format(make_response({kThinkOpen, kCueFirst + 4, kThinkClose, kAnswerOpen,
                                     kRealToken, kAnswerClose, kEos})) == 1.0);
  CHECK(reward_format(make_response({kThinkOpen, kThinkClose, kAnswerOpen, kRealToken,
                                     kAnswerClose})) == 0.0);
  CHECK(reward_format(make_response({kThinkOpen, kThinkClose, kAnswerOpen, kRealToken,
                                     kAnswerClose, kEos, kCueFirst})) == 0.0);
}

TEST_CASE("reward_temporal grants alpha only past the margin") {
  const Response right = make_response({kThinkOpen, kThinkClose, kAnswerOpen, kFakeToken,
                                        kAnswerClose, kEos});
  const Response wrong = make_response({kThinkOpen, kThinkClose, kAnswerOpen, kRealToken,
                                        kAnswerClose, kEos});
  const Response broken = make_response({kEos});

  SUBCASE("equal fractions pass because mu discounts the shuffled side") {
    // p_norm = p_shuffle = 0.75, and 0.75 > 0.8 * 0.75
    const std::vector<Response> ordered = {right, right, right, wrong};
    const std::vector<Response> shuffled = {right, right, right, wrong};
    const auto r = reward_temporal(ordered, shuffled, Label::fake, kDefaults);
    CHECK(r == std::vector<double>{0.3, 0.3, 0.3, 0.0});
  }

  SUBCASE("all-zero accuracy never grants") {
    const std::vector<Response> ordered = {wrong, broken};
    const std::vector<Response> shuffled = {wrong, broken};
    const auto r = reward_temporal(ordered, shuffled, Label::fake, kDefaults);
    CHECK(r == std::vector<double>{0.0, 0.0});
  }

  SUBCASE("ordered accuracy under the discounted shuffled accuracy fails") {
    // p_norm = 0.5, p_shuffle = 0.75, 0.5 <= 0.6
    const std::vector<Response> ordered = {right, right, wrong, wrong};
    const std::vector<Response> shuffled = {right, right, right, wrong};
    const auto r = reward_temporal(ordered, shuffled, Label::fake, kDefaults);
    CHECK(r == std::vector<double>{0.0, 0.0, 0.0, 0.0});
  }

  SUBCASE("group sizes must match") {
    const std::vector<Response> ordered = {right};
    const std::vector<Response> shuffled = {right, wrong};
    CHECK_THROWS_AS((void)reward_temporal(ordered, shuffled, Label::fake, kDefaults),
                    InvalidInput);
  }

  SUBCASE("depends on the groups only through correctness") {
    const std::vector<Response> ordered = {right, wrong, right, right};
    const std::vector<Response> shuffled = {wrong, right, right, wrong};
    const std::vector<Response> shuffled_perm = {right, wrong, wrong, right};
    const auto a = reward_temporal(ordered, shuffled, Label::fake, kDefaults);
    const auto b = reward_temporal(ordered, shuffled_perm, Label::fake, kDefaults);
    CHECK(a == b);
  }
}

TEST_CASE("combine weights the four components") {
  const RewardBreakdown full = combine(1.0, 0.3, 0.1, 1.0, kDefaults);
  CHECK(full.total == doctest::Approx(2.4));
  CHECK(combine(0.0, 0.0, 0.0, 0.0, kDefaults).total == 0.0);

  RewardConfig heavy = kDefaults;
  heavy.weights = {2.0, 1.0, 1.0, 1.0};
  CHECK(combine(1.0, 0.0, 0.0, 1.0, heavy).total == doctest::Approx(3.0));
}

TEST_CASE("total is monotone in each component") {
  RngStream rng = RngStream::from_seed(6);
  for (int trial = 0; trial < 200; ++trial) {
    const double det = rng.next_below(2);
    const double tmp = rng.next_below(2) ? kDefaults.alpha : 0.0;
    const double len = rng.next_below(2) ? kDefaults.lambda : 0.0;
    const double fmt = rng.next_below(2);
    const double base = combine(det, tmp, len, fmt, kDefaults).total;
    CHECK(combine(1.0, tmp, len, fmt, kDefaults).total >= base);
    CHECK(combine(det, kDefaults.alpha, len, fmt, kDefaults).total >= base);
    CHECK(combine(det, tmp, kDefaults.lambda, fmt, kDefaults).total >= base);
    CHECK(combine(det, tmp, len, 1.0, kDefaults).total >= base);
  }
}

TEST_CASE("reward config validation") {
  RewardConfig cfg;
  CHECK_NOTHROW(cfg.validate(32));
  cfg.l_min = 5;
  CHECK_THROWS_AS(cfg.validate(32), InvalidConfig);
  cfg.l_min = 8;
  cfg.l_max = 40;
  CHECK_THROWS_AS(cfg.validate(32), InvalidConfig);
  cfg.l_max = 24;
  cfg.mu = 0.0;
  CHECK_THROWS_AS(cfg.validate(32), InvalidConfig);
}

TEST_SUITE_END();
