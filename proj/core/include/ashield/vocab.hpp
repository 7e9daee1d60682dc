#pragma once

#include <array>
#include <string_view>

namespace ashield {

// Fixed response vocabulary. Token ids are stable list indices; the order
// is part of the checkpoint format.
enum Token : int {
  kThinkOpen = 0,
  kThinkClose = 1,
  kAnswerOpen = 2,
  kAnswerClose = 3,
  kRealToken = 4,
  kFakeToken = 5,
  kEos = 6,
  kCueFirst = 7,  // C1..C8 occupy ids 7..14
};

constexpr int kNumCues = 8;
constexpr int kVocabSize = 15;

// Lower bound used for response-length configuration and sampling budgets.
constexpr int kMinResponseLen = 7;

constexpr bool is_cue(int token) { return token >= kCueFirst && token < kVocabSize; }
constexpr bool is_valid_token(int token) { return token >= 0 && token < kVocabSize; }

const std::array<std::string_view, kVocabSize>& token_names();

}  // namespace ashield
