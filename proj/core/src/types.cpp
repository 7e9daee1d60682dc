#include "ashield/types.hpp"

#include "ashield/errors.hpp"
#include "ashield/vocab.hpp"

namespace ashield {

std::string to_string(Label v) { return v == Label::real ? "real" : "fake"; }

std::string to_string(Family v) {
  switch (v) {
    case Family::pose: return "pose";
    case Family::audio: return "audio";
    case Family::text: return "text";
  }
  return "pose";
}

std::string to_string(Split v) { return v == Split::train ? "train" : "test"; }

std::string to_string(FuseMode v) {
  switch (v) {
    case FuseMode::full: return "full";
    case FuseMode::no_residual: return "no_residual";
    case FuseMode::reconstruction: return "reconstruction";
  }
  return "full";
}

Label label_from_string(const std::string& s) {
  if (s == "real") return Label::real;
  if (s == "fake") return Label::fake;
  throw InvalidInput("unknown label: " + s);
}

Family family_from_string(const std::string& s) {
  if (s == "pose") return Family::pose;
  if (s == "audio") return Family::audio;
  if (s == "text") return Family::text;
  throw InvalidInput("unknown family: " + s);
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw InvalidInput("unknown split: " + s);
}

FuseMode fuse_mode_from_string(const std::string& s) {
  if (s == "full") return FuseMode::full;
  if (s == "no_residual") return FuseMode::no_residual;
  if (s == "reconstruction") return FuseMode::reconstruction;
  throw InvalidInput("unknown fuse mode: " + s);
}

const std::array<std::string_view, kVocabSize>& token_names() {
  static const std::array<std::string_view, kVocabSize> names = {
      "<think>", "</think>", "<answer>", "</answer>", "REAL", "FAKE", "<eos>",
      "C1",      "C2",       "C3",       "C4",        "C5",   "C6",   "C7",
      "C8"};
  return names;
}

}  // namespace ashield
