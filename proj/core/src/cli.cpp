#include "ashield/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ashield/encoders.hpp"
#include "ashield/errors.hpp"
#include "ashield/eval.hpp"
#include "ashield/grpo.hpp"
#include "ashield/io.hpp"
#include "ashield/simulator.hpp"

namespace ashield::cli {
namespace {

using nlohmann::json;

const char* kUsage =
    "usage: ashield <command> [--key value ...] [--config file.json]\n"
    "\n"
    "commands:\n"
    "  gen-data   synthesize a labeled clip dataset (jsonl)\n"
    "  train      run group-relative policy optimization on a dataset\n"
    "  eval       score a checkpoint on the test split and report AUC\n"
    "  inspect    print per-frame diagnostics and fused features for one clip\n";

// Flags that take no value.
const std::set<std::string> kBoolFlags = {"no-tcr", "help"};

struct Args {
  std::map<std::string, std::string> values;
  std::set<std::string> consumed;

  bool has(const std::string& key) const { return values.count(key) > 0; }

  std::string take(const std::string& key, const std::string& fallback) {
    consumed.insert(key);
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) {
    consumed.insert(key);
    const auto it = values.find(key);
    if (it == values.end()) throw InvalidConfig("missing required flag --" + key);
    return it->second;
  }

  long take_int(const std::string& key, long fallback) {
    const std::string raw = take(key, "");
    if (raw.empty()) return fallback;
    long out = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    if (ec != std::errc{} || ptr != raw.data() + raw.size()) {
      throw InvalidConfig("flag --" + key + " expects an integer, got '" + raw + "'");
    }
    return out;
  }

  std::uint64_t take_u64(const std::string& key, std::uint64_t fallback) {
    const std::string raw = take(key, "");
    if (raw.empty()) return fallback;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    if (ec != std::errc{} || ptr != raw.data() + raw.size()) {
      throw InvalidConfig("flag --" + key + " expects a nonnegative integer, got '" + raw + "'");
    }
    return out;
  }

  double take_double(const std::string& key, double fallback) {
    const std::string raw = take(key, "");
    if (raw.empty()) return fallback;
    try {
      std::size_t pos = 0;
      const double out = std::stod(raw, &pos);
      if (pos != raw.size() || !std::isfinite(out)) throw std::invalid_argument(raw);
      return out;
    } catch (const std::exception&) {
      throw InvalidConfig("flag --" + key + " expects a number, got '" + raw + "'");
    }
  }

  bool take_bool(const std::string& key) {
    const std::string raw = take(key, "false");
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    throw InvalidConfig("flag --" + key + " expects true/false, got '" + raw + "'");
  }

  // Any key never consumed by the command is a config error, not a no-op.
  void reject_unconsumed(const std::string& command) const {
    for (const auto& [key, value] : values) {
      if (!consumed.count(key)) {
        throw InvalidConfig("unknown option --" + key + " for command " + command);
      }
    }
  }
};

std::string json_scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw InvalidConfig("config file values must be scalars, got: " + v.dump());
}

Args parse_args(const std::vector<std::string>& argv, std::size_t start) {
  Args args;
  std::string config_path;
  for (std::size_t i = start; i < argv.size(); ++i) {
    const std::string& word = argv[i];
    if (word.rfind("--", 0) != 0 || word.size() <= 2) {
      throw InvalidConfig("expected --key, got '" + word + "'");
    }
    const std::string key = word.substr(2);
    if (key == "config") {
      if (i + 1 >= argv.size()) throw InvalidConfig("--config expects a file path");
      config_path = argv[++i];
      continue;
    }
    if (kBoolFlags.count(key)) {
      args.values[key] = "true";
      continue;
    }
    if (i + 1 >= argv.size()) throw InvalidConfig("flag --" + key + " expects a value");
    if (args.values.count(key)) throw InvalidConfig("duplicate flag --" + key);
    args.values[key] = argv[++i];
  }

  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + config_path);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw InvalidConfig(std::string("malformed config file: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidConfig("config file must contain a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (!args.values.count(key)) {  // flags take precedence
        args.values[key] = json_scalar_to_string(value);
      }
    }
  }
  return args;
}

std::vector<Family> parse_family_csv(const std::string& csv) {
  std::vector<Family> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(family_from_string(item));
  }
  return out;
}

int cmd_gen_data(Args& args) {
  GeneratorConfig cfg;
  cfg.clips_per_family = static_cast<int>(args.take_int("clips-per-family", cfg.clips_per_family));
  if (args.has("families")) cfg.families = parse_family_csv(args.take("families", ""));
  cfg.codebook_k = static_cast<int>(args.take_int("codebook-k", cfg.codebook_k));
  cfg.t_min = static_cast<int>(args.take_int("t-min", cfg.t_min));
  cfg.t_max = static_cast<int>(args.take_int("t-max", cfg.t_max));
  cfg.strength_min = args.take_double("strength-min", cfg.strength_min);
  cfg.strength_max = args.take_double("strength-max", cfg.strength_max);
  const std::uint64_t seed = args.take_u64("seed", 0);
  const std::string out = args.require("out");
  args.reject_unconsumed("gen-data");

  const DatasetManifest manifest = build_dataset(cfg, seed);
  write_dataset(manifest, out);
  std::cerr << "wrote " << manifest.clips.size() << " clips to " << out << "\n";
  return 0;
}

GrpoConfig grpo_config_from_args(Args& args) {
  GrpoConfig cfg;
  cfg.group_size = static_cast<int>(args.take_int("group-size", cfg.group_size));
  cfg.clip_epsilon = args.take_double("epsilon", cfg.clip_epsilon);
  cfg.kl_beta = args.take_double("beta", cfg.kl_beta);
  cfg.inner_updates = static_cast<int>(args.take_int("inner-updates", cfg.inner_updates));
  cfg.learning_rate = args.take_double("lr", cfg.learning_rate);
  cfg.temperature = args.take_double("temperature", cfg.temperature);
  cfg.ref_refresh_every =
      static_cast<int>(args.take_int("ref-refresh-every", cfg.ref_refresh_every));
  cfg.steps = static_cast<int>(args.take_int("steps", cfg.steps));
  cfg.batch_size = static_cast<int>(args.take_int("batch-size", cfg.batch_size));
  cfg.max_len = static_cast<int>(args.take_int("max-len", cfg.max_len));
  cfg.seed = args.take_u64("seed", cfg.seed);
  cfg.reward.alpha = args.take_double("alpha", cfg.reward.alpha);
  cfg.reward.mu = args.take_double("mu", cfg.reward.mu);
  cfg.reward.lambda = args.take_double("lambda", cfg.reward.lambda);
  cfg.reward.l_min = static_cast<int>(args.take_int("l-min", cfg.reward.l_min));
  cfg.reward.l_max = static_cast<int>(args.take_int("l-max", cfg.reward.l_max));
  cfg.reward.weights[0] = args.take_double("w-det", cfg.reward.weights[0]);
  cfg.reward.weights[1] = args.take_double("w-tmp", cfg.reward.weights[1]);
  cfg.reward.weights[2] = args.take_double("w-len", cfg.reward.weights[2]);
  cfg.reward.weights[3] = args.take_double("w-fmt", cfg.reward.weights[3]);
  if (args.has("no-tcr")) cfg.ablate_tcr = args.take_bool("no-tcr");
  cfg.fuse_mode = fuse_mode_from_string(args.take("mode", "full"));
  if (args.has("train-families")) {
    cfg.train_families = parse_family_csv(args.take("train-families", ""));
  }
  return cfg;
}

int cmd_train(Args& args) {
  const std::string data_path = args.require("data");
  const std::string out_path = args.require("out");
  const std::string metrics_path = args.take("metrics", out_path + ".metrics.jsonl");
  GrpoConfig cfg = grpo_config_from_args(args);
  args.reject_unconsumed("train");

  const DatasetManifest manifest = read_dataset(data_path);
  const TrainState state = train(cfg, manifest, out_path, metrics_path);
  std::cerr << "trained " << state.step << " steps; checkpoint " << out_path
            << ", metrics " << metrics_path << "\n";
  return 0;
}

int cmd_eval(Args& args) {
  const std::string ckpt_path = args.require("checkpoint");
  const std::string data_path = args.require("data");
  const std::string out_path = args.require("out");
  const std::string roc_path = args.take("emit-roc", "");

  Protocol protocol;
  const std::string kind = args.take("protocol", "in_domain");
  if (kind == "in_domain") {
    protocol.kind = Protocol::Kind::in_domain;
  } else if (kind == "cross_domain") {
    protocol.kind = Protocol::Kind::cross_domain;
  } else if (kind == "ablation") {
    protocol.kind = Protocol::Kind::ablation;
  } else {
    throw InvalidConfig("unknown protocol: " + kind);
  }
  if (args.has("test-families")) {
    protocol.test_families = parse_family_csv(args.take("test-families", ""));
  }
  if (args.has("train-families")) {
    protocol.train_families = parse_family_csv(args.take("train-families", ""));
  }
  if (args.has("mode")) {
    protocol.mode_override = fuse_mode_from_string(args.take("mode", "full"));
  }
  protocol.ablation_tag = args.take("tag", "");
  args.reject_unconsumed("eval");

  const Checkpoint ckpt = read_checkpoint(ckpt_path);
  const DatasetManifest manifest = read_dataset(data_path);
  const EvalReport report = evaluate(ckpt, manifest, protocol);
  write_report(report, out_path);
  if (!roc_path.empty()) {
    const ScoredSplit scored = score_split(ckpt, manifest, protocol);
    const auto points = roc_points(scored.fake, scored.real);
    write_roc(points, roc_path);
  }
  std::cerr << "auc " << report.auc << " over " << report.n_fake << " fake / "
            << report.n_real << " real; report " << out_path << "\n";
  return 0;
}

int cmd_inspect(Args& args) {
  const std::string data_path = args.require("data");
  const std::string clip_id = args.require("id");
  const std::string ckpt_path = args.take("checkpoint", "");
  const std::uint64_t shuffle_seed = args.take_u64("shuffle-seed", 0);
  args.reject_unconsumed("inspect");

  const DatasetManifest manifest = read_dataset(data_path);
  const auto it = std::find_if(manifest.clips.begin(), manifest.clips.end(),
                               [&](const VideoClip& c) { return c.id == clip_id; });
  if (it == manifest.clips.end()) throw InvalidInput("unknown clip id: " + clip_id);
  const VideoClip& clip = *it;

  Codebook codebook;
  if (!ckpt_path.empty()) {
    codebook = read_checkpoint(ckpt_path).codebook;
  } else {
    codebook = make_manifold(manifest.codebook_seed, manifest.config.codebook_k,
                             manifest.config.frame_dim);
  }

  const std::vector<int> nearest = nearest_centers(clip, codebook);
  const std::vector<double> residual = quantize_and_residual(clip, codebook);

  char line[256];
  std::printf("clip %s label=%s family=%s strength=%.6g T=%d D=%d\n", clip.id.c_str(),
              to_string(clip.label).c_str(), to_string(clip.family).c_str(),
              clip.artifact_strength, clip.t_frames, clip.dim);
  std::printf("%6s %12s %8s %14s %14s\n", "frame", "norm", "center", "center-dist",
              "residual-norm");
  for (int t = 0; t < clip.t_frames; ++t) {
    double norm2 = 0.0, dist2 = 0.0, res2 = 0.0;
    const double* x = clip.frame(t);
    const double* c = codebook.center(nearest[t]);
    const double* r = residual.data() + static_cast<std::size_t>(t) * clip.dim;
    for (int d = 0; d < clip.dim; ++d) {
      norm2 += x[d] * x[d];
      dist2 += (x[d] - c[d]) * (x[d] - c[d]);
      res2 += r[d] * r[d];
    }
    std::snprintf(line, sizeof(line), "%6d %12.6f %8d %14.6f %14.6f\n", t,
                  std::sqrt(norm2), nearest[t], std::sqrt(dist2), std::sqrt(res2));
    std::fputs(line, stdout);
  }

  const auto print_features = [&](const char* tag, const Episode& ep) {
    std::printf("%s features:", tag);
    for (double f : ep.features) std::printf(" %.6f", f);
    std::printf("\n");
  };
  print_features("ordered", fuse(clip, codebook, Ordering::ordered, nullptr, FuseMode::full));
  RngStream rng = RngStream::from_seed(shuffle_seed);
  print_features("shuffled",
                 fuse(clip, codebook, Ordering::shuffled, &rng, FuseMode::full));
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  try {
    if (args.empty() || args[0] == "--help" || args[0] == "help") {
      std::cerr << kUsage;
      return args.empty() ? 2 : 0;
    }
    const std::string& command = args[0];
    Args parsed = parse_args(args, 1);
    if (parsed.has("help")) {
      std::cerr << kUsage;
      return 0;
    }
    if (command == "gen-data") return cmd_gen_data(parsed);
    if (command == "train") return cmd_train(parsed);
    if (command == "eval") return cmd_eval(parsed);
    if (command == "inspect") return cmd_inspect(parsed);
    throw InvalidConfig("unknown command: " + command);
  } catch (const InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace ashield::cli
