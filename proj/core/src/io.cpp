#include "ashield/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ashield/errors.hpp"
#include "ashield/vocab.hpp"

namespace ashield {
namespace {

using nlohmann::json;

json family_list_to_json(const std::vector<Family>& families) {
  json arr = json::array();
  for (const Family f : families) arr.push_back(to_string(f));
  return arr;
}

std::vector<Family> family_list_from_json(const json& arr) {
  std::vector<Family> out;
  for (const auto& v : arr) out.push_back(family_from_string(v.get<std::string>()));
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  return in;
}

}  // namespace

json generator_config_to_json(const GeneratorConfig& cfg) {
  return json{{"clips_per_family", cfg.clips_per_family},
              {"families", family_list_to_json(cfg.families)},
              {"codebook_k", cfg.codebook_k},
              {"frame_dim", cfg.frame_dim},
              {"t_min", cfg.t_min},
              {"t_max", cfg.t_max},
              {"strength_min", cfg.strength_min},
              {"strength_max", cfg.strength_max}};
}

GeneratorConfig generator_config_from_json(const json& j) {
  GeneratorConfig cfg;
  cfg.clips_per_family = j.at("clips_per_family").get<int>();
  cfg.families = family_list_from_json(j.at("families"));
  cfg.codebook_k = j.at("codebook_k").get<int>();
  cfg.frame_dim = j.at("frame_dim").get<int>();
  cfg.t_min = j.at("t_min").get<int>();
  cfg.t_max = j.at("t_max").get<int>();
  cfg.strength_min = j.at("strength_min").get<double>();
  cfg.strength_max = j.at("strength_max").get<double>();
  return cfg;
}

json grpo_config_to_json(const GrpoConfig& cfg) {
  return json{{"group_size", cfg.group_size},
              {"clip_epsilon", cfg.clip_epsilon},
              {"kl_beta", cfg.kl_beta},
              {"inner_updates", cfg.inner_updates},
              {"learning_rate", cfg.learning_rate},
              {"temperature", cfg.temperature},
              {"ref_refresh_every", cfg.ref_refresh_every},
              {"steps", cfg.steps},
              {"batch_size", cfg.batch_size},
              {"max_len", cfg.max_len},
              {"seed", cfg.seed},
              {"ablate_tcr", cfg.ablate_tcr},
              {"fuse_mode", to_string(cfg.fuse_mode)},
              {"train_families", family_list_to_json(cfg.train_families)},
              {"reward",
               json{{"alpha", cfg.reward.alpha},
                    {"mu", cfg.reward.mu},
                    {"lambda", cfg.reward.lambda},
                    {"l_min", cfg.reward.l_min},
                    {"l_max", cfg.reward.l_max},
                    {"weights", cfg.reward.weights}}}};
}

GrpoConfig grpo_config_from_json(const json& j) {
  GrpoConfig cfg;
  cfg.group_size = j.at("group_size").get<int>();
  cfg.clip_epsilon = j.at("clip_epsilon").get<double>();
  cfg.kl_beta = j.at("kl_beta").get<double>();
  cfg.inner_updates = j.at("inner_updates").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.temperature = j.at("temperature").get<double>();
  cfg.ref_refresh_every = j.at("ref_refresh_every").get<int>();
  cfg.steps = j.at("steps").get<int>();
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.max_len = j.at("max_len").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.ablate_tcr = j.at("ablate_tcr").get<bool>();
  cfg.fuse_mode = fuse_mode_from_string(j.at("fuse_mode").get<std::string>());
  cfg.train_families = family_list_from_json(j.at("train_families"));
  const json& r = j.at("reward");
  cfg.reward.alpha = r.at("alpha").get<double>();
  cfg.reward.mu = r.at("mu").get<double>();
  cfg.reward.lambda = r.at("lambda").get<double>();
  cfg.reward.l_min = r.at("l_min").get<int>();
  cfg.reward.l_max = r.at("l_max").get<int>();
  cfg.reward.weights = r.at("weights").get<std::array<double, 4>>();
  return cfg;
}

void write_dataset(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out = open_out(path);
  const json header = {{"version", kDatasetFormatVersion},
                       {"config", generator_config_to_json(manifest.config)},
                       {"seed", manifest.seed},
                       {"codebook_seed", manifest.codebook_seed}};
  out << header.dump() << "\n";
  for (const VideoClip& clip : manifest.clips) {
    const json record = {{"id", clip.id},
                         {"label", to_string(clip.label)},
                         {"family", to_string(clip.family)},
                         {"strength", clip.artifact_strength},
                         {"seed", clip.seed},
                         {"frames", clip.frames},
                         {"T", clip.t_frames},
                         {"D", clip.dim}};
    out << record.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

DatasetManifest read_dataset(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);

  DatasetManifest manifest;
  try {
    const json header = json::parse(line);
    if (header.at("version").get<std::string>() != kDatasetFormatVersion) {
      throw IoError("unsupported dataset version in " + path);
    }
    manifest.config = generator_config_from_json(header.at("config"));
    manifest.seed = header.at("seed").get<std::uint64_t>();
    manifest.codebook_seed = header.at("codebook_seed").get<std::uint64_t>();

    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json record = json::parse(line);
      VideoClip clip;
      clip.id = record.at("id").get<std::string>();
      clip.label = label_from_string(record.at("label").get<std::string>());
      clip.family = family_from_string(record.at("family").get<std::string>());
      clip.artifact_strength = record.at("strength").get<double>();
      clip.seed = record.at("seed").get<std::uint64_t>();
      clip.t_frames = record.at("T").get<int>();
      clip.dim = record.at("D").get<int>();
      clip.frames = record.at("frames").get<std::vector<double>>();
      if (clip.frames.size() !=
          static_cast<std::size_t>(clip.t_frames) * clip.dim) {
        throw IoError("clip " + clip.id + " has inconsistent frame count");
      }
      // The split is encoded in the id prefix.
      clip.split = clip.id.rfind("test-", 0) == 0 ? Split::test : Split::train;
      manifest.clips.push_back(std::move(clip));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed dataset file " + path + ": " + e.what());
  }
  return manifest;
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json vocab = json::array();
  for (const auto& name : token_names()) vocab.push_back(std::string(name));

  const json doc = {{"format", kCheckpointFormatVersion},
                    {"vocab", vocab},
                    {"F", kContextDim},
                    {"V", kVocabSize},
                    {"W", ckpt.params.w},
                    {"b", ckpt.params.b},
                    {"codebook",
                     json{{"K", ckpt.codebook.k},
                          {"D", ckpt.codebook.dim},
                          {"centers", ckpt.codebook.centers},
                          {"trained_on",
                           ckpt.codebook.trained_on == Codebook::Source::manifold
                               ? "manifold"
                               : "fitted"}}},
                    {"config", ckpt.config_echo},
                    {"rng_state", ckpt.rng_state},
                    {"step", ckpt.step}};

  std::ofstream out = open_out(path);
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in = open_in(path);
  Checkpoint ckpt;
  try {
    json doc;
    in >> doc;
    if (doc.at("format").get<std::string>() != kCheckpointFormatVersion) {
      throw IoError("unsupported checkpoint format in " + path);
    }
    if (doc.at("F").get<int>() != kContextDim || doc.at("V").get<int>() != kVocabSize) {
      throw IoError("checkpoint dimensions do not match this build: " + path);
    }
    ckpt.params.w = doc.at("W").get<std::vector<double>>();
    ckpt.params.b = doc.at("b").get<std::vector<double>>();
    if (ckpt.params.w.size() != static_cast<std::size_t>(kVocabSize) * kContextDim ||
        ckpt.params.b.size() != static_cast<std::size_t>(kVocabSize)) {
      throw IoError("checkpoint parameter sizes are inconsistent: " + path);
    }
    const json& cb = doc.at("codebook");
    ckpt.codebook.k = cb.at("K").get<int>();
    ckpt.codebook.dim = cb.at("D").get<int>();
    ckpt.codebook.centers = cb.at("centers").get<std::vector<double>>();
    ckpt.codebook.trained_on = cb.at("trained_on").get<std::string>() == "fitted"
                                   ? Codebook::Source::fitted
                                   : Codebook::Source::manifold;
    if (ckpt.codebook.centers.size() !=
        static_cast<std::size_t>(ckpt.codebook.k) * ckpt.codebook.dim) {
      throw IoError("checkpoint codebook is inconsistent: " + path);
    }
    ckpt.config_echo = doc.at("config");
    ckpt.rng_state = doc.at("rng_state").get<std::uint64_t>();
    ckpt.step = doc.at("step").get<int>();
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint " + path + ": " + e.what());
  }
  ckpt.id = std::filesystem::path(path).stem().string();
  return ckpt;
}

void write_metrics(std::span<const StepMetrics> metrics, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const StepMetrics& m : metrics) {
    const json row = {{"step", m.step},
                      {"mean_total", m.mean_total},
                      {"mean_det", m.mean_det},
                      {"mean_tmp", m.mean_tmp},
                      {"mean_len", m.mean_len},
                      {"mean_fmt", m.mean_fmt},
                      {"mean_kl", m.mean_kl},
                      {"clip_fraction", m.clip_fraction},
                      {"loss", m.loss}};
    out << row.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<StepMetrics> read_metrics(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<StepMetrics> out;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json row = json::parse(line);
      StepMetrics m;
      m.step = row.at("step").get<int>();
      m.mean_total = row.at("mean_total").get<double>();
      m.mean_det = row.at("mean_det").get<double>();
      m.mean_tmp = row.at("mean_tmp").get<double>();
      m.mean_len = row.at("mean_len").get<double>();
      m.mean_fmt = row.at("mean_fmt").get<double>();
      m.mean_kl = row.at("mean_kl").get<double>();
      m.clip_fraction = row.at("clip_fraction").get<double>();
      m.loss = row.at("loss").get<double>();
      out.push_back(m);
    }
  } catch (const json::exception& e) {
    throw IoError("malformed metrics log " + path + ": " + e.what());
  }
  return out;
}

}  // namespace ashield
