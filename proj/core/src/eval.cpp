#include "ashield/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "ashield/encoders.hpp"
#include "ashield/errors.hpp"
#include "ashield/policy.hpp"

namespace ashield {
namespace {

using nlohmann::json;

std::string protocol_kind_name(Protocol::Kind kind) {
  switch (kind) {
    case Protocol::Kind::in_domain: return "in_domain";
    case Protocol::Kind::cross_domain: return "cross_domain";
    case Protocol::Kind::ablation: return "ablation";
  }
  return "in_domain";
}

json families_json(const std::vector<Family>& fams) {
  json arr = json::array();
  for (Family f : fams) arr.push_back(to_string(f));
  return arr;
}

}  // namespace

double auc(std::span<const double> scores_fake, std::span<const double> scores_real) {
  if (scores_fake.empty() || scores_real.empty()) {
    throw InvalidInput("auc: both score lists must be nonempty");
  }

  struct Entry {
    double score;
    bool fake;
  };
  std::vector<Entry> all;
  all.reserve(scores_fake.size() + scores_real.size());
  for (double s : scores_fake) all.push_back({s, true});
  for (double s : scores_real) all.push_back({s, false});
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score < b.score; });

  // Midranks over tie groups keep every half exact in double arithmetic.
  const std::size_t n = all.size();
  double rank_sum_fake = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && all[j].score == all[i].score) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (all[t].fake) rank_sum_fake += midrank;
    }
    i = j;
  }

  const double nf = static_cast<double>(scores_fake.size());
  const double nr = static_cast<double>(scores_real.size());
  const double u = rank_sum_fake - nf * (nf + 1.0) / 2.0;
  return u / (nf * nr);
}

std::vector<std::pair<double, double>> roc_points(std::span<const double> scores_fake,
                                                  std::span<const double> scores_real) {
  if (scores_fake.empty() || scores_real.empty()) {
    throw InvalidInput("roc_points: both score lists must be nonempty");
  }
  struct Entry {
    double score;
    bool fake;
  };
  std::vector<Entry> all;
  all.reserve(scores_fake.size() + scores_real.size());
  for (double s : scores_fake) all.push_back({s, true});
  for (double s : scores_real) all.push_back({s, false});
  // Descending score: thresholds sweep from strict to permissive.
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return a.score > b.score; });

  std::vector<std::pair<double, double>> points;
  points.emplace_back(0.0, 0.0);
  const double nf = static_cast<double>(scores_fake.size());
  const double nr = static_cast<double>(scores_real.size());
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) {
      if (all[j].fake) ++tp;
      else ++fp;
      ++j;
    }
    points.emplace_back(static_cast<double>(fp) / nr, static_cast<double>(tp) / nf);
    i = j;
  }
  return points;
}

ScoredSplit score_split(const Checkpoint& ckpt, const DatasetManifest& manifest,
                        const Protocol& protocol) {
  FuseMode mode = FuseMode::full;
  if (protocol.mode_override.has_value()) {
    mode = *protocol.mode_override;
  } else if (ckpt.config_echo.contains("fuse_mode")) {
    mode = fuse_mode_from_string(ckpt.config_echo.at("fuse_mode").get<std::string>());
  }
  int max_len = kDefaultMaxLen;
  if (ckpt.config_echo.contains("max_len")) {
    max_len = ckpt.config_echo.at("max_len").get<int>();
  }

  const auto fake_selected = [&](Family f) {
    if (protocol.test_families.empty()) return true;
    return std::find(protocol.test_families.begin(), protocol.test_families.end(), f) !=
           protocol.test_families.end();
  };

  ScoredSplit scored;
  for (const VideoClip& clip : manifest.clips) {
    if (clip.split != Split::test) continue;
    if (clip.label == Label::fake && !fake_selected(clip.family)) continue;
    const Episode ep = fuse(clip, ckpt.codebook, Ordering::ordered, nullptr, mode);
    const double score = detection_score(ckpt.params, ep, max_len);
    if (clip.label == Label::fake) {
      scored.fake.push_back(score);
      scored.fake_by_family[clip.family].push_back(score);
    } else {
      scored.real.push_back(score);
    }
  }
  if (scored.real.empty() || scored.fake.empty()) {
    throw InvalidConfig("evaluate: protocol filter left an empty test bucket");
  }
  return scored;
}

EvalReport evaluate(const Checkpoint& ckpt, const DatasetManifest& manifest,
                    const Protocol& protocol) {
  const ScoredSplit scored = score_split(ckpt, manifest, protocol);

  int correct = 0;
  for (double s : scored.fake) {
    if (s > 0.5) ++correct;
  }
  for (double s : scored.real) {
    if (!(s > 0.5)) ++correct;
  }

  EvalReport report;
  report.auc = auc(scored.fake, scored.real);
  report.accuracy_at_half = static_cast<double>(correct) /
                            static_cast<double>(scored.fake.size() + scored.real.size());
  for (const auto& [family, scores] : scored.fake_by_family) {
    report.per_family_auc[family] = auc(scores, scored.real);
  }
  report.n_real = static_cast<int>(scored.real.size());
  report.n_fake = static_cast<int>(scored.fake.size());
  report.protocol = protocol;
  report.config_echo = ckpt.config_echo;
  report.checkpoint_id = ckpt.id;
  return report;
}

ReportDelta compare_reports(const EvalReport& a, const EvalReport& b) {
  if (a.n_real != b.n_real || a.n_fake != b.n_fake) {
    throw InvalidInput("compare_reports: reports cover different test splits");
  }
  ReportDelta delta;
  delta.overall = a.auc - b.auc;
  for (const auto& [family, value] : a.per_family_auc) {
    const auto it = b.per_family_auc.find(family);
    if (it == b.per_family_auc.end()) {
      throw InvalidInput("compare_reports: family sets differ");
    }
    delta.per_family[family] = value - it->second;
  }
  return delta;
}

json report_to_json(const EvalReport& report) {
  json per_family = json::object();
  for (const auto& [family, value] : report.per_family_auc) {
    per_family[to_string(family)] = value;
  }
  return json{{"auc", report.auc},
              {"accuracy_at_half", report.accuracy_at_half},
              {"per_family_auc", per_family},
              {"n_real", report.n_real},
              {"n_fake", report.n_fake},
              {"protocol",
               json{{"kind", protocol_kind_name(report.protocol.kind)},
                    {"train_families", families_json(report.protocol.train_families)},
                    {"test_families", families_json(report.protocol.test_families)},
                    {"ablation_tag", report.protocol.ablation_tag}}},
              {"config", report.config_echo},
              {"checkpoint_id", report.checkpoint_id}};
}

void write_report(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << report_to_json(report).dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

void write_roc(std::span<const std::pair<double, double>> points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  char line[80];
  for (const auto& [fpr, tpr] : points) {
    std::snprintf(line, sizeof(line), "%.10f %.10f\n", fpr, tpr);
    out << line;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace ashield
