#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ashield/io.hpp"
#include "ashield/types.hpp"

namespace ashield {

struct Protocol {
  enum class Kind { in_domain, cross_domain, ablation };

  Kind kind = Kind::in_domain;
  std::vector<Family> train_families;  // informational for cross_domain reports
  std::vector<Family> test_families;   // fake-clip filter; empty = all
  std::string ablation_tag;
  // Overrides the fuse mode echoed in the checkpoint (ablation scoring).
  std::optional<FuseMode> mode_override;
};

struct EvalReport {
  double auc = 0.0;
  double accuracy_at_half = 0.0;
  std::map<Family, double> per_family_auc;
  int n_real = 0;
  int n_fake = 0;
  Protocol protocol;
  nlohmann::json config_echo;
  std::string checkpoint_id;
};

struct ReportDelta {
  double overall = 0.0;
  std::map<Family, double> per_family;
};

// Mann-Whitney AUC: pairs where the fake score exceeds the real score count
// 1, ties count 1/2. Rank-based, exact including ties.
double auc(std::span<const double> scores_fake, std::span<const double> scores_real);

// ROC curve as (false-positive-rate, true-positive-rate) points.
std::vector<std::pair<double, double>> roc_points(std::span<const double> scores_fake,
                                                  std::span<const double> scores_real);

// Detection scores of the test split under a protocol filter.
struct ScoredSplit {
  std::vector<double> fake;
  std::vector<double> real;
  std::map<Family, std::vector<double>> fake_by_family;
};

ScoredSplit score_split(const Checkpoint& ckpt, const DatasetManifest& manifest,
                        const Protocol& protocol);

// Score every test episode with the checkpoint policy and aggregate AUCs.
// Per-family AUC pairs each family's fake clips against all real test clips.
EvalReport evaluate(const Checkpoint& ckpt, const DatasetManifest& manifest,
                    const Protocol& protocol);

// Signed AUC differences a - b; both reports must describe the same test split.
ReportDelta compare_reports(const EvalReport& a, const EvalReport& b);

nlohmann::json report_to_json(const EvalReport& report);
void write_report(const EvalReport& report, const std::string& path);
void write_roc(std::span<const std::pair<double, double>> points, const std::string& path);

}  // namespace ashield
