#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "driveby/aae.hpp"

namespace driveby {

/// First-order Wasserstein distance between two empirical distributions on
/// the real line. Exact: sorted matching for equal sizes, quantile integral
/// on the merged grid otherwise.
double w1_empirical(std::vector<double> p1, std::vector<double> p2);

/// Per-vehicle summary of a healthy/damaged assessment.
struct AssessmentRow {
  std::string vehicle;
  double mass = 0.0;
  double stiffness = 0.0;
  double mass_ratio = 0.0;
  double frequency_ratio = 0.0;
  double healthy_mean = 0.0;
  double damaged_mean = 0.0;
  double threshold = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double wasserstein = 0.0;
  std::vector<double> healthy_di;
  std::vector<double> damaged_di;
  std::string error;  // non-empty when the run failed
};

AssessmentRow summarize(std::string vehicle, const DamageAssessment& assessment);

struct AssessmentReport {
  std::vector<AssessmentRow> rows;

  std::string csv() const;
  nlohmann::json json() const;
  void write(const std::filesystem::path& csv_path, const std::filesystem::path& json_path) const;
};

AssessmentReport assessment_report(std::vector<AssessmentRow> rows);

nlohmann::json to_json(const AssessmentRow& row);
AssessmentRow row_from_json(const nlohmann::json& j);

}  // namespace driveby
