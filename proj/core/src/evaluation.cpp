#include "driveby/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "driveby/error.hpp"

namespace driveby {

double w1_empirical(std::vector<double> p1, std::vector<double> p2) {
  if (p1.empty() || p2.empty()) throw InvalidInput("wasserstein: empty sample set");
  for (const auto* p : {&p1, &p2})
    for (double v : *p)
      if (!std::isfinite(v)) throw InvalidInput("wasserstein: non-finite sample");
  std::sort(p1.begin(), p1.end());
  std::sort(p2.begin(), p2.end());
  if (p1.size() == p2.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < p1.size(); ++i) s += std::abs(p1[i] - p2[i]);
    return s / static_cast<double>(p1.size());
  }
  // Both quantile functions are step functions; walk the union of their
  // breakpoints i/n1 and j/n2.
  const double n1 = static_cast<double>(p1.size());
  const double n2 = static_cast<double>(p2.size());
  std::size_t i = 0, j = 0;
  double q = 0.0, total = 0.0;
  while (i < p1.size() && j < p2.size()) {
    const double next1 = static_cast<double>(i + 1) / n1;
    const double next2 = static_cast<double>(j + 1) / n2;
    const double next = std::min(next1, next2);
    total += (next - q) * std::abs(p1[i] - p2[j]);
    q = next;
    if (next1 <= next) ++i;
    if (next2 <= next) ++j;
  }
  return total;
}

AssessmentRow summarize(std::string vehicle, const DamageAssessment& a) {
  AssessmentRow row;
  row.vehicle = std::move(vehicle);
  auto mean = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  row.healthy_mean = mean(a.healthy_di);
  row.damaged_mean = mean(a.damaged_di);
  row.threshold = a.threshold;
  row.accuracy = a.counts.accuracy();
  row.f1 = a.counts.f1();
  row.healthy_di = a.healthy_di;
  row.damaged_di = a.damaged_di;
  if (!a.healthy_di.empty() && !a.damaged_di.empty())
    row.wasserstein = w1_empirical(a.healthy_di, a.damaged_di);
  return row;
}

AssessmentReport assessment_report(std::vector<AssessmentRow> rows) {
  return AssessmentReport{std::move(rows)};
}

std::string AssessmentReport::csv() const {
  std::string out =
      "vehicle,mass,stiffness,mu,beta,hn_mean_di,dm_mean_di,threshold,accuracy,f1,wd,error\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g",
                  r.mass, r.stiffness, r.mass_ratio, r.frequency_ratio, r.healthy_mean,
                  r.damaged_mean, r.threshold, r.accuracy, r.f1, r.wasserstein);
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += r.vehicle + "," + buf + "," + err + "\n";
  }
  return out;
}

nlohmann::json to_json(const AssessmentRow& r) {
  return {{"vehicle", r.vehicle},         {"mass", r.mass},
          {"stiffness", r.stiffness},     {"mu", r.mass_ratio},
          {"beta", r.frequency_ratio},    {"hn_mean_di", r.healthy_mean},
          {"dm_mean_di", r.damaged_mean}, {"threshold", r.threshold},
          {"accuracy", r.accuracy},       {"f1", r.f1},
          {"wd", r.wasserstein},          {"hn_di", r.healthy_di},
          {"dm_di", r.damaged_di},        {"error", r.error}};
}

AssessmentRow row_from_json(const nlohmann::json& j) {
  AssessmentRow r;
  r.vehicle = j.at("vehicle").get<std::string>();
  r.mass = j.value("mass", 0.0);
  r.stiffness = j.value("stiffness", 0.0);
  r.mass_ratio = j.value("mu", 0.0);
  r.frequency_ratio = j.value("beta", 0.0);
  r.healthy_mean = j.value("hn_mean_di", 0.0);
  r.damaged_mean = j.value("dm_mean_di", 0.0);
  r.threshold = j.value("threshold", 0.0);
  r.accuracy = j.value("accuracy", 0.0);
  r.f1 = j.value("f1", 0.0);
  r.wasserstein = j.value("wd", 0.0);
  r.healthy_di = j.value("hn_di", std::vector<double>{});
  r.damaged_di = j.value("dm_di", std::vector<double>{});
  r.error = j.value("error", std::string{});
  return r;
}

nlohmann::json AssessmentReport::json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) out.push_back(to_json(r));
  return out;
}

void AssessmentReport::write(const std::filesystem::path& csv_path,
                             const std::filesystem::path& json_path) const {
  std::ofstream c(csv_path);
  if (!c) throw IoError("cannot write " + csv_path.string());
  c << csv();
  std::ofstream j(json_path);
  if (!j) throw IoError("cannot write " + json_path.string());
  j << json().dump(2) << "\n";
}

}  // namespace driveby
