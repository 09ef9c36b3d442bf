#pragma once

#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace driveby {

struct KrigingSettings {
  double log10_theta_min = -3.0;
  double log10_theta_max = 3.0;
  int starts_per_dimension = 8;  // log-spaced grid of initial theta values
  int refined_starts = 3;        // best grid points handed to the pattern search
  int max_evaluations = 80;      // per pattern search
  double initial_nugget = 1e-10;
  double max_nugget = 1e-4;
};

struct KrigingPrediction {
  double value = 0.0;
  bool extrapolated = false;  // point outside the training bounds
};

/// Ordinary kriging (constant trend) with an anisotropic Gaussian correlation
/// R_ij = exp(-sum_k theta_k (u_ik - u_jk)^2) on inputs scaled to [0, 1].
class KrigingModel {
 public:
  /// Rows of `x` are points. Throws InvalidInput on duplicates, non-finite
  /// data or fewer than 10 points.
  static KrigingModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          const KrigingSettings& settings = {});

  KrigingPrediction predict(const Eigen::VectorXd& point) const;
  double operator()(const Eigen::VectorXd& point) const { return predict(point).value; }

  const Eigen::VectorXd& theta() const { return theta_; }
  double beta0() const { return beta0_; }
  double sigma2() const { return sigma2_; }
  double nugget() const { return nugget_; }
  double log_likelihood() const { return log_likelihood_; }
  int dimension() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  nlohmann::json to_json() const;
  static KrigingModel from_json(const nlohmann::json& j);

 private:
  Eigen::MatrixXd u_;  // scaled inputs
  Eigen::VectorXd y_;
  Eigen::VectorXd lower_, upper_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd gamma_;  // R^-1 (y - beta0)
  double beta0_ = 0.0;
  double sigma2_ = 0.0;
  double nugget_ = 0.0;
  double log_likelihood_ = 0.0;

  void finalize(double nugget);
};

/// Coefficient of determination of predictions against truth.
double r_squared(const std::vector<double>& truth, const std::vector<double>& predicted);

}  // namespace driveby
