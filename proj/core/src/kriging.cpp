#include "driveby/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "driveby/error.hpp"

namespace driveby {

namespace {

Eigen::MatrixXd correlation(const Eigen::MatrixXd& u, const Eigen::VectorXd& theta) {
  const Eigen::Index n = u.rows();
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = ((u.row(i) - u.row(j)).array().square() * theta.transpose().array()).sum();
      r(i, j) = r(j, i) = std::exp(-d);
    }
  }
  return r;
}

struct Likelihood {
  double value = -std::numeric_limits<double>::infinity();
  double nugget = 0.0;
};

// Concentrated log-likelihood with nugget escalation on factorization failure.
Likelihood concentrated(const Eigen::MatrixXd& u, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& theta, const KrigingSettings& s) {
  const Eigen::Index n = u.rows();
  const Eigen::MatrixXd r = correlation(u, theta);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  for (double nugget = s.initial_nugget; nugget <= s.max_nugget * 1.0001; nugget *= 10.0) {
    Eigen::MatrixXd rn = r;
    rn.diagonal().array() += nugget;
    Eigen::LLT<Eigen::MatrixXd> llt(rn);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::MatrixXd& l = llt.matrixLLT();
    const double min_diag = l.diagonal().minCoeff();
    if (!(min_diag > 1e-10)) continue;
    const Eigen::VectorXd ri1 = llt.solve(ones);
    const Eigen::VectorXd riy = llt.solve(y);
    const double beta = ones.dot(riy) / ones.dot(ri1);
    const Eigen::VectorXd res = y - beta * ones;
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    const double sigma2 = std::max(res.dot(llt.solve(res)) / static_cast<double>(n),
                                   1e-30 * scale * scale);
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    return {-0.5 * static_cast<double>(n) * std::log(sigma2) - 0.5 * logdet, nugget};
  }
  return {};
}

}  // namespace

KrigingModel KrigingModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                               const KrigingSettings& settings) {
  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();
  if (y.size() != n) throw InvalidInput("kriging: point/value count mismatch");
  if (n < 10) throw InvalidInput("kriging: need at least 10 points");
  if (lower.size() != dim || upper.size() != dim)
    throw InvalidInput("kriging: bounds dimension mismatch");
  if (!((upper - lower).array() > 0.0).all()) throw InvalidInput("kriging: empty bounds");
  if (!x.allFinite() || !y.allFinite()) throw InvalidInput("kriging: non-finite data");

  KrigingModel m;
  m.lower_ = lower;
  m.upper_ = upper;
  m.y_ = y;
  m.u_.resize(n, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    m.u_.row(i) = ((x.row(i).transpose() - lower).array() / (upper - lower).array()).transpose();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if ((m.u_.row(i) - m.u_.row(j)).squaredNorm() < 1e-24) {
        std::ostringstream msg;
        msg << "kriging: duplicate input points at rows " << j << " and " << i;
        throw InvalidInput(msg.str());
      }

  auto eval = [&](const Eigen::VectorXd& log_theta) {
    Eigen::VectorXd theta = log_theta.unaryExpr([](double v) { return std::pow(10.0, v); });
    return concentrated(m.u_, y, theta, settings).value;
  };

  // Grid of log-spaced starts, then compass search from the best few.
  const int g = std::max(1, settings.starts_per_dimension);
  const double lo = settings.log10_theta_min;
  const double hi = settings.log10_theta_max;
  const double spacing = g > 1 ? (hi - lo) / (g - 1) : (hi - lo);
  std::vector<std::pair<double, Eigen::VectorXd>> starts;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    Eigen::VectorXd p(dim);
    for (Eigen::Index k = 0; k < dim; ++k)
      p[k] = g > 1 ? lo + spacing * idx[static_cast<std::size_t>(k)] : 0.5 * (lo + hi);
    starts.emplace_back(eval(p), p);
    Eigen::Index k = 0;
    while (k < dim && ++idx[static_cast<std::size_t>(k)] == g) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == dim) break;
  }
  std::stable_sort(starts.begin(), starts.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  double best_value = starts.front().first;
  Eigen::VectorXd best = starts.front().second;
  const auto refine = std::min<std::size_t>(starts.size(), static_cast<std::size_t>(std::max(1, settings.refined_starts)));
  for (std::size_t s = 0; s < refine; ++s) {
    Eigen::VectorXd p = starts[s].second;
    double value = starts[s].first;
    double step = 0.5 * spacing;
    int evals = 0;
    while (step > 1e-3 && evals < settings.max_evaluations) {
      bool improved = false;
      for (Eigen::Index k = 0; k < dim && evals < settings.max_evaluations; ++k)
        for (double dir : {1.0, -1.0}) {
          Eigen::VectorXd q = p;
          q[k] = std::clamp(q[k] + dir * step, lo, hi);
          if (q[k] == p[k]) continue;
          const double v = eval(q);
          ++evals;
          if (v > value) {
            value = v;
            p = q;
            improved = true;
            break;
          }
        }
      if (!improved) step *= 0.5;
    }
    if (value > best_value) {
      best_value = value;
      best = p;
    }
  }
  if (!std::isfinite(best_value))
    throw NumericalError("kriging: correlation matrix singular for every theta");

  m.theta_ = best.unaryExpr([](double v) { return std::pow(10.0, v); });
  m.log_likelihood_ = best_value;
  m.finalize(concentrated(m.u_, y, m.theta_, settings).nugget);
  return m;
}

void KrigingModel::finalize(double nugget) {
  const Eigen::Index n = u_.rows();
  const Eigen::MatrixXd r = correlation(u_, theta_);
  Eigen::MatrixXd rn = r;
  rn.diagonal().array() += nugget;
  Eigen::LLT<Eigen::MatrixXd> llt(rn);
  if (llt.info() != Eigen::Success) throw NumericalError("kriging: final factorization failed");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd ri1 = llt.solve(ones);
  beta0_ = ones.dot(llt.solve(y_)) / ones.dot(ri1);
  const Eigen::VectorXd res = y_ - beta0_ * ones;
  gamma_ = llt.solve(res);
  // The nugget only stabilizes the factorization. Refining against the
  // unregularized R restores interpolation; each step contracts the residual
  // by nugget / (lambda + nugget) along every eigenvector.
  const double tol = 1e-12 * std::max(1.0, res.cwiseAbs().maxCoeff());
  for (int it = 0; it < 200 && nugget > 0.0; ++it) {
    const Eigen::VectorXd misfit = res - r * gamma_;
    if (misfit.cwiseAbs().maxCoeff() <= tol) break;
    gamma_ += llt.solve(misfit);
  }
  sigma2_ = res.dot(gamma_) / static_cast<double>(n);
  nugget_ = nugget;
}

KrigingPrediction KrigingModel::predict(const Eigen::VectorXd& point) const {
  if (point.size() != lower_.size()) throw InvalidInput("kriging: point dimension mismatch");
  const Eigen::VectorXd u = (point - lower_).array() / (upper_ - lower_).array();
  KrigingPrediction out;
  out.extrapolated = (u.array() < -1e-12).any() || (u.array() > 1.0 + 1e-12).any();
  double s = 0.0;
  for (Eigen::Index i = 0; i < u_.rows(); ++i) {
    const double d = ((u_.row(i).transpose() - u).array().square() * theta_.array()).sum();
    s += std::exp(-d) * gamma_[i];
  }
  out.value = beta0_ + s;
  return out;
}

nlohmann::json KrigingModel::to_json() const {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json pts = nlohmann::json::array();
  for (Eigen::Index i = 0; i < u_.rows(); ++i) pts.push_back(vec(u_.row(i).transpose()));
  return {{"format", "driveby-kriging"}, {"version", 1},          {"lower", vec(lower_)},
          {"upper", vec(upper_)},        {"theta", vec(theta_)},   {"beta0", beta0_},
          {"sigma2", sigma2_},           {"nugget", nugget_},      {"log_likelihood", log_likelihood_},
          {"scaled_inputs", pts},        {"values", vec(y_)}};
}

KrigingModel KrigingModel::from_json(const nlohmann::json& j) {
  auto vec = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  KrigingModel m;
  m.lower_ = vec(j.at("lower"));
  m.upper_ = vec(j.at("upper"));
  m.theta_ = vec(j.at("theta"));
  m.y_ = vec(j.at("values"));
  m.log_likelihood_ = j.value("log_likelihood", 0.0);
  const auto& pts = j.at("scaled_inputs");
  m.u_.resize(static_cast<Eigen::Index>(pts.size()), m.lower_.size());
  for (std::size_t i = 0; i < pts.size(); ++i) m.u_.row(static_cast<Eigen::Index>(i)) = vec(pts[i]).transpose();
  if (m.u_.rows() != m.y_.size() || m.theta_.size() != m.lower_.size())
    throw InvalidInput("kriging: inconsistent model file");
  m.finalize(j.value("nugget", 1e-10));
  return m;
}

double r_squared(const std::vector<double>& truth, const std::vector<double>& predicted) {
  if (truth.size() != predicted.size() || truth.empty())
    throw InvalidInput("r_squared: size mismatch or empty input");
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
}

}  // namespace driveby
