#include "driveby/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driveby/error.hpp"
#include "driveby/random.hpp"

namespace driveby {

void PSOConfig::validate() const {
  if (swarm_size < 1) throw InvalidInput("pso: swarm_size must be >= 1");
  if (max_iterations < 1) throw InvalidInput("pso: max_iterations must be >= 1");
  if (!(velocity_fraction > 0.0)) throw InvalidInput("pso: velocity_fraction must be > 0");
  if (stall_iterations < 1) throw InvalidInput("pso: stall_iterations must be >= 1");
  if (!(contraction > 0.0)) throw InvalidInput("pso: contraction must be > 0");
}

PSOResult pso_maximize(const Objective& objective, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const PSOConfig& config) {
  config.validate();
  const Eigen::Index dim = lower.size();
  if (upper.size() != dim || dim == 0) throw InvalidInput("pso: bounds dimension mismatch");
  if (!((upper - lower).array() > 0.0).all()) throw InvalidInput("pso: empty bounds");

  const Eigen::VectorXd range = upper - lower;
  const Eigen::VectorXd vmax = config.velocity_fraction * range;
  Rng rng(derive_seed(config.seed, "pso"));
  auto score = [&](const Eigen::VectorXd& p) {
    const double v = objective(p);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };

  const auto n = static_cast<std::size_t>(config.swarm_size);
  std::vector<Eigen::VectorXd> x(n), v(n), pbest(n);
  std::vector<double> pbest_value(n);
  PSOResult out;
  out.value = -std::numeric_limits<double>::infinity();
  out.best = 0.5 * (lower + upper);
  for (std::size_t i = 0; i < n; ++i) {
    x[i].resize(dim);
    v[i].resize(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      x[i][k] = rng.uniform(lower[k], upper[k]);
      v[i][k] = rng.uniform(-vmax[k], vmax[k]);
    }
    pbest[i] = x[i];
    pbest_value[i] = score(x[i]);
    if (pbest_value[i] > out.value) {
      out.value = pbest_value[i];
      out.best = x[i];
    }
  }

  // A stall only ends the run once the swarm has gathered around gbest;
  // a spread-out swarm can still be exploring after 50 idle iterations.
  auto contracted = [&] {
    for (std::size_t i = 0; i < n; ++i)
      if ((((x[i] - out.best).array().abs()) / range.array()).maxCoeff() > config.contraction)
        return false;
    return true;
  };

  double reference = out.value;
  int stall = 0;
  for (int it = 0; it < config.max_iterations; ++it) {
    const double w = config.max_iterations > 1
                         ? config.inertia_start + (config.inertia_end - config.inertia_start) *
                                                      it / (config.max_iterations - 1)
                         : config.inertia_start;
    for (std::size_t i = 0; i < n; ++i) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        double vk = w * v[i][k] + config.cognitive * r1 * (pbest[i][k] - x[i][k]) +
                    config.social * r2 * (out.best[k] - x[i][k]);
        vk = std::clamp(vk, -vmax[k], vmax[k]);
        double xk = x[i][k] + vk;
        if (xk > upper[k]) {
          xk = 2.0 * upper[k] - xk;
          vk = -vk;
        } else if (xk < lower[k]) {
          xk = 2.0 * lower[k] - xk;
          vk = -vk;
        }
        x[i][k] = std::clamp(xk, lower[k], upper[k]);
        v[i][k] = vk;
      }
      const double f = score(x[i]);
      if (f > pbest_value[i]) {
        pbest_value[i] = f;
        pbest[i] = x[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      if (pbest_value[i] > out.value) {
        out.value = pbest_value[i];
        out.best = pbest[i];
      }
    out.history.push_back(out.value);
    out.iterations = it + 1;
    // Relative improvement, so the stopping rule does not depend on the
    // objective's units.
    const double scale = std::max(std::abs(reference), std::numeric_limits<double>::min());
    if (out.value - reference > config.stall_tolerance * scale || !std::isfinite(reference)) {
      reference = out.value;
      stall = 0;
    } else if (++stall >= config.stall_iterations && contracted()) {
      break;
    }
  }
  return out;
}

}  // namespace driveby
