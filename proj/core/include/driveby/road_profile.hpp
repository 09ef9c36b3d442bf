#pragma once

#include <cstdint>
#include <vector>

namespace driveby {

/// Spectral-representation parameters of the class-A roughness model
/// G_d(n) = G_d(n0) (n / n0)^-2.
struct RoughnessSettings {
  double reference_psd = 16e-6;        // G_d(n0), m^3
  double reference_frequency = 0.1;    // n0, cycles/m
  double min_frequency = 0.01;         // cycles/m
  double max_frequency = 10.0;         // cycles/m
  int harmonics = 2000;                // log-spaced
  double max_taper = 1.0;              // m; actual taper = min(max_taper, L/10)
};

struct ProfileValue {
  double r = 0.0;      // m
  double slope = 0.0;  // dr/dx
};

class ProfileTable;

/// Stochastic road profile over [0, L], cosine-tapered to zero at both ends.
class RoadProfile {
 public:
  static RoadProfile generate(double span_length, std::uint64_t seed,
                              const RoughnessSettings& settings = {});

  /// Zero-amplitude profile.
  static RoadProfile flat(double span_length);

  /// Analytic tapered value and derivative; zero off-span.
  ProfileValue evaluate(double x) const;

  /// Untapered harmonic sum, defined for any x.
  ProfileValue evaluate_untapered(double x) const;

  /// Samples r and r' on a uniform grid for fast piecewise-cubic lookup.
  ProfileTable tabulate(double spacing) const;

  double span_length() const { return span_length_; }
  double taper_length() const { return taper_length_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& frequencies() const { return frequencies_; }
  const std::vector<double>& amplitudes() const { return amplitudes_; }
  const std::vector<double>& phases() const { return phases_; }

  /// Scales every harmonic amplitude (0 gives a flat road).
  RoadProfile scaled(double factor) const;

 private:
  double taper(double x, double* derivative) const;

  double span_length_ = 0.0;
  double taper_length_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<double> frequencies_;  // cycles/m
  std::vector<double> amplitudes_;   // m
  std::vector<double> phases_;       // rad
};

/// Piecewise cubic Hermite interpolant of a tapered profile. C1-continuous and
/// exact at the grid nodes; zero off-span.
class ProfileTable {
 public:
  ProfileTable() = default;
  ProfileTable(double span_length, std::vector<double> r, std::vector<double> slope);

  ProfileValue evaluate(double x) const;
  double spacing() const { return spacing_; }
  std::size_t size() const { return r_.size(); }

 private:
  double span_length_ = 0.0;
  double spacing_ = 0.0;
  std::vector<double> r_;
  std::vector<double> slope_;
};

}  // namespace driveby
