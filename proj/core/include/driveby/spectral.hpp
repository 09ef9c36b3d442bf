#pragma once

#include <cstdint>
#include <vector>

#include "driveby/cp_estimator.hpp"
#include "driveby/vbi_solver.hpp"

namespace driveby {

/// One-sided spectrum on a uniform grid f_i = f0 + i * df.
struct Spectrum {
  double f0 = 0.0;
  double df = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double frequency(std::size_t i) const { return f0 + static_cast<double>(i) * df; }
  double max_frequency() const { return size() == 0 ? f0 : frequency(size() - 1); }
};

struct WelchSettings {
  std::size_t segment_length = 8192;  // capped at the series length
  std::size_t fft_length = 1u << 17;  // zero-padded transform size
  double overlap = 0.5;
};

/// Averaged Hann-windowed periodogram, one-sided density scaling.
Spectrum welch_psd(const std::vector<double>& series, double sample_rate,
                   const WelchSettings& settings = {});

/// |front - rear| bin by bin. Throws InvalidInput on differing grids.
Spectrum residual_spectrum(const Spectrum& front, const Spectrum& rear);

struct Band {
  double lower = 3.0;  // Hz
  double upper = 5.0;  // Hz
  std::size_t bins = 256;

  double frequency(std::size_t j) const {
    return lower + (upper - lower) * static_cast<double>(j) / static_cast<double>(bins - 1);
  }
};

/// Linear interpolation of a spectrum onto the band grid (endpoints included).
std::vector<double> band_filter(const Spectrum& spectrum, const Band& band);

/// Pointwise mean of equally sized vectors.
std::vector<double> average_runs(const std::vector<std::vector<double>>& runs);

/// Scalar min/max of the healthy training spectra.
struct NormalizationReference {
  double min = 0.0;
  double max = 1.0;

  static NormalizationReference from(const std::vector<std::vector<double>>& healthy);
  std::vector<double> apply(const std::vector<double>& values) const;
};

/// Band-limited residual CP-acceleration spectrum of one crossing, each axle
/// trimmed to its on-span interval.
std::vector<double> crossing_features(const CrossingRecord& record, const HalfCarVehicle& vehicle,
                                      const Band& band = {}, const WelchSettings& welch = {},
                                      AxleMassModel mass_model = AxleMassModel::static_split);

enum class Condition { healthy, damaged };

struct SpectrumSample {
  std::vector<double> values;
  Condition label = Condition::healthy;
  std::vector<std::size_t> members;  // crossing indices within the label's pool
};

struct DatasetCounts {
  std::size_t train = 400;
  std::size_t test_healthy = 100;
  std::size_t test_damaged = 100;
};

struct Dataset {
  Band band;
  std::size_t k = 30;
  NormalizationReference reference;
  std::vector<SpectrumSample> train;
  std::vector<SpectrumSample> test;  // healthy first, then damaged
  std::vector<std::size_t> train_pool;  // healthy crossings reserved for training
  std::vector<std::size_t> test_pool;   // healthy crossings reserved for testing
};

/// Splits the healthy crossings 80/20 into train/test pools, builds each
/// sample as the mean of k distinct crossings from its pool, and normalizes
/// everything with the training-set extremes.
Dataset build_dataset(const std::vector<std::vector<double>>& healthy,
                      const std::vector<std::vector<double>>& damaged, std::size_t k,
                      const DatasetCounts& counts, std::uint64_t seed, const Band& band = {});

/// Index of the largest value (first on ties).
std::size_t argmax(const std::vector<double>& values);

}  // namespace driveby
