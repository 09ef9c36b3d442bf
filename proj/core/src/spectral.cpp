#include "driveby/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "driveby/cp_estimator.hpp"
#include "driveby/error.hpp"
#include "driveby/random.hpp"

namespace driveby {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Per-thread real-to-complex plan with its own buffers. Plan creation is the
// only non-reentrant FFTW call, so it alone takes the lock.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  double* input() { return in_; }
  void execute() { fftw_execute(plan_); }
  double power(std::size_t k) const { return out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1]; }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

RealFft& fft_for(std::size_t n) {
  thread_local std::unique_ptr<RealFft> cached;
  if (!cached || cached->size() != n) {
    cached.reset();
    cached = std::make_unique<RealFft>(n);
  }
  return *cached;
}

}  // namespace

Spectrum welch_psd(const std::vector<double>& series, double sample_rate,
                   const WelchSettings& settings) {
  if (series.empty()) throw InvalidInput("welch: empty series");
  if (!(sample_rate > 0.0)) throw InvalidInput("welch: sample rate must be > 0");
  if (!(settings.overlap >= 0.0 && settings.overlap < 1.0))
    throw InvalidInput("welch: overlap must lie in [0, 1)");
  const std::size_t n = series.size();
  const std::size_t seg = std::min(n, settings.segment_length);
  if (seg < 2) throw InvalidInput("welch: series too short");
  if (settings.fft_length < seg) throw InvalidInput("welch: fft_length shorter than a segment");
  const auto step = std::max<std::size_t>(
      1, seg - static_cast<std::size_t>(std::floor(settings.overlap * static_cast<double>(seg))));
  const std::size_t segments = (n - seg) / step + 1;

  std::vector<double> window(seg);
  double window_power = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(seg));
    window_power += window[i] * window[i];
  }

  RealFft& fft = fft_for(settings.fft_length);
  const std::size_t bins = settings.fft_length / 2 + 1;
  Spectrum out;
  out.f0 = 0.0;
  out.df = sample_rate / static_cast<double>(settings.fft_length);
  out.values.assign(bins, 0.0);

  double* buf = fft.input();
  for (std::size_t s = 0; s < segments; ++s) {
    const double* x = series.data() + s * step;
    double mean = 0.0;
    for (std::size_t i = 0; i < seg; ++i) mean += x[i];
    mean /= static_cast<double>(seg);
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (x[i] - mean) * window[i];
    std::fill(buf + seg, buf + settings.fft_length, 0.0);
    fft.execute();
    for (std::size_t k = 0; k < bins; ++k) out.values[k] += fft.power(k);
  }

  const double scale = 1.0 / (sample_rate * window_power * static_cast<double>(segments));
  const bool even = settings.fft_length % 2 == 0;
  for (std::size_t k = 0; k < bins; ++k) {
    const bool unpaired = k == 0 || (even && k == bins - 1);
    out.values[k] *= unpaired ? scale : 2.0 * scale;
  }
  return out;
}

Spectrum residual_spectrum(const Spectrum& front, const Spectrum& rear) {
  if (front.size() != rear.size() || front.f0 != rear.f0 || front.df != rear.df)
    throw InvalidInput("residual spectrum: frequency grids differ");
  Spectrum out{front.f0, front.df, std::vector<double>(front.size())};
  for (std::size_t i = 0; i < front.size(); ++i)
    out.values[i] = std::abs(front.values[i] - rear.values[i]);
  return out;
}

std::vector<double> band_filter(const Spectrum& spectrum, const Band& band) {
  if (band.bins < 2) throw InvalidInput("band filter: need at least 2 bins");
  if (!(band.lower < band.upper)) throw InvalidInput("band filter: lower must be < upper");
  if (spectrum.size() < 2 || !(spectrum.df > 0.0))
    throw InvalidInput("band filter: spectrum has no support");
  const double tol = 1e-9 * spectrum.df;
  if (band.lower < spectrum.f0 - tol || band.upper > spectrum.max_frequency() + tol)
    throw InvalidInput("band filter: band lies outside the spectrum support");
  std::vector<double> out(band.bins);
  const std::size_t last = spectrum.size() - 1;
  for (std::size_t j = 0; j < band.bins; ++j) {
    const double pos = (band.frequency(j) - spectrum.f0) / spectrum.df;
    const double fl = std::floor(pos);
    if (fl < 0.0) {
      out[j] = spectrum.values.front();
      continue;
    }
    auto i = static_cast<std::size_t>(fl);
    if (i >= last) {
      out[j] = spectrum.values.back();
      continue;
    }
    const double t = pos - fl;
    out[j] = (1.0 - t) * spectrum.values[i] + t * spectrum.values[i + 1];
  }
  return out;
}

std::vector<double> average_runs(const std::vector<std::vector<double>>& runs) {
  if (runs.empty()) throw InvalidInput("average runs: empty list");
  std::vector<double> out(runs.front().size(), 0.0);
  for (const auto& r : runs) {
    if (r.size() != out.size()) throw InvalidInput("average runs: length mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += r[i];
  }
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (double& v : out) v *= inv;
  return out;
}

NormalizationReference NormalizationReference::from(
    const std::vector<std::vector<double>>& healthy) {
  NormalizationReference ref{std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity()};
  for (const auto& s : healthy)
    for (double v : s) {
      ref.min = std::min(ref.min, v);
      ref.max = std::max(ref.max, v);
    }
  if (!(ref.max > ref.min)) throw InvalidInput("normalize: degenerate healthy reference (max == min)");
  return ref;
}

std::vector<double> NormalizationReference::apply(const std::vector<double>& values) const {
  if (!(max > min)) throw InvalidInput("normalize: degenerate reference (max == min)");
  const double inv = 1.0 / (max - min);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - min) * inv;
  return out;
}

std::vector<double> crossing_features(const CrossingRecord& record, const HalfCarVehicle& vehicle,
                                      const Band& band, const WelchSettings& welch,
                                      AxleMassModel mass_model) {
  const double fs = 1.0 / record.time_step;
  std::array<Spectrum, 2> psd;
  for (Axle a : {Axle::front, Axle::rear}) {
    const auto accel = cp_acceleration(estimate_cp_displacement(record, vehicle, a, mass_model));
    const auto [first, last] = record.on_span_range(a);
    if (last - first < 5) throw InvalidInput("crossing features: axle never on span");
    psd[static_cast<int>(a)] = welch_psd(
        std::vector<double>(accel.begin() + static_cast<std::ptrdiff_t>(first),
                            accel.begin() + static_cast<std::ptrdiff_t>(last)),
        fs, welch);
  }
  return band_filter(residual_spectrum(psd[0], psd[1]), band);
}

Dataset build_dataset(const std::vector<std::vector<double>>& healthy,
                      const std::vector<std::vector<double>>& damaged, std::size_t k,
                      const DatasetCounts& counts, std::uint64_t seed, const Band& band) {
  if (k == 0) throw InvalidInput("dataset: k must be >= 1");
  for (const auto* pool : {&healthy, &damaged})
    for (const auto& s : *pool)
      if (s.size() != band.bins) throw InvalidInput("dataset: spectrum width differs from band");

  Dataset ds;
  ds.band = band;
  ds.k = k;
  Rng split_rng(derive_seed(seed, "dataset-split"));
  const auto order = split_rng.permutation(healthy.size());
  const std::size_t n_train = (healthy.size() * 8) / 10;
  ds.train_pool.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.test_pool.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::vector<std::size_t> damaged_pool(damaged.size());
  for (std::size_t i = 0; i < damaged.size(); ++i) damaged_pool[i] = i;

  auto check = [&](const std::vector<std::size_t>& pool, std::size_t wanted, const char* name) {
    if (wanted > 0 && pool.size() < k)
      throw InvalidInput(std::string("dataset: ") + name + " pool smaller than k");
  };
  check(ds.train_pool, counts.train, "healthy training");
  check(ds.test_pool, counts.test_healthy, "healthy test");
  check(damaged_pool, counts.test_damaged, "damaged");

  auto draw = [&](const std::vector<std::vector<double>>& source,
                  const std::vector<std::size_t>& pool, std::size_t count, Condition label,
                  std::string_view stream) {
    std::vector<SpectrumSample> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
      Rng rng(derive_seed(seed, stream, {s}));
      // Partial Fisher-Yates: k distinct members.
      std::vector<std::size_t> idx = pool;
      for (std::size_t j = 0; j < k; ++j) std::swap(idx[j], idx[j + rng.below(idx.size() - j)]);
      SpectrumSample sample;
      sample.label = label;
      sample.members.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
      std::vector<std::vector<double>> runs;
      runs.reserve(k);
      for (std::size_t m : sample.members) runs.push_back(source[m]);
      sample.values = average_runs(runs);
      out.push_back(std::move(sample));
    }
    return out;
  };

  ds.train = draw(healthy, ds.train_pool, counts.train, Condition::healthy, "dataset-train");
  auto test_hn = draw(healthy, ds.test_pool, counts.test_healthy, Condition::healthy, "dataset-test-hn");
  auto test_dm = draw(damaged, damaged_pool, counts.test_damaged, Condition::damaged, "dataset-test-dm");

  std::vector<std::vector<double>> raw_train;
  raw_train.reserve(ds.train.size());
  for (const auto& s : ds.train) raw_train.push_back(s.values);
  ds.reference = NormalizationReference::from(raw_train);
  for (auto& s : ds.train) s.values = ds.reference.apply(s.values);
  for (auto& s : test_hn) s.values = ds.reference.apply(s.values);
  for (auto& s : test_dm) s.values = ds.reference.apply(s.values);
  ds.test = std::move(test_hn);
  ds.test.insert(ds.test.end(), std::make_move_iterator(test_dm.begin()),
                 std::make_move_iterator(test_dm.end()));
  return ds;
}

std::size_t argmax(const std::vector<double>& values) {
  if (values.empty()) throw InvalidInput("argmax: empty input");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace driveby
