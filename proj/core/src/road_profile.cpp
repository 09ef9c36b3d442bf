#include "driveby/road_profile.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "driveby/error.hpp"
#include "driveby/random.hpp"

namespace driveby {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

RoadProfile RoadProfile::generate(double span_length, std::uint64_t seed,
                                  const RoughnessSettings& s) {
  if (!(span_length > 0.0)) throw InvalidInput("road profile: span length must be > 0");
  if (s.harmonics < 1 || !(s.min_frequency > 0.0) || !(s.max_frequency > s.min_frequency))
    throw InvalidInput("road profile: invalid frequency band");

  RoadProfile p;
  p.span_length_ = span_length;
  p.taper_length_ = std::min(s.max_taper, span_length / 10.0);
  p.seed_ = seed;

  const int n = s.harmonics;
  p.frequencies_.resize(n);
  p.amplitudes_.resize(n);
  p.phases_.resize(n);
  const double log_lo = std::log(s.min_frequency);
  const double log_step = (std::log(s.max_frequency) - log_lo) / n;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const double lo = std::exp(log_lo + i * log_step);
    const double hi = std::exp(log_lo + (i + 1) * log_step);
    const double centre = std::sqrt(lo * hi);
    const double ratio = centre / s.reference_frequency;
    const double psd = s.reference_psd / (ratio * ratio);
    p.frequencies_[i] = centre;
    p.amplitudes_[i] = std::sqrt(2.0 * psd * (hi - lo));
    p.phases_[i] = kTwoPi * rng.uniform();
  }
  return p;
}

RoadProfile RoadProfile::flat(double span_length) {
  RoadProfile p = generate(span_length, 0, RoughnessSettings{.harmonics = 1});
  p.amplitudes_.assign(p.amplitudes_.size(), 0.0);
  return p;
}

RoadProfile RoadProfile::scaled(double factor) const {
  RoadProfile p = *this;
  for (double& a : p.amplitudes_) a *= factor;
  return p;
}

double RoadProfile::taper(double x, double* derivative) const {
  const double t = taper_length_;
  *derivative = 0.0;
  if (t <= 0.0) return 1.0;
  const double from_end = std::min(x, span_length_ - x);
  if (from_end >= t) return 1.0;
  const double phase = std::numbers::pi * from_end / t;
  const double dir = x <= span_length_ - x ? 1.0 : -1.0;
  *derivative = dir * 0.5 * std::numbers::pi / t * std::sin(phase);
  return 0.5 * (1.0 - std::cos(phase));
}

ProfileValue RoadProfile::evaluate_untapered(double x) const {
  ProfileValue v;
  for (std::size_t i = 0; i < frequencies_.size(); ++i) {
    const double w = kTwoPi * frequencies_[i];
    const double arg = w * x + phases_[i];
    v.r += amplitudes_[i] * std::cos(arg);
    v.slope -= amplitudes_[i] * w * std::sin(arg);
  }
  return v;
}

ProfileValue RoadProfile::evaluate(double x) const {
  if (x < 0.0 || x > span_length_) return {};
  double dw = 0.0;
  const double w = taper(x, &dw);
  const ProfileValue raw = evaluate_untapered(x);
  return {w * raw.r, dw * raw.r + w * raw.slope};
}

ProfileTable RoadProfile::tabulate(double spacing) const {
  if (!(spacing > 0.0)) throw InvalidInput("road profile: table spacing must be > 0");
  const auto intervals = static_cast<std::size_t>(std::ceil(span_length_ / spacing));
  const double h = span_length_ / static_cast<double>(intervals);
  const std::size_t nodes = intervals + 1;
  std::vector<double> r(nodes, 0.0);
  std::vector<double> slope(nodes, 0.0);

  // Harmonics advance by a fixed rotation per grid step; resynchronise
  // periodically so the recurrence error stays at round-off level.
  constexpr std::size_t kResync = 512;
  for (std::size_t i = 0; i < frequencies_.size(); ++i) {
    const double a = amplitudes_[i];
    if (a == 0.0) continue;
    const double w = kTwoPi * frequencies_[i];
    const std::complex<double> step = std::polar(1.0, w * h);
    std::complex<double> z;
    for (std::size_t j = 0; j < nodes; ++j) {
      if (j % kResync == 0) z = std::polar(1.0, w * (static_cast<double>(j) * h) + phases_[i]);
      r[j] += a * z.real();
      slope[j] -= a * w * z.imag();
      z *= step;
    }
  }
  for (std::size_t j = 0; j < nodes; ++j) {
    const double x = std::min(static_cast<double>(j) * h, span_length_);
    double dw = 0.0;
    const double w = taper(x, &dw);
    slope[j] = dw * r[j] + w * slope[j];
    r[j] *= w;
  }
  r.front() = 0.0;
  r.back() = 0.0;
  return ProfileTable(span_length_, std::move(r), std::move(slope));
}

ProfileTable::ProfileTable(double span_length, std::vector<double> r, std::vector<double> slope)
    : span_length_(span_length), r_(std::move(r)), slope_(std::move(slope)) {
  if (r_.size() < 2 || r_.size() != slope_.size())
    throw InvalidInput("profile table: need >= 2 matching samples");
  spacing_ = span_length_ / static_cast<double>(r_.size() - 1);
}

ProfileValue ProfileTable::evaluate(double x) const {
  if (r_.empty() || x < 0.0 || x > span_length_) return {};
  const double u = x / spacing_;
  std::size_t j = static_cast<std::size_t>(u);
  if (j >= r_.size() - 1) j = r_.size() - 2;
  const double s = u - static_cast<double>(j);
  const double h = spacing_;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  const double d00 = 6.0 * s2 - 6.0 * s;
  const double d10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double d01 = -6.0 * s2 + 6.0 * s;
  const double d11 = 3.0 * s2 - 2.0 * s;
  ProfileValue v;
  v.r = h00 * r_[j] + h10 * h * slope_[j] + h01 * r_[j + 1] + h11 * h * slope_[j + 1];
  v.slope = (d00 * r_[j] + d01 * r_[j + 1]) / h + d10 * slope_[j] + d11 * slope_[j + 1];
  return v;
}

}  // namespace driveby
