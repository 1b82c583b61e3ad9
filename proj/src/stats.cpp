#include "aft/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "aft/error.hpp"
#include "aft/random.hpp"

namespace aft::stats {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("length mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

bool is_constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

// Lentz's method for the continued fraction of I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

void PairedSample::validate() const {
  require_same_length(first, second);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw InsufficientData("mean of empty input");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw InsufficientData("variance needs at least 2 values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

double median(std::vector<double> values) {
  if (values.empty()) throw InsufficientData("median of empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::optional<double> try_pearson(std::span<const double> first, std::span<const double> second) {
  require_same_length(first, second);
  if (first.size() < 2) throw InsufficientData("pearson needs at least 2 pairs");
  if (is_constant(first) || is_constant(second)) return std::nullopt;

  const double mx = mean(first);
  const double my = mean(second);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const double dx = first[i] - mx;
    const double dy = second[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double pearson(std::span<const double> first, std::span<const double> second) {
  auto r = try_pearson(first, second);
  if (!r) throw DegenerateVariance("pearson: constant input vector");
  return *r;
}

double pearson(const PairedSample& sample) {
  return pearson(sample.first, sample.second);
}

std::vector<double> percentile_ranks(std::span<const double> values) {
  if (values.empty()) throw InsufficientData("percentile_ranks of empty input");
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg / static_cast<double>(n);
    i = j;
  }
  return ranks;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

TTestResult paired_t_test(std::span<const double> first, std::span<const double> second) {
  require_same_length(first, second);
  const std::size_t n = first.size();
  if (n < 2) throw InsufficientData("paired t-test needs at least 2 pairs");

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = first[i] - second[i];
  if (is_constant(d)) throw DegenerateVariance("paired t-test: differences have zero variance");

  const double md = mean(d);
  const double sd = std::sqrt(sample_variance(d));
  TTestResult out;
  out.t = md / (sd / std::sqrt(static_cast<double>(n)));
  out.df = n - 1;
  out.p_two_sided = student_t_two_sided_p(out.t, static_cast<double>(out.df));
  return out;
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) throw InsufficientData("correlation p-value needs at least 3 pairs");
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r2));
  return student_t_two_sided_p(t, df);
}

PairedSample shuffle_pairing(const PairedSample& sample, std::uint64_t rng_seed) {
  sample.validate();
  if (sample.size() < 2) throw InsufficientData("shuffle_pairing needs at least 2 pairs");
  PairedSample out = sample;
  Engine eng = make_engine(rng_seed);
  for (std::size_t i = out.second.size() - 1; i > 0; --i) {
    const std::size_t j = uniform_index(eng, i + 1);
    std::swap(out.second[i], out.second[j]);
  }
  return out;
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) throw InsufficientData("bandwidth needs at least 2 values");
  if (is_constant(values)) throw DegenerateVariance("bandwidth: constant input");
  const double sd = std::sqrt(sample_variance(values));
  return 1.06 * sd * std::pow(static_cast<double>(values.size()), -0.2);
}

double kde_at(std::span<const double> values, double bandwidth, double point) {
  static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  double acc = 0.0;
  for (double v : values) {
    const double u = (point - v) / bandwidth;
    acc += std::exp(-0.5 * u * u);
  }
  return acc * kInvSqrt2Pi / (static_cast<double>(values.size()) * bandwidth);
}

DensityCurve kde(std::span<const double> values, std::optional<double> bandwidth) {
  if (values.empty()) throw InsufficientData("kde of empty input");
  double h;
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw Error("kde: bandwidth must be positive");
    h = *bandwidth;
  } else if (values.size() >= 2 && !is_constant(values)) {
    h = silverman_bandwidth(values);
  } else {
    h = kKdeFallbackBandwidth;
  }

  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it - 4.0 * h;
  const double hi = *hi_it + 4.0 * h;
  const double step = (hi - lo) / static_cast<double>(kKdeGridPoints - 1);

  DensityCurve curve;
  curve.bandwidth = h;
  curve.grid.resize(kKdeGridPoints);
  curve.density.resize(kKdeGridPoints);
  for (std::size_t i = 0; i < kKdeGridPoints; ++i) {
    curve.grid[i] = i + 1 == kKdeGridPoints ? hi : lo + step * static_cast<double>(i);
    curve.density[i] = kde_at(values, h, curve.grid[i]);
  }
  return curve;
}

double trapezoid(const DensityCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.grid.size(); ++i) {
    area += 0.5 * (curve.density[i] + curve.density[i - 1]) * (curve.grid[i] - curve.grid[i - 1]);
  }
  return area;
}

}  // namespace aft::stats
