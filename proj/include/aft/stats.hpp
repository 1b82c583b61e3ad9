#pragma once

// Statistical primitives shared by the simulation and the corpus analyses.
// All variances are unbiased (n - 1) sample variances.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace aft::stats {

struct PairedSample {
  std::vector<double> first;
  std::vector<double> second;

  // Throws LengthMismatch if the vectors differ in length.
  void validate() const;
  std::size_t size() const { return first.size(); }
};

struct TTestResult {
  double t = 0.0;
  std::size_t df = 0;
  double p_two_sided = 1.0;
};

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

double mean(std::span<const double> values);
double sample_variance(std::span<const double> values);
double median(std::vector<double> values);

/// Pearson product-moment correlation.
///
/// Throws LengthMismatch, InsufficientData (n < 2) or DegenerateVariance when
/// either vector is constant.
double pearson(std::span<const double> first, std::span<const double> second);
double pearson(const PairedSample& sample);

/// Like pearson() but returns nullopt instead of throwing on constant input.
std::optional<double> try_pearson(std::span<const double> first, std::span<const double> second);

/// Fractional ranks divided by n; ties share their average rank.
std::vector<double> percentile_ranks(std::span<const double> values);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a Student t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Paired-sample t-test on d = first - second, df = n - 1.
TTestResult paired_t_test(std::span<const double> first, std::span<const double> second);

/// Two-sided p-value of a Pearson r over n pairs, via t = r sqrt((n-2)/(1-r^2)).
double correlation_p_value(double r, std::size_t n);

/// Copy of `sample` with `second` permuted uniformly at random (Fisher-Yates).
PairedSample shuffle_pairing(const PairedSample& sample, std::uint64_t rng_seed);

/// 1.06 * sd * n^(-1/5).
double silverman_bandwidth(std::span<const double> values);

/// Gaussian-kernel density on a 512-point grid spanning the data range +- 4h.
/// When no bandwidth is given Silverman's rule is used, falling back to 0.1
/// for constant input.
DensityCurve kde(std::span<const double> values, std::optional<double> bandwidth = std::nullopt);

/// Gaussian-kernel density estimate at a single point.
double kde_at(std::span<const double> values, double bandwidth, double point);

inline constexpr std::size_t kKdeGridPoints = 512;
inline constexpr double kKdeFallbackBandwidth = 0.1;

/// Trapezoidal integral of a curve over its grid.
double trapezoid(const DensityCurve& curve);

}  // namespace aft::stats
