#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "aft/error.hpp"
#include "aft/random.hpp"
#include "aft/stats.hpp"
#include "oracle.hpp"

using namespace aft;
using namespace aft::stats;
using doctest::Approx;

namespace {

std::vector<double> normals(Engine& eng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * standard_normal(eng);
  return v;
}

}  // namespace

TEST_CASE("pearson on exact linear relations") {
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == Approx(1.0));
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == Approx(-1.0));
}

TEST_CASE("pearson hand-computed value") {
  // cov sum 14.5, sqrt(17.5 * 17.5)
  const std::vector<double> x{0, 1, 2, 3, 4, 5};
  const std::vector<double> y{3, 2, 5, 4, 7, 6};
  CHECK(pearson(x, y) == Approx(14.5 / 17.5).epsilon(1e-12));
}

TEST_CASE("pearson errors") {
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                  DegenerateVariance);
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), LengthMismatch);
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), InsufficientData);
  CHECK_FALSE(try_pearson(std::vector<double>{1, 2}, std::vector<double>{5, 5}).has_value());
}

TEST_CASE("pearson symmetry and affine invariance") {
  Engine eng = make_engine(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = normals(eng, 3 + trial % 20);
    const auto b = normals(eng, a.size());
    const double r = pearson(a, b);
    CHECK(pearson(b, a) == Approx(r).epsilon(1e-12));

    const double alpha = uniform(eng, 0.1, 10.0);
    const double beta = uniform(eng, -50.0, 50.0);
    std::vector<double> scaled(a.size()), flipped(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      scaled[i] = alpha * a[i] + beta;
      flipped[i] = -alpha * a[i] + beta;
    }
    CHECK(pearson(scaled, b) == Approx(r).epsilon(1e-9));
    CHECK(pearson(a, scaled) == Approx(1.0).epsilon(1e-12));
    CHECK(pearson(a, flipped) == Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("percentile_ranks") {
  const auto r = percentile_ranks(std::vector<double>{10, 20, 30});
  CHECK(r[0] == Approx(1.0 / 3));
  CHECK(r[1] == Approx(2.0 / 3));
  CHECK(r[2] == Approx(1.0));

  const auto ties = percentile_ranks(std::vector<double>{5, 5, 7});
  CHECK(ties[0] == Approx(0.5));
  CHECK(ties[1] == Approx(0.5));
  CHECK(ties[2] == Approx(1.0));

  CHECK(percentile_ranks(std::vector<double>{42}) == std::vector<double>{1.0});
  CHECK_THROWS_AS(percentile_ranks(std::vector<double>{}), InsufficientData);
}

TEST_CASE("percentile_ranks is invariant under monotone transforms") {
  Engine eng = make_engine(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + trial % 30);
    // coarse values so ties occur
    for (auto& x : v) x = std::round(uniform(eng, -5.0, 5.0));
    std::vector<double> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::exp(v[i]) * 3.0 - 1.0;
    CHECK(percentile_ranks(v) == percentile_ranks(w));
  }
}

TEST_CASE("paired_t_test examples") {
  const std::vector<double> zeros{0, 0, 0};
  const auto r = paired_t_test(std::vector<double>{1, 2, 3}, zeros);
  CHECK(r.t == Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(r.df == 2);

  const auto z = paired_t_test(std::vector<double>{1, -1, 1, -1}, std::vector<double>(4, 0.0));
  CHECK(z.t == 0.0);
  CHECK(z.p_two_sided == Approx(1.0));

  CHECK_THROWS_AS(paired_t_test(std::vector<double>{2, 2, 2}, zeros), DegenerateVariance);
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1, 2}, zeros), LengthMismatch);
}

TEST_CASE("paired_t_test properties") {
  Engine eng = make_engine(3);
  const auto a = normals(eng, 12);
  const auto b = normals(eng, 12);
  CHECK_THROWS_AS(paired_t_test(a, a), DegenerateVariance);
  CHECK(paired_t_test(b, a).t == Approx(-paired_t_test(a, b).t).epsilon(1e-12));
  CHECK(paired_t_test(b, a).p_two_sided == Approx(paired_t_test(a, b).p_two_sided).epsilon(1e-12));
}

TEST_CASE("student t p-value is monotone in |t| and near-normal for large df") {
  double prev = 1.0;
  for (double t = 0.0; t < 8.0; t += 0.25) {
    const double p = student_t_two_sided_p(t, 7);
    CHECK(p <= prev);
    prev = p;
  }
  for (double df : {30.0, 50.0, 200.0}) {
    for (double t = 0.0; t < 4.0; t += 0.1) {
      const double normal_p = std::erfc(t / std::sqrt(2.0));
      CHECK(std::fabs(student_t_two_sided_p(t, df) - normal_p) < 0.5 / df);
    }
  }
  CHECK(student_t_two_sided_p(0.0, 3) == Approx(1.0));
  CHECK(student_t_two_sided_p(INFINITY, 3) == 0.0);
}

TEST_CASE("incomplete beta closed forms") {
  // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1-x)^b
  for (double x : {0.1, 0.37, 0.5, 0.92}) {
    CHECK(incomplete_beta(1, 1, x) == Approx(x).epsilon(1e-13));
    CHECK(incomplete_beta(2.5, 1, x) == Approx(std::pow(x, 2.5)).epsilon(1e-13));
    CHECK(incomplete_beta(1, 4, x) == Approx(1 - std::pow(1 - x, 4)).epsilon(1e-13));
  }
}

TEST_CASE("primitives agree with the brute-force oracle") {
  Engine eng = make_engine(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + uniform_index(eng, 60);
    const auto a = normals(eng, n, 3.0);
    auto b = normals(eng, n, 3.0);
    for (std::size_t i = 0; i < n; ++i) b[i] += 0.5 * a[i];

    CHECK(std::fabs(pearson(a, b) - oracle::pearson(a, b)) < 1e-10);

    const auto t = paired_t_test(a, b);
    const auto ot = oracle::paired_t(a, b);
    CHECK(std::fabs(t.t - ot.t) < 1e-10 * std::max(1.0, std::fabs(ot.t)));
    CHECK(t.df == static_cast<std::size_t>(ot.df));
    CHECK(std::fabs(t.p_two_sided - ot.p) < 1e-10);

    std::vector<double> coarse(n);
    for (auto& x : coarse) x = std::round(uniform(eng, 0.0, 6.0));
    const auto ranks = percentile_ranks(coarse);
    const auto oranks = oracle::percentile_ranks(coarse);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(ranks[i] - oranks[i]) < 1e-10);
  }
}

TEST_CASE("shuffle_pairing") {
  const PairedSample two{{1, 2}, {10, 20}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = shuffle_pairing(two, seed);
    CHECK(s.first == two.first);
    CHECK((s.second == std::vector<double>{10, 20} || s.second == std::vector<double>{20, 10}));
  }

  const PairedSample sample{{1, 2, 3, 4, 5, 6}, {6, 1, 4, 2, 9, 3}};
  CHECK(shuffle_pairing(sample, 99).second == shuffle_pairing(sample, 99).second);

  auto sorted = shuffle_pairing(sample, 7).second;
  auto original = sample.second;
  std::sort(sorted.begin(), sorted.end());
  std::sort(original.begin(), original.end());
  CHECK(sorted == original);

  CHECK_THROWS_AS(shuffle_pairing(PairedSample{{1}, {2}}, 0), InsufficientData);
}

TEST_CASE("shuffled pairs have zero expected correlation") {
  const PairedSample sample{{0, 1, 2, 3, 4, 5, 6, 7}, {0.5, 1.7, 2.1, 2.9, 4.4, 5.2, 6.8, 7.1}};
  double sum = 0.0;
  const int seeds = 10000;
  for (int seed = 0; seed < seeds; ++seed) sum += pearson(shuffle_pairing(sample, seed));
  CHECK(std::fabs(sum / seeds) < 0.05);
}

TEST_CASE("silverman bandwidth") {
  // constructed so that the sample sd is exactly 1
  std::vector<double> v(100);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i % 2 == 0 ? 1.0 : -1.0;
  const double scale = 1.0 / std::sqrt(sample_variance(v));
  for (auto& x : v) x *= scale;
  const double h = silverman_bandwidth(v);
  CHECK(h == Approx(0.42199360078670706).epsilon(1e-12));

  for (auto& x : v) x *= 2.0;
  CHECK(silverman_bandwidth(v) == Approx(2.0 * h).epsilon(1e-12));
  CHECK_THROWS_AS(silverman_bandwidth(std::vector<double>(10, 3.0)), DegenerateVariance);
}

TEST_CASE("kde") {
  const std::vector<double> one{0.0};
  CHECK(kde_at(one, 1.0, 0.0) == Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));

  const auto curve = kde(one, 1.0);
  CHECK(curve.grid.size() == kKdeGridPoints);
  CHECK(curve.grid.front() == Approx(-4.0));
  CHECK(curve.grid.back() == Approx(4.0));
  CHECK(curve.bandwidth == 1.0);

  const auto sym = kde(std::vector<double>{-1.0, 1.0});
  for (std::size_t i = 0; i < sym.grid.size(); ++i) {
    CHECK(sym.grid[i] == Approx(-sym.grid[sym.grid.size() - 1 - i]).epsilon(1e-12));
    CHECK(sym.density[i] == Approx(sym.density[sym.grid.size() - 1 - i]).epsilon(1e-12));
  }

  CHECK(kde(std::vector<double>(5, 2.0)).bandwidth == kKdeFallbackBandwidth);
  CHECK_THROWS_AS(kde(std::vector<double>{}), InsufficientData);
}

TEST_CASE("kde integrates to one") {
  Engine eng = make_engine(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto v = normals(eng, 1 + trial * 3, 1.0 + trial);
    const auto curve = kde(v);
    const double area = trapezoid(curve);
    CHECK(area > 0.95);
    CHECK(area < 1.05);
    for (double d : curve.density) CHECK(d >= 0.0);
  }
}
