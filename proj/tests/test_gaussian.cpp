#include <doctest.h>

#include <cmath>

#include "aft/error.hpp"
#include "aft/gaussian.hpp"
#include "aft/random.hpp"

using namespace aft;
using namespace aft::gaussian;
using doctest::Approx;

namespace {

JointGaussian make_joint(std::size_t dim, double offdiag) {
  return JointGaussian(dim, dim, build_covariance(2 * dim, offdiag));
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("build_covariance") {
  const Matrix c2 = build_covariance(2, 0.7);
  CHECK(c2(0, 0) == Approx(1.49));
  CHECK(c2(1, 1) == Approx(1.49));
  CHECK(c2(0, 1) == Approx(1.40));
  CHECK(c2(1, 0) == c2(0, 1));

  CHECK(build_covariance(3, 0.0) == Matrix::Identity(3, 3));

  const Matrix c3 = build_covariance(3, 0.7);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(c3(i, j) == Approx(i == j ? 1.98 : 1.89));
  }

  CHECK_THROWS(build_covariance(0, 0.5));
  CHECK_THROWS(build_covariance(2, 1.0));
}

TEST_CASE("build_covariance is always positive definite") {
  for (std::size_t n = 1; n <= 16; ++n) {
    for (double off : {0.0, 0.1, 0.5, 0.7, 0.9, 0.99}) {
      Eigen::LLT<Matrix> llt(build_covariance(n, off));
      CHECK(llt.info() == Eigen::Success);
    }
  }
}

TEST_CASE("marginals read off the diagonal blocks") {
  const auto joint = make_joint(1, 0.7);
  const auto y = marginal(joint, Block::Y);
  CHECK(y.mean()[0] == 0.0);
  CHECK(y.covariance()(0, 0) == Approx(1.49));

  const auto j4 = make_joint(2, 0.7);
  CHECK(marginal(j4, Block::X).covariance() == j4.covariance().topLeftCorner(2, 2));
  CHECK(marginal(j4, Block::Y).covariance() == j4.covariance().bottomRightCorner(2, 2));

  const auto indep = make_joint(3, 0.0);
  CHECK(marginal(indep, Block::X).covariance() == Matrix::Identity(3, 3));
  CHECK(marginal(indep, Block::Y).covariance() == Matrix::Identity(3, 3));
}

TEST_CASE("conditional") {
  const auto joint = make_joint(1, 0.7);
  CHECK(conditional(joint, Block::X, vec({0.0})).mean()[0] == Approx(0.0));

  const auto c = conditional(joint, Block::X, vec({1.0}));
  CHECK(c.mean()[0] == Approx(1.4 / 1.49).epsilon(1e-12));
  CHECK(c.covariance()(0, 0) == Approx(1.49 - 1.4 * 1.4 / 1.49).epsilon(1e-12));

  const auto indep = make_joint(2, 0.0);
  const auto ci = conditional(indep, Block::Y, vec({0.3, -2.0}));
  CHECK(ci.mean().isZero());
  CHECK(ci.covariance() == marginal(indep, Block::X).covariance());

  CHECK_THROWS_AS(conditional(joint, Block::X, vec({1.0, 2.0})), InputFormatError);
}

TEST_CASE("conditional covariance does not depend on the conditioning value") {
  const auto joint = make_joint(4, 0.7);
  const Vector a = Vector::Constant(4, 0.3);
  const Vector b = Vector::LinSpaced(4, -3.0, 5.0);
  for (Block given : {Block::X, Block::Y}) {
    const auto ca = conditional(joint, given, a);
    const auto cb = conditional(joint, given, b);
    CHECK(ca.covariance() == cb.covariance());  // bitwise
    CHECK(ca.log_det() == cb.log_det());
  }
}

TEST_CASE("conditioning on a singular block fails") {
  Matrix cov = Matrix::Identity(3, 3);
  cov(1, 1) = 0.0;
  cov(2, 2) = 0.0;
  // not positive definite as a joint either
  CHECK_THROWS_AS(JointGaussian(1, 2, cov), SingularMatrix);
}

TEST_CASE("log_density") {
  const GaussianDist std_normal(vec({0.0}), Matrix::Identity(1, 1));
  CHECK(log_density(std_normal, vec({0.0})) == Approx(-0.9189385332046727).epsilon(1e-14));
  CHECK(log_density(std_normal, vec({2.0})) == Approx(-2.9189385332046727).epsilon(1e-14));

  const auto joint = make_joint(3, 0.7);
  const auto dist = conditional(joint, Block::X, Vector::LinSpaced(3, -1.0, 1.0));
  const double at_mean = log_density(dist, dist.mean());
  CHECK(at_mean == Approx(-0.5 * (3 * std::log(2 * M_PI) + dist.log_det())).epsilon(1e-14));
  CHECK(dist.log_det() ==
        Approx(2.0 * dist.cholesky().diagonal().array().log().sum()).epsilon(1e-14));
  CHECK_THROWS_AS(log_density(dist, vec({1.0})), InputFormatError);
}

TEST_CASE("Bayes consistency and joint factorization") {
  for (std::size_t dim : {1, 2, 4, 8}) {
    const auto joint = make_joint(dim, 0.7);
    const auto px = marginal(joint, Block::X);
    const auto py = marginal(joint, Block::Y);
    const auto full = joint.joint();
    Engine eng = make_engine(dim);
    for (int trial = 0; trial < 100; ++trial) {
      Vector x(static_cast<Eigen::Index>(dim)), y(static_cast<Eigen::Index>(dim));
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = 2.0 * standard_normal(eng);
        y[i] = 2.0 * standard_normal(eng);
      }
      const double lhs = conditional(joint, Block::Y, y).log_density(x) + py.log_density(y);
      const double rhs = conditional(joint, Block::X, x).log_density(y) + px.log_density(x);
      CHECK(std::fabs(lhs - rhs) < 1e-8);

      Vector stacked(2 * x.size());
      stacked << x, y;
      CHECK(std::fabs(full.log_density(stacked) - rhs) < 1e-8);
    }
  }
}

TEST_CASE("sample_source") {
  const auto unit = make_joint(1, 0.0);
  CHECK(sample_source(unit, 17) == sample_source(unit, 17));
  CHECK(sample_source(unit, 17) != sample_source(unit, 18));

  double sum = 0.0, sq = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const double x = sample_source(unit, derive_seed(1, {static_cast<std::uint64_t>(i)}))[0];
    sum += x;
    sq += x * x;
  }
  const double m = sum / draws;
  const double var = (sq - draws * m * m) / (draws - 1);
  CHECK(std::fabs(m) < 0.05);
  CHECK(var > 0.95);
  CHECK(var < 1.05);

  // correlated blocks: per-coordinate mean still near zero
  const auto corr = make_joint(3, 0.7);
  Vector acc = Vector::Zero(3);
  for (int i = 0; i < draws; ++i) {
    acc += sample_source(corr, derive_seed(2, {static_cast<std::uint64_t>(i)}));
  }
  acc /= draws;
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::fabs(acc[i]) < 0.05);
}

TEST_CASE("sample_candidates") {
  const auto joint = make_joint(3, 0.7);
  const Vector sigma = joint.block(Block::Y, Block::Y).diagonal().array().sqrt();
  const std::size_t n = 100000;
  const Matrix y = sample_candidates(joint, n, 5);
  REQUIRE(y.cols() == static_cast<Eigen::Index>(n));
  CHECK(sample_candidates(joint, 10, 5) == sample_candidates(joint, 10, 5));

  for (Eigen::Index i = 0; i < 3; ++i) {
    const auto row = y.row(i).array();
    CHECK(row.abs().maxCoeff() <= 2.0 * sigma[i]);
    const double m = row.mean();
    const double var = (row - m).square().sum() / static_cast<double>(n - 1);
    const double expected = (2.0 * sigma[i]) * (2.0 * sigma[i]) / 3.0;
    CHECK(std::fabs(m) < 0.02 * sigma[i]);
    CHECK(std::fabs(var / expected - 1.0) < 0.05);
  }
}

TEST_CASE("top_indices breaks ties by index") {
  const std::vector<double> v{1.0, 5.0, 3.0, 5.0, 5.0, 0.0};
  CHECK(top_indices(v, 2) == std::vector<std::size_t>{1, 3});
  CHECK(top_indices(v, 4) == std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(top_indices(v, 10).size() == v.size());
}

TEST_CASE("SimulationConfig validation") {
  SimulationConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.top_count() == 10000);
  c.n_candidates = 15;
  CHECK(c.top_count() == 2);
  c.n_candidates = 10;
  CHECK_THROWS(c.validate());
  c = {};
  c.top_fraction = 0.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.dims = {};
  CHECK_THROWS(c.validate());
  c = {};
  c.offdiag = 1.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("simulate_tradeoffs is deterministic and independent of thread count") {
  SimulationConfig c;
  c.dims = {1, 2};
  c.n_sources = 6;
  c.n_candidates = 2000;
  c.seed = 42;
  c.threads = 1;
  const auto a = simulate_tradeoffs(c);
  c.threads = 3;
  const auto b = simulate_tradeoffs(c);
  REQUIRE(a.size() == b.size());
  for (std::size_t d = 0; d < a.size(); ++d) {
    REQUIRE(a[d].sources.size() == 6);
    for (std::size_t s = 0; s < a[d].sources.size(); ++s) {
      CHECK(a[d].sources[s].x == b[d].sources[s].x);
      CHECK(a[d].sources[s].rho_top == b[d].sources[s].rho_top);
      CHECK(a[d].sources[s].rho_all == b[d].sources[s].rho_all);
      CHECK(a[d].sources[s].logp_x == b[d].sources[s].logp_x);
    }
  }
}

TEST_CASE("simulated sources near the mode show no tradeoff, distant ones do") {
  SimulationConfig c;
  c.dims = {1};
  c.n_sources = 60;
  c.n_candidates = 20000;
  c.seed = 3;
  const auto res = simulate_tradeoffs(c);
  const auto panels = select_panels(res[0], std::sqrt(1.49));
  REQUIRE(panels.size() == 3);
  CHECK(*panels[0].source->rho_top > -0.1);
  CHECK(*panels[2].source->rho_top < -0.4);
}

TEST_CASE("candidate scorer matches the generic conditional route") {
  const auto joint = make_joint(2, 0.7);
  const CandidateScorer scorer(joint);
  const Vector x = sample_source(joint, 9);
  const Matrix y = sample_candidates(joint, 50, 10);
  const auto scores = scorer.score(x, y);
  const auto y_given_x = conditional(joint, Block::X, x);
  const auto py = marginal(joint, Block::Y);
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    const Vector yi = y.col(i);
    const auto& s = scores[static_cast<std::size_t>(i)];
    CHECK(s.logp_y_given_x == Approx(y_given_x.log_density(yi)).epsilon(1e-12));
    CHECK(s.logp_x_given_y == Approx(conditional(joint, Block::Y, yi).log_density(x)).epsilon(1e-12));
    CHECK(s.logp_y == Approx(py.log_density(yi)).epsilon(1e-12));
  }
}
