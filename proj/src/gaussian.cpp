#include "aft/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include "aft/error.hpp"
#include "aft/random.hpp"

namespace aft::gaussian {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

Matrix lower_cholesky(const Matrix& cov, const char* what) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix(std::string(what) + ": covariance is not positive definite");
  }
  return llt.matrixL();
}

Matrix inverse_lower(const Matrix& lower) {
  const auto n = lower.rows();
  return lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
}

double normalizer(const GaussianDist& d) {
  return -0.5 * (static_cast<double>(d.dim()) * kLog2Pi + d.log_det());
}

Eigen::Index offset(const JointGaussian& joint, Block b) {
  return b == Block::X ? 0 : static_cast<Eigen::Index>(joint.dim_x());
}

Eigen::Index extent(const JointGaussian& joint, Block b) {
  return static_cast<Eigen::Index>(b == Block::X ? joint.dim_x() : joint.dim_y());
}

Block other(Block b) { return b == Block::X ? Block::Y : Block::X; }

}  // namespace

GaussianDist::GaussianDist(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size()) {
    throw InputFormatError("gaussian: mean and covariance dimensions differ");
  }
  cholesky_ = lower_cholesky(covariance_, "gaussian");
  log_det_ = 2.0 * cholesky_.diagonal().array().log().sum();
}

double GaussianDist::log_density(const Vector& point) const {
  if (point.size() != mean_.size()) {
    throw InputFormatError("log_density: point has dimension " + std::to_string(point.size()) +
                           ", distribution has " + std::to_string(mean_.size()));
  }
  const Vector z = cholesky_.triangularView<Eigen::Lower>().solve(point - mean_);
  return -0.5 * (static_cast<double>(dim()) * kLog2Pi + log_det_ + z.squaredNorm());
}

JointGaussian::JointGaussian(std::size_t dim_x, std::size_t dim_y, Matrix covariance)
    : dim_x_(dim_x), dim_y_(dim_y), covariance_(std::move(covariance)) {
  const auto total = static_cast<Eigen::Index>(dim_x + dim_y);
  if (dim_x == 0 || dim_y == 0) throw Error("joint gaussian: block dimensions must be positive");
  if (covariance_.rows() != total || covariance_.cols() != total) {
    throw InputFormatError("joint gaussian: covariance must be " + std::to_string(total) + "x" +
                           std::to_string(total));
  }
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InputFormatError("joint gaussian: covariance is not symmetric");
  }
  lower_cholesky(covariance_, "joint gaussian");
}

Matrix JointGaussian::block(Block rows, Block cols) const {
  return covariance_.block(offset(*this, rows), offset(*this, cols), extent(*this, rows),
                           extent(*this, cols));
}

GaussianDist JointGaussian::joint() const {
  return GaussianDist(Vector::Zero(covariance_.rows()), covariance_);
}

Matrix build_covariance(std::size_t total_dim, double offdiag) {
  if (total_dim == 0) throw Error("build_covariance: total_dim must be positive");
  if (!(offdiag >= 0.0 && offdiag < 1.0)) throw Error("build_covariance: offdiag must be in [0, 1)");
  const auto n = static_cast<Eigen::Index>(total_dim);
  Matrix a = Matrix::Constant(n, n, offdiag);
  a.diagonal().setOnes();
  Matrix cov = a.transpose() * a;
  // symmetric by construction; make it bitwise so
  return 0.5 * (cov + cov.transpose());
}

GaussianDist marginal(const JointGaussian& joint, Block block) {
  return GaussianDist(Vector::Zero(extent(joint, block)), joint.block(block, block));
}

GaussianDist conditional(const JointGaussian& joint, Block given, const Vector& value) {
  if (value.size() != extent(joint, given)) {
    throw InputFormatError("conditional: value has dimension " + std::to_string(value.size()) +
                           ", block has " + std::to_string(extent(joint, given)));
  }
  const Block target = other(given);
  const Matrix s_bb = joint.block(given, given);
  const Matrix s_ab = joint.block(target, given);
  Eigen::LLT<Matrix> llt(s_bb);
  if (llt.info() != Eigen::Success) throw SingularMatrix("conditional: singular conditioning block");
  const Matrix gain = llt.solve(s_ab.transpose()).transpose();
  Matrix cov = joint.block(target, target) - gain * s_ab.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return GaussianDist(gain * value, std::move(cov));
}

double log_density(const GaussianDist& dist, const Vector& point) {
  return dist.log_density(point);
}

namespace {

Vector draw_source(const JointGaussian& joint, Engine& eng) {
  const Matrix l = lower_cholesky(joint.block(Block::X, Block::X), "sample_source");
  Vector z(l.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(eng);
  return l * z;
}

Matrix draw_candidates(const JointGaussian& joint, std::size_t n, Engine& eng) {
  const Vector half_width = 2.0 * joint.block(Block::Y, Block::Y).diagonal().array().sqrt();
  Matrix out(half_width.size(), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      out(i, c) = uniform(eng, -half_width[i], half_width[i]);
    }
  }
  return out;
}

}  // namespace

Vector sample_source(const JointGaussian& joint, std::uint64_t rng_seed) {
  Engine eng = make_engine(rng_seed);
  return draw_source(joint, eng);
}

Matrix sample_candidates(const JointGaussian& joint, std::size_t n, std::uint64_t rng_seed) {
  if (n == 0) throw Error("sample_candidates: n must be positive");
  Engine eng = make_engine(rng_seed);
  return draw_candidates(joint, n, eng);
}

void SimulationConfig::validate() const {
  if (dims.empty()) throw Error("simulation: at least one dimensionality is required");
  for (std::size_t d : dims) {
    if (d == 0) throw Error("simulation: dimensionalities must be positive");
  }
  if (n_sources == 0) throw Error("simulation: n_sources must be positive");
  if (n_candidates == 0) throw Error("simulation: n_candidates must be positive");
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) {
    throw Error("simulation: top_fraction must be in (0, 1]");
  }
  if (!(offdiag >= 0.0 && offdiag < 1.0)) throw Error("simulation: offdiag must be in [0, 1)");
  if (top_count() < 2) throw Error("simulation: top_fraction * n_candidates must be at least 2");
}

std::size_t SimulationConfig::top_count() const {
  const double exact = top_fraction * static_cast<double>(n_candidates);
  // guard against 0.1 * 100000 = 10000.000000000002
  const double rounded = std::round(exact);
  const double count = std::fabs(exact - rounded) < 1e-9 ? rounded : std::ceil(exact);
  return std::min(n_candidates, static_cast<std::size_t>(count));
}

CandidateScorer::CandidateScorer(const JointGaussian& joint)
    : joint_(joint),
      marginal_x_(marginal(joint, Block::X)),
      marginal_y_(marginal(joint, Block::Y)) {
  const GaussianDist y_given_x = conditional(joint, Block::X, Vector::Zero(joint.dim_x()));
  const GaussianDist x_given_y = conditional(joint, Block::Y, Vector::Zero(joint.dim_y()));

  Eigen::LLT<Matrix> llt_xx(joint.block(Block::X, Block::X));
  Eigen::LLT<Matrix> llt_yy(joint.block(Block::Y, Block::Y));
  y_given_x_gain_ = llt_xx.solve(joint.block(Block::X, Block::Y)).transpose();
  x_given_y_gain_ = llt_yy.solve(joint.block(Block::Y, Block::X)).transpose();

  inv_chol_y_ = inverse_lower(marginal_y_.cholesky());
  inv_chol_y_given_x_ = inverse_lower(y_given_x.cholesky());
  inv_chol_x_given_y_ = inverse_lower(x_given_y.cholesky());
  norm_y_ = normalizer(marginal_y_);
  norm_y_given_x_ = normalizer(y_given_x);
  norm_x_given_y_ = normalizer(x_given_y);
}

std::vector<CandidateScores> CandidateScorer::score(const Vector& x, const Matrix& candidates) const {
  if (x.size() != static_cast<Eigen::Index>(joint_.dim_x()) ||
      candidates.rows() != static_cast<Eigen::Index>(joint_.dim_y())) {
    throw InputFormatError("score: dimension mismatch");
  }
  const Vector mean_y = y_given_x_gain_ * x;

  const Eigen::RowVectorXd q_y =
      (inv_chol_y_.triangularView<Eigen::Lower>() * candidates).colwise().squaredNorm();
  const Eigen::RowVectorXd q_y_given_x =
      (inv_chol_y_given_x_.triangularView<Eigen::Lower>() * (candidates.colwise() - mean_y))
          .colwise()
          .squaredNorm();
  const Matrix resid_x = (-(x_given_y_gain_ * candidates)).colwise() + x;
  const Eigen::RowVectorXd q_x_given_y =
      (inv_chol_x_given_y_.triangularView<Eigen::Lower>() * resid_x).colwise().squaredNorm();

  std::vector<CandidateScores> out(static_cast<std::size_t>(candidates.cols()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out[i].logp_y_given_x = norm_y_given_x_ - 0.5 * q_y_given_x[c];
    out[i].logp_x_given_y = norm_x_given_y_ - 0.5 * q_x_given_y[c];
    out[i].logp_y = norm_y_ - 0.5 * q_y[c];
  }
  return out;
}

std::vector<std::size_t> top_indices(const std::vector<double>& values, std::size_t count) {
  count = std::min(count, values.size());
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(), better);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

SimulatedSource simulate_source(const CandidateScorer& scorer, const SimulationConfig& config,
                                std::size_t source_index) {
  const auto dim = static_cast<std::uint64_t>(scorer.joint().dim_x());
  const auto idx = static_cast<std::uint64_t>(source_index);

  SimulatedSource src;
  src.source_index = source_index;
  src.x = sample_source(scorer.joint(), derive_seed(config.seed, {dim, idx, 0}));
  src.logp_x = scorer.marginal_x().log_density(src.x);

  const Matrix candidates = sample_candidates(scorer.joint(), config.n_candidates,
                                              derive_seed(config.seed, {dim, idx, 1}));
  const auto scores = scorer.score(src.x, candidates);

  const std::size_t n = scores.size();
  std::vector<double> accuracy(n), fluency(n), translation(n);
  for (std::size_t i = 0; i < n; ++i) {
    accuracy[i] = scores[i].logp_x_given_y;
    fluency[i] = scores[i].logp_y;
    translation[i] = scores[i].logp_y_given_x;
  }
  src.rho_all = stats::try_pearson(accuracy, fluency);

  const auto top = top_indices(translation, config.top_count());
  std::vector<double> top_acc, top_flu;
  top_acc.reserve(top.size());
  top_flu.reserve(top.size());
  for (std::size_t i : top) {
    top_acc.push_back(accuracy[i]);
    top_flu.push_back(fluency[i]);
  }
  src.rho_top = stats::try_pearson(top_acc, top_flu);
  return src;
}

std::vector<DimensionResult> simulate_tradeoffs(const SimulationConfig& config) {
  config.validate();
  std::vector<DimensionResult> results;
  results.reserve(config.dims.size());

  std::size_t workers = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  workers = std::clamp<std::size_t>(workers, 1, config.n_sources);

  for (std::size_t dim : config.dims) {
    const JointGaussian joint(dim, dim, build_covariance(2 * dim, config.offdiag));
    const CandidateScorer scorer(joint);

    DimensionResult res;
    res.dim = dim;
    res.sources.resize(config.n_sources);
    std::vector<std::exception_ptr> failures(workers);
    auto run_range = [&](std::size_t worker) {
      try {
        for (std::size_t i = worker; i < config.n_sources; i += workers) {
          res.sources[i] = simulate_source(scorer, config, i);
        }
      } catch (...) {
        failures[worker] = std::current_exception();
      }
    };
    if (workers == 1) {
      run_range(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
    results.push_back(std::move(res));
  }
  return results;
}

std::vector<ProbabilityPanel> select_panels(const DimensionResult& result, double sigma_x,
                                            std::vector<double> targets) {
  std::vector<ProbabilityPanel> panels;
  for (double k : targets) {
    ProbabilityPanel panel{k, nullptr};
    double best = 0.0;
    for (const auto& src : result.sources) {
      const double gap = std::fabs(src.x.norm() - k * sigma_x);
      if (panel.source == nullptr || gap < best) {
        panel.source = &src;
        best = gap;
      }
    }
    panels.push_back(panel);
  }
  return panels;
}

}  // namespace aft::gaussian
