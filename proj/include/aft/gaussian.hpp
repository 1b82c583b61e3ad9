#pragma once

// Joint Gaussian simulation of source/translation pairs. Both blocks x and y
// are zero-mean; all log densities are natural logs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "aft/stats.hpp"

namespace aft::gaussian {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Block { X, Y };

/// A concrete multivariate normal with its Cholesky factor cached.
class GaussianDist {
 public:
  GaussianDist(Vector mean, Matrix covariance);

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  const Matrix& cholesky() const { return cholesky_; }
  double log_det() const { return log_det_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

  /// Throws InputFormatError on a dimension mismatch.
  double log_density(const Vector& point) const;

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix cholesky_;
  double log_det_ = 0.0;
};

/// P(x, y) over the stacked vector (x, y). The mean is identically zero.
class JointGaussian {
 public:
  JointGaussian(std::size_t dim_x, std::size_t dim_y, Matrix covariance);

  std::size_t dim_x() const { return dim_x_; }
  std::size_t dim_y() const { return dim_y_; }
  const Matrix& covariance() const { return covariance_; }

  Matrix block(Block rows, Block cols) const;
  GaussianDist joint() const;

 private:
  std::size_t dim_x_;
  std::size_t dim_y_;
  Matrix covariance_;
};

/// A^T A where A has unit diagonal and `offdiag` elsewhere.
Matrix build_covariance(std::size_t total_dim, double offdiag);

GaussianDist marginal(const JointGaussian& joint, Block block);

/// Distribution of the other block given `given` = value (Schur complement).
/// Throws SingularMatrix when the conditioning block is not positive definite.
GaussianDist conditional(const JointGaussian& joint, Block given, const Vector& value);

double log_density(const GaussianDist& dist, const Vector& point);

/// x ~ P(x) from a seeded stream.
Vector sample_source(const JointGaussian& joint, std::uint64_t rng_seed);

/// n draws from q(y) = prod_i U(-2 sigma_i, 2 sigma_i), sigma_i the marginal sd
/// of y_i. One candidate per column.
Matrix sample_candidates(const JointGaussian& joint, std::size_t n,
                                      std::uint64_t rng_seed);

struct SimulationConfig {
  std::vector<std::size_t> dims{1, 2, 4, 8};
  std::size_t n_sources = 100;
  std::size_t n_candidates = 100000;
  double top_fraction = 0.1;
  double offdiag = 0.7;
  std::uint64_t seed = 0;
  // 0 means one worker per hardware thread.
  std::size_t threads = 0;

  /// Throws Error on an invalid combination.
  void validate() const;
  std::size_t top_count() const;
};

struct SimulatedSource {
  std::size_t source_index = 0;
  Vector x;
  double logp_x = 0.0;
  std::optional<double> rho_top;
  std::optional<double> rho_all;
};

struct DimensionResult {
  std::size_t dim = 0;
  std::vector<SimulatedSource> sources;
};

/// Log quantities for one candidate y given source x.
struct CandidateScores {
  double logp_y_given_x = 0.0;
  double logp_x_given_y = 0.0;
  double logp_y = 0.0;
};

/// Precomputed conditionals for the n+n joint used in the hot loop.
class CandidateScorer {
 public:
  explicit CandidateScorer(const JointGaussian& joint);

  const JointGaussian& joint() const { return joint_; }
  const GaussianDist& marginal_x() const { return marginal_x_; }

  /// log p(y|x), log p(x|y) and log p(y) for every candidate.
  std::vector<CandidateScores> score(const Vector& x, const Matrix& candidates) const;

 private:
  JointGaussian joint_;
  GaussianDist marginal_x_;
  GaussianDist marginal_y_;
  Matrix y_given_x_gain_;  // Sigma_yx Sigma_xx^-1
  Matrix x_given_y_gain_;  // Sigma_xy Sigma_yy^-1
  double norm_y_ = 0.0;  // -0.5 (d ln 2pi + log det) per distribution
  double norm_y_given_x_ = 0.0;
  double norm_x_given_y_ = 0.0;
  Matrix inv_chol_y_;
  Matrix inv_chol_y_given_x_;
  Matrix inv_chol_x_given_y_;
};

/// Indices of the `count` largest values, ties broken by lower index, returned
/// in ascending index order.
std::vector<std::size_t> top_indices(const std::vector<double>& values, std::size_t count);

/// Runs one source: samples x and candidates from the substream for
/// (seed, dim, source_index) and computes both correlations.
SimulatedSource simulate_source(const CandidateScorer& scorer, const SimulationConfig& config,
                                std::size_t source_index);

std::vector<DimensionResult> simulate_tradeoffs(const SimulationConfig& config);

/// Sources of a 1-D run nearest |x| = k * sigma_x for k in {0, 1, 2}.
struct ProbabilityPanel {
  double target_sigmas = 0.0;
  const SimulatedSource* source = nullptr;
};
std::vector<ProbabilityPanel> select_panels(const DimensionResult& result, double sigma_x,
                                            std::vector<double> targets = {0.0, 1.0, 2.0});

}  // namespace aft::gaussian
