#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavecov/models.hpp"
#include "wavecov/moments.hpp"

namespace wavecov {

enum class Weighting {
  /// Inverse of the diagonal of the moment covariance.
  Diagonal,
  /// Inverse of the full (PSD-repaired) moment covariance.
  Full,
};

enum class SearchSpace { Transformed, Raw };

struct FitOptions {
  /// Number of levels; max_level(T) when unset.
  std::optional<int> levels;
  Weighting weighting = Weighting::Diagonal;
  HacOptions hac;
  int restarts = 3;
  /// Relative spread of simplex values at which Nelder-Mead stops.
  double tolerance = 1e-8;
  /// Iteration cap per Nelder-Mead run is this times the parameter count.
  std::size_t iterations_per_param = 5000;
  SearchSpace space = SearchSpace::Transformed;
  /// Compute the sandwich covariance (needs the full moment covariance).
  bool standard_errors = true;
  /// For models where nu is linear in theta, take the weighted least squares
  /// solution directly when it lies inside the parameter space.
  bool linear_shortcut = true;
  /// Starting point; per-channel fits are used when unset.
  std::optional<Eigen::VectorXd> start;
  /// Seed for restart perturbations.
  std::uint64_t seed = 0;
};

struct FitDiagnostics {
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  int restarts = 0;
  bool converged = false;
  /// The weighted least squares solution was accepted without a search.
  bool closed_form = false;
  std::string message;
};

struct FitResult {
  Eigen::VectorXd theta;
  /// Covariance of theta-hat (sandwich, finite-sample scale); empty when
  /// standard errors were not requested.
  Eigen::MatrixXd covariance;
  /// T times covariance: the estimate of the asymptotic covariance of
  /// sqrt(T) (theta-hat - theta).
  Eigen::MatrixXd asymptotic;
  Eigen::VectorXd std_errors;
  double objective = 0.0;
  MomentVector empirical;
  MomentVector implied;
  MomentCovariance moment_cov;
  Eigen::MatrixXd weight;
  std::size_t samples = 0;
  FitDiagnostics diagnostics;
  std::vector<std::string> warnings;
};

/// Empirical moments with their estimated covariance.
struct MomentData {
  MomentVector nu;
  MomentCovariance cov;
  std::size_t samples = 0;
};

MomentData compute_moments(const MultiSignal& x, int levels, const HacOptions& hac);

Eigen::MatrixXd weight_matrix(const MomentCovariance& cov, Weighting weighting);

/// (nu-hat - nu(theta))' W (nu-hat - nu(theta)); +inf outside the domain.
double objective(const Model& model, const Eigen::VectorXd& theta, const MomentVector& nu, const Eigen::MatrixXd& weight);

/// Grid-plus-NNLS initial values for a one-channel model from its wavelet
/// variances and their weights (AR1 coefficients on a fixed grid, all other
/// parameters by nonnegative weighted least squares).
Eigen::VectorXd grid_start(const Model& model, const Eigen::VectorXd& wv, const Eigen::VectorXd& weights);

/// Per-channel fits combined into a full starting point with cross
/// parameters at zero.
Eigen::VectorXd starting_values(const Model& model, const MomentData& data, const FitOptions& options);

/// Fit of a one-channel model to one series.
FitResult univariate_fit(std::span<const double> x, const ModelSpec& spec, const FitOptions& options = {});

FitResult fit(const MultiSignal& x, const ModelSpec& spec, const FitOptions& options = {});

/// Fit from precomputed moments.
FitResult fit_moments(const Model& model, const MomentData& data, const FitOptions& options = {});

struct DependenceTestOptions {
  std::size_t bootstrap = 99;
  std::uint64_t seed = 0;
  FitOptions fit;
};

struct DepTestResult {
  double stat = 0.0;
  std::vector<double> boot_dist;
  double p_value = 1.0;
  std::size_t bootstrap = 0;
  std::size_t dropped = 0;
  Eigen::VectorXd theta_null;
  Eigen::VectorXd theta_full;
  double objective_null = 0.0;
  double objective_full = 0.0;
};

/// Parametric bootstrap test of all cross parameters being zero.
DepTestResult dependence_test(const MultiSignal& x, const ModelSpec& spec_full, const DependenceTestOptions& options);

}  // namespace wavecov
