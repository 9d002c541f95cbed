#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>

namespace wavecov {

struct NelderMeadOptions {
  /// Stop when (f_worst - f_best) <= ftol * |f_best|.
  double ftol = 1e-8;
  /// Or when every vertex lies within xtol (max-norm) of the best one.
  double xtol = 1e-10;
  std::size_t max_iterations = 10000;
  /// Absolute offset along each axis for the initial simplex.
  double initial_step = 0.25;
};

struct OptimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Nelder-Mead with dimension-adaptive coefficients (Gao and Han). The
/// objective may return +inf for infeasible points but must be finite at x0.
OptimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const NelderMeadOptions& options = {});

/// argmin ||A x - b|| subject to x >= 0 (Lawson-Hanson active set).
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, std::size_t max_iterations = 0);

}  // namespace wavecov
