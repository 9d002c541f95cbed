#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "wavecov/models.hpp"
#include "wavecov/moments.hpp"

namespace wavecov {

/// Cov(D^(i)_s, D^(i')_{s+lag}) for the first differences D of one block's
/// contribution to global channels i and i'. Drift blocks return 0 (their
/// difference is the constant omega). Throws if a channel is not loaded.
double block_diff_crosscov(const LatentBlock& block, const BlockValues& values, std::size_t i, std::size_t i2,
                           long lag);

/// Haar WCCV at `level` of a stationary AR1 pair with coefficients a, b and
/// unit innovation covariance.
double haar_ar1_factor(double a, double b, int level);

enum class MomentMethod {
  /// Per-kind closed forms.
  ClosedForm,
  /// c_j' Gamma c_j built from block_diff_crosscov; O(L_j^2) per entry.
  QuadraticForm,
};

double theoretical_moment(const Model& model, const Eigen::VectorXd& theta, const MomentIndex& idx,
                          MomentMethod method = MomentMethod::ClosedForm);

MomentVector theoretical_vector(const Model& model, const Eigen::VectorXd& theta, int levels,
                                MomentMethod method = MomentMethod::ClosedForm);

/// Implied moments of each block alone. Drift blocks contribute their own
/// squared means; the sum over blocks equals theoretical_vector unless two
/// different drift blocks load the same channel pair.
std::vector<MomentVector> block_contributions(const Model& model, const Eigen::VectorXd& theta, int levels);

/// d nu / d theta_k for every parameter that enters nu linearly (variances,
/// covariances, Q^2) at the current AR1 coefficients; other columns are zero.
/// nu(theta) = linear_design(theta) * theta + drift_moments(theta).
Eigen::MatrixXd linear_design(const Model& model, const Eigen::VectorXd& theta, int levels);

/// m_i(j) m_i'(j) with m_i(j) = tau_j / 4 * (sum of drift rates on channel i).
Eigen::VectorXd drift_moments(const Model& model, const Eigen::VectorXd& theta, int levels);

/// A(theta) = d nu / d theta': exact for linear and drift parameters,
/// central differences (step 1e-6 max(1, |phi|)) for AR1 coefficients.
Eigen::MatrixXd jacobian(const Model& model, const Eigen::VectorXd& theta, int levels);

}  // namespace wavecov
