#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wavecov/wavelet.hpp"

namespace wavecov {

/// Channels are columns, samples are rows.
using MultiSignal = Eigen::MatrixXd;

/// One lag-0 wavelet cross-covariance: channels first <= second (0-based)
/// at level j (1-based).
struct MomentIndex {
  std::size_t first = 0;
  std::size_t second = 0;
  int level = 1;

  auto operator<=>(const MomentIndex&) const = default;
};

/// Canonical flattening of (i, i', j): channel pairs in lexicographic order
/// (0,0), (0,1), ..., (0,I-1), (1,1), ..., and levels ascending inside each
/// pair.
class MomentLayout {
 public:
  MomentLayout() = default;
  MomentLayout(std::size_t channels, int levels);

  std::size_t channels() const { return channels_; }
  int levels() const { return levels_; }
  std::size_t pair_count() const { return channels_ * (channels_ + 1) / 2; }
  std::size_t size() const { return pair_count() * static_cast<std::size_t>(levels_); }

  std::size_t pair_position(std::size_t first, std::size_t second) const;
  std::size_t position(const MomentIndex& idx) const;
  MomentIndex index(std::size_t position) const;

  bool operator==(const MomentLayout&) const = default;

 private:
  std::size_t channels_ = 0;
  int levels_ = 0;
};

struct MomentVector {
  MomentLayout layout;
  Eigen::VectorXd values;

  double operator[](const MomentIndex& idx) const { return values[layout.position(idx)]; }
};

/// Haar coefficients of every channel at levels 1..J, stored channel-major.
class WaveletCoefficients {
 public:
  WaveletCoefficients(const MultiSignal& x, int levels);

  std::size_t channels() const { return channels_; }
  int levels() const { return levels_; }
  std::size_t samples() const { return samples_; }
  const CoefficientSeries& at(std::size_t channel, int level) const {
    return series_[channel * static_cast<std::size_t>(levels_) + static_cast<std::size_t>(level - 1)];
  }

 private:
  std::size_t channels_ = 0;
  int levels_ = 0;
  std::size_t samples_ = 0;
  std::vector<CoefficientSeries> series_;
};

/// Lag-0 uncentered cross-covariance (1/M_j) sum_t W^(i)_t W^(i')_t.
double wccv(const CoefficientSeries& a, const CoefficientSeries& b);

/// Univariate wavelet variance of one series at levels 1..J.
Eigen::VectorXd wavelet_variance(std::span<const double> x, int levels);

MomentVector moment_vector(const WaveletCoefficients& coeffs);
MomentVector moment_vector(const MultiSignal& x, int levels);

enum class BandwidthRule {
  /// One truncation lag for every entry: the user lag or floor(T^(1/3)).
  Fixed,
  /// Entries whose coarsest level is j use lag max(base, level_factor * L_j),
  /// capped at half the common support; base is the user lag or
  /// floor(T^(1/3)).
  LevelAdaptive,
};

struct HacOptions {
  std::optional<std::size_t> lag;
  BandwidthRule rule = BandwidthRule::LevelAdaptive;
  std::size_t level_factor = 2;
  /// Lower bound on each variance as a fraction of the Gaussian
  /// equivalent-degrees-of-freedom approximation (see moment_covariance);
  /// 0 disables it. At 0.5 the bound equals the exact variance for i.i.d.
  /// level-1 coefficients.
  double variance_floor = 0.5;
  bool diagonal_only = false;
};

/// Bartlett-kernel estimate of Cov(nu-hat). The long-run covariance of the
/// stacked coefficient products is estimated over the common support
/// t = L_J..T; entry (a, b) is then divided by max(M_a, M_b), the coefficient
/// count of the finer of the two levels. Variances below
/// variance_floor * (nu_ii nu_i'i' + nu_ii'^2) / max(M_j / L_j, 1) are raised
/// to that bound, scaling the matching row and column so correlations are
/// kept.
struct MomentCovariance {
  /// Covariance of nu-hat.
  Eigen::MatrixXd matrix;
  std::size_t support = 0;
  /// Truncation lag used for entries whose coarsest level is j (index j-1).
  std::vector<std::size_t> lags;
  bool diagonal_only = false;

  Eigen::VectorXd variances() const { return matrix.diagonal(); }
};

std::size_t default_hac_lag(std::size_t samples);

MomentCovariance moment_covariance(const WaveletCoefficients& coeffs, const HacOptions& options = {});
MomentCovariance moment_covariance(const MultiSignal& x, int levels, const HacOptions& options = {});

/// Symmetrize, clip negative eigenvalues of the correlation-scaled matrix to
/// zero, restore the original diagonal and add a ridge of 1e-12 * trace / dim.
Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& m);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Normal-theory intervals nu-hat +/- z_{1-alpha/2} se; lower bounds of
/// wavelet variances (i == i') are floored at zero.
std::vector<Interval> confidence_intervals(const MomentVector& nu, const MomentCovariance& cov, double alpha);

}  // namespace wavecov
