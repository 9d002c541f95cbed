#include "wavecov/moments.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <string>

#include "wavecov/error.hpp"

namespace wavecov {
namespace {

std::size_t level_length(int level) { return std::size_t{1} << level; }

}  // namespace

MomentLayout::MomentLayout(std::size_t channels, int levels) : channels_(channels), levels_(levels) {
  if (channels == 0) throw ValidationError("moment layout needs at least one channel");
  if (levels < 1 || levels > kMaxFilterLevel) {
    throw ValidationError("moment layout level count " + std::to_string(levels) + " out of range");
  }
}

std::size_t MomentLayout::pair_position(std::size_t first, std::size_t second) const {
  if (first > second) std::swap(first, second);
  if (second >= channels_) {
    throw ValidationError("channel pair (" + std::to_string(first) + ", " + std::to_string(second) +
                          ") outside " + std::to_string(channels_) + " channels");
  }
  // Pairs before row `first`: sum_{r<first} (I - r).
  return first * channels_ - first * (first - 1) / 2 + (second - first);
}

std::size_t MomentLayout::position(const MomentIndex& idx) const {
  if (idx.level < 1 || idx.level > levels_) {
    throw ValidationError("moment level " + std::to_string(idx.level) + " outside 1.." +
                          std::to_string(levels_));
  }
  return pair_position(idx.first, idx.second) * static_cast<std::size_t>(levels_) +
         static_cast<std::size_t>(idx.level - 1);
}

MomentIndex MomentLayout::index(std::size_t position) const {
  if (position >= size()) throw ValidationError("moment position " + std::to_string(position) + " out of range");
  const std::size_t levels = static_cast<std::size_t>(levels_);
  std::size_t pair = position / levels;
  const int level = static_cast<int>(position % levels) + 1;
  std::size_t first = 0;
  while (pair >= channels_ - first) {
    pair -= channels_ - first;
    ++first;
  }
  return {first, first + pair, level};
}

WaveletCoefficients::WaveletCoefficients(const MultiSignal& x, int levels)
    : channels_(static_cast<std::size_t>(x.cols())), levels_(levels), samples_(static_cast<std::size_t>(x.rows())) {
  if (channels_ == 0) throw ValidationError("signal has no channels");
  const int cap = max_level(samples_);
  if (levels < 1 || levels > cap) {
    throw ValidationError("requested " + std::to_string(levels) + " levels but " + std::to_string(samples_) +
                          " samples support at most " + std::to_string(cap));
  }
  series_.reserve(channels_ * static_cast<std::size_t>(levels));
  for (std::size_t i = 0; i < channels_; ++i) {
    std::span<const double> col(x.col(static_cast<Eigen::Index>(i)).data(), samples_);
    for (int j = 1; j <= levels; ++j) series_.push_back(decompose(col, j, i));
  }
}

double wccv(const CoefficientSeries& a, const CoefficientSeries& b) {
  if (a.level != b.level) {
    throw ValidationError("wccv: level mismatch (" + std::to_string(a.level) + " vs " + std::to_string(b.level) + ")");
  }
  if (a.size() != b.size() || a.size() == 0) {
    throw ValidationError("wccv: coefficient counts differ or are empty (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) acc += a.values[t] * b.values[t];
  return acc / static_cast<double>(a.size());
}

Eigen::VectorXd wavelet_variance(std::span<const double> x, int levels) {
  Eigen::VectorXd out(levels);
  for (int j = 1; j <= levels; ++j) {
    const CoefficientSeries w = decompose(x, j);
    double acc = 0.0;
    for (double v : w.values) acc += v * v;
    out[j - 1] = acc / static_cast<double>(w.size());
  }
  return out;
}

MomentVector moment_vector(const WaveletCoefficients& coeffs) {
  MomentVector out{MomentLayout(coeffs.channels(), coeffs.levels()), {}};
  out.values.resize(static_cast<Eigen::Index>(out.layout.size()));
  for (std::size_t pos = 0; pos < out.layout.size(); ++pos) {
    const MomentIndex idx = out.layout.index(pos);
    out.values[static_cast<Eigen::Index>(pos)] = wccv(coeffs.at(idx.first, idx.level), coeffs.at(idx.second, idx.level));
  }
  return out;
}

MomentVector moment_vector(const MultiSignal& x, int levels) { return moment_vector(WaveletCoefficients(x, levels)); }

std::size_t default_hac_lag(std::size_t samples) {
  return static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(samples)) + 1e-9));
}

Eigen::MatrixXd repair_psd(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  // Clip in correlation scale: entries here span many orders of magnitude and
  // clipping in raw scale would leak the error of coarse levels into fine ones.
  Eigen::VectorXd sd = sym.diagonal();
  for (Eigen::Index k = 0; k < n; ++k) sd[k] = sd[k] > 0.0 ? std::sqrt(sd[k]) : 1.0;
  const Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * sym * sd.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition of moment covariance failed");
  const Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0);
  Eigen::MatrixXd fixed = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
  // Put the original variances back.
  Eigen::VectorXd back = fixed.diagonal();
  for (Eigen::Index k = 0; k < n; ++k) {
    back[k] = back[k] > 0.0 && sym(k, k) > 0.0 ? sd[k] / std::sqrt(back[k]) : (sym(k, k) > 0.0 ? sd[k] : 0.0);
  }
  Eigen::MatrixXd out = back.asDiagonal() * fixed * back.asDiagonal();
  out = (0.5 * (out + out.transpose())).eval();
  const double ridge = 1e-12 * sym.diagonal().cwiseMax(0.0).sum() / static_cast<double>(n);
  out.diagonal().array() += ridge;
  return out;
}

MomentCovariance moment_covariance(const WaveletCoefficients& coeffs, const HacOptions& options) {
  const std::size_t T = coeffs.samples();
  const int J = coeffs.levels();
  const std::size_t I = coeffs.channels();
  const MomentLayout layout(I, J);
  const std::size_t P = layout.pair_count();
  const std::size_t N = T - level_length(J) + 1;

  const std::size_t base = options.lag.value_or(default_hac_lag(T));
  if (N < 2 * base) {
    throw ValidationError("common support of " + std::to_string(N) + " samples is shorter than twice the HAC lag " +
                          std::to_string(base));
  }

  MomentCovariance out;
  out.support = N;
  out.diagonal_only = options.diagonal_only;
  out.lags.resize(static_cast<std::size_t>(J));
  for (int j = 1; j <= J; ++j) {
    std::size_t lag = base;
    if (options.rule == BandwidthRule::LevelAdaptive) {
      lag = std::max(base, std::min(options.level_factor * level_length(j), N / 2));
    }
    out.lags[static_cast<std::size_t>(j - 1)] = lag;
  }

  // Demeaned product series over the common support, level-major columns:
  // column (j-1)*P + p holds pair p at level j.
  const Eigen::Index n = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd U(n, static_cast<Eigen::Index>(P) * J);
  for (int j = 1; j <= J; ++j) {
    const std::size_t offset = level_length(J) - level_length(j);
    for (std::size_t p = 0; p < P; ++p) {
      const MomentIndex idx = layout.index(p * static_cast<std::size_t>(J));
      const auto& a = coeffs.at(idx.first, j).values;
      const auto& b = coeffs.at(idx.second, j).values;
      auto col = U.col(static_cast<Eigen::Index>(static_cast<std::size_t>(j - 1) * P + p));
      for (std::size_t t = 0; t < N; ++t) col[static_cast<Eigen::Index>(t)] = a[offset + t] * b[offset + t];
      col.array() -= col.mean();
    }
  }

  // Bartlett weights 1 - |k|/w (w = lag + 1) come out exactly from window
  // sums of the zero-padded series: sum_t S_t S_t' / (w N).
  auto window_sums = [&](std::size_t w, Eigen::Index cols) {
    const Eigen::Index rows = n + static_cast<Eigen::Index>(w) - 1;
    Eigen::MatrixXd S(rows, cols);
    const Eigen::Index wi = static_cast<Eigen::Index>(w);
    for (Eigen::Index c = 0; c < cols; ++c) {
      double run = 0.0;
      for (Eigen::Index t = 0; t < rows; ++t) {
        if (t < n) run += U(t, c);
        if (t - wi >= 0 && t - wi < n) run -= U(t - wi, c);
        S(t, c) = run;
      }
    }
    return S;
  };

  const Eigen::Index dim = static_cast<Eigen::Index>(layout.size());
  Eigen::MatrixXd level_major = Eigen::MatrixXd::Zero(dim, dim);
  const Eigen::Index Pi = static_cast<Eigen::Index>(P);

  int j = 1;
  while (j <= J) {
    // Group consecutive levels that share a lag; entries pairing a level in
    // the group with any finer level use that lag.
    int last = j;
    while (last < J && out.lags[static_cast<std::size_t>(last)] == out.lags[static_cast<std::size_t>(j - 1)]) ++last;
    const std::size_t w = out.lags[static_cast<std::size_t>(j - 1)] + 1;
    const double norm = 1.0 / (static_cast<double>(w) * static_cast<double>(N));
    const Eigen::Index lo = static_cast<Eigen::Index>(j - 1) * Pi;
    const Eigen::Index hi = static_cast<Eigen::Index>(last) * Pi;
    if (options.diagonal_only) {
      for (Eigen::Index c = lo; c < hi; ++c) {
        double acc = 0.0;
        double run = 0.0;
        const Eigen::Index wi = static_cast<Eigen::Index>(w);
        for (Eigen::Index t = 0; t < n + wi - 1; ++t) {
          if (t < n) run += U(t, c);
          if (t - wi >= 0 && t - wi < n) run -= U(t - wi, c);
          acc += run * run;
        }
        level_major(c, c) = acc * norm;
      }
    } else {
      const Eigen::MatrixXd S = window_sums(w, hi);
      Eigen::MatrixXd block = S.middleCols(lo, hi - lo).transpose() * S;
      block *= norm;
      level_major.block(lo, 0, hi - lo, hi) = block;
      level_major.block(0, lo, hi, hi - lo) = block.transpose();
    }
    j = last + 1;
  }

  // Back to canonical (pair-major) order.
  std::vector<Eigen::Index> to_canonical(static_cast<std::size_t>(dim));
  for (int lv = 1; lv <= J; ++lv) {
    for (std::size_t p = 0; p < P; ++p) {
      to_canonical[static_cast<std::size_t>(lv - 1) * P + p] =
          static_cast<Eigen::Index>(p * static_cast<std::size_t>(J) + static_cast<std::size_t>(lv - 1));
    }
  }
  Eigen::MatrixXd lrv(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      lrv(to_canonical[static_cast<std::size_t>(r)], to_canonical[static_cast<std::size_t>(c)]) = level_major(r, c);
    }
  }

  // Cov(nu_a, nu_b) ~ LRV_ab |S_a n S_b| / (M_a M_b) = LRV_ab / max(M_a, M_b)
  // since the coarser level's coefficient range nests in the finer one's.
  // The min-kernel is PSD, so the Schur product keeps the repair intact.
  Eigen::VectorXd inv_count(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    inv_count[k] = 1.0 / static_cast<double>(coeffs.at(0, layout.index(static_cast<std::size_t>(k)).level).size());
  }
  if (options.diagonal_only) {
    Eigen::VectorXd d = lrv.diagonal().cwiseMax(0.0);
    const double ridge = 1e-12 * d.sum() / static_cast<double>(dim);
    d.array() += ridge;
    out.matrix = d.cwiseProduct(inv_count).asDiagonal();
  } else {
    out.matrix = repair_psd(lrv);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) out.matrix(r, c) *= std::min(inv_count[r], inv_count[c]);
    }
  }

  if (options.variance_floor > 0.0) {
    // Gaussian approximation Var(nu_ab) ~ (nu_aa nu_bb + nu_ab^2) / eta_j with
    // eta_j = max(M_j / L_j, 1) equivalent degrees of freedom.
    const MomentVector nu = moment_vector(coeffs);
    Eigen::VectorXd rescale = Eigen::VectorXd::Ones(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const MomentIndex idx = layout.index(static_cast<std::size_t>(k));
      const double eta = std::max(1.0 / (inv_count[k] * static_cast<double>(level_length(idx.level))), 1.0);
      const double ab = nu.values[k];
      const double floor = options.variance_floor *
                           (nu[{idx.first, idx.first, idx.level}] * nu[{idx.second, idx.second, idx.level}] + ab * ab) /
                           eta;
      const double v = out.matrix(k, k);
      if (v >= floor) continue;
      if (v > 0.0) {
        rescale[k] = std::sqrt(floor / v);
      } else {
        out.matrix(k, k) = floor;
      }
    }
    out.matrix = rescale.asDiagonal() * out.matrix * rescale.asDiagonal();
  }
  out.matrix = (0.5 * (out.matrix + out.matrix.transpose())).eval();
  return out;
}

MomentCovariance moment_covariance(const MultiSignal& x, int levels, const HacOptions& options) {
  return moment_covariance(WaveletCoefficients(x, levels), options);
}

std::vector<Interval> confidence_intervals(const MomentVector& nu, const MomentCovariance& cov, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (cov.matrix.rows() != nu.values.size()) throw ValidationError("moment covariance does not match moment vector");
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - alpha / 2.0);
  std::vector<Interval> out(static_cast<std::size_t>(nu.values.size()));
  for (Eigen::Index k = 0; k < nu.values.size(); ++k) {
    const double se = std::sqrt(std::max(cov.matrix(k, k), 0.0));
    Interval iv{nu.values[k] - z * se, nu.values[k] + z * se};
    const MomentIndex idx = nu.layout.index(static_cast<std::size_t>(k));
    if (idx.first == idx.second) iv.lo = std::max(iv.lo, 0.0);
    out[static_cast<std::size_t>(k)] = iv;
  }
  return out;
}

}  // namespace wavecov
