#include "wavecov/theoretical.hpp"

#include <cmath>
#include <string>

#include "wavecov/error.hpp"
#include "wavecov/wavelet.hpp"

namespace wavecov {
namespace {

double tau_of(int level) { return std::ldexp(1.0, level); }

// e^y - 1 - y - y^2/2
double exp_remainder3(double y) {
  if (std::abs(y) > 2.0) return std::expm1(y) - y - 0.5 * y * y;
  double term = y * y * y / 6.0;
  double sum = term;
  for (int k = 4; k < 40; ++k) {
    term *= y / k;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// (m - 3x - m x^2 + 4x^(m+1) - x^(2m+1)) / (1-x)^2. The numerator has a
// double root at x = 1, so for x near 1 it is rebuilt from third-order
// exponential remainders in eps = -log x, where the cancelling terms are
// removed analytically.
double haar_ar1_half(double x, double m) {
  if (x > 0.5) {
    const double eps = -std::log1p(x - 1.0);
    const double num = -3.0 * exp_remainder3(-eps) - m * exp_remainder3(-2.0 * eps) +
                       4.0 * exp_remainder3(-(m + 1.0) * eps) - exp_remainder3(-(2.0 * m + 1.0) * eps);
    const double den = std::expm1(-eps);
    return num / (den * den);
  }
  const double one_minus = 1.0 - x;
  const double num = m - 3.0 * x - m * x * x + 4.0 * std::pow(x, m + 1.0) - std::pow(x, 2.0 * m + 1.0);
  return num / (one_minus * one_minus);
}

double one_minus_product(double a, double b) { return (1.0 - a) + a * (1.0 - b); }

std::size_t require_local(const LatentBlock& block, std::size_t channel) {
  auto a = block.local(channel);
  if (!a) {
    throw ValidationError("channel " + std::to_string(channel + 1) + " is not loaded by block '" + block.name + "'");
  }
  return *a;
}

// Shared by the public double version and the extended-precision quadratic
// form, whose sums cancel heavily for coefficients near -1.
template <typename Real>
Real diff_crosscov(const LatentBlock& block, const BlockValues& values, std::size_t i, std::size_t i2, long lag) {
  const Eigen::Index a = static_cast<Eigen::Index>(require_local(block, i));
  const Eigen::Index b = static_cast<Eigen::Index>(require_local(block, i2));
  const long k = std::labs(lag);
  switch (block.kind) {
    case BlockKind::WhiteNoise: {
      const Real s = values.cov(a, b);
      return k == 0 ? 2 * s : (k == 1 ? -s : Real(0));
    }
    case BlockKind::RandomWalk: return k == 0 ? Real(values.cov(a, b)) : Real(0);
    case BlockKind::Quantization: {
      if (a != b) return 0;
      const Real q = values.scale[a];
      return k == 0 ? 6 * q : (k == 1 ? -4 * q : (k == 2 ? q : Real(0)));
    }
    case BlockKind::Drift: return 0;
    case BlockKind::AutoRegressive: {
      // C(l) = kappa phi_b^l (l >= 0), kappa phi_a^|l| (l < 0); the
      // combination 2C(l) - C(l-1) - C(l+1) is written out in closed form so
      // that (1 - phi)^2 is not formed by cancellation.
      const Real pa = values.phi[a];
      const Real pb = values.phi[b];
      const Real kappa = Real(values.cov(a, b)) / ((1 - pa) + pa * (1 - pb));
      if (lag == 0) return kappa * ((1 - pa) + (1 - pb));
      const Real p = lag > 0 ? pb : pa;
      return -kappa * std::pow(p, static_cast<Real>(k - 1)) * (1 - p) * (1 - p);
    }
  }
  return 0;
}

// Coefficient of theta_p in gamma_j^(i,i') for parameters entering linearly.
double linear_coefficient(const Model& model, const std::vector<BlockValues>& values, std::size_t p, int level) {
  const ParamInfo& info = model.params()[p];
  const LatentBlock& block = model.spec().blocks[info.block];
  const double tau = tau_of(level);
  switch (block.kind) {
    case BlockKind::WhiteNoise: return 1.0 / tau;
    case BlockKind::RandomWalk: return (tau * tau + 2.0) / (12.0 * tau);
    case BlockKind::Quantization: return info.role == ParamRole::QuantizationPower ? 6.0 / (tau * tau) : 0.0;
    case BlockKind::Drift: return 0.0;
    case BlockKind::AutoRegressive: {
      if (info.role != ParamRole::Variance && info.role != ParamRole::Covariance) return 0.0;
      const Eigen::VectorXd& phi = values[info.block].phi;
      return haar_ar1_factor(phi[static_cast<Eigen::Index>(*block.local(info.first))],
                             phi[static_cast<Eigen::Index>(*block.local(info.second))], level);
    }
  }
  return 0.0;
}

bool is_linear_role(ParamRole role) {
  return role == ParamRole::Variance || role == ParamRole::Covariance || role == ParamRole::QuantizationPower;
}

// Total drift rate per channel.
Eigen::VectorXd drift_rates(const Model& model, const std::vector<BlockValues>& values) {
  Eigen::VectorXd rate = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.channels()));
  for (std::size_t k = 0; k < model.spec().blocks.size(); ++k) {
    const LatentBlock& b = model.spec().blocks[k];
    if (b.kind != BlockKind::Drift) continue;
    for (std::size_t a = 0; a < b.size(); ++a) {
      rate[static_cast<Eigen::Index>(b.channels[a])] += values[k].scale[static_cast<Eigen::Index>(a)];
    }
  }
  return rate;
}

void require_domain(const Model& model, const Eigen::VectorXd& theta) {
  if (auto err = model.domain_error(theta)) throw ValidationError("parameter outside its domain: " + *err);
}

}  // namespace

double haar_ar1_factor(double a, double b, int level) {
  const double tau = tau_of(level);
  const double m = tau / 2.0;
  return (haar_ar1_half(a, m) + haar_ar1_half(b, m)) / (one_minus_product(a, b) * tau * tau);
}

double block_diff_crosscov(const LatentBlock& block, const BlockValues& values, std::size_t i, std::size_t i2,
                           long lag) {
  return static_cast<double>(diff_crosscov<double>(block, values, i, i2, lag));
}

Eigen::MatrixXd linear_design(const Model& model, const Eigen::VectorXd& theta, int levels) {
  const MomentLayout layout(model.channels(), levels);
  const auto values = model.unpack(theta);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layout.size()), static_cast<Eigen::Index>(model.size()));
  for (std::size_t p = 0; p < model.size(); ++p) {
    const ParamInfo& info = model.params()[p];
    if (!is_linear_role(info.role)) continue;
    for (int j = 1; j <= levels; ++j) {
      A(static_cast<Eigen::Index>(layout.position({info.first, info.second, j})), static_cast<Eigen::Index>(p)) =
          linear_coefficient(model, values, p, j);
    }
  }
  return A;
}

Eigen::VectorXd drift_moments(const Model& model, const Eigen::VectorXd& theta, int levels) {
  const MomentLayout layout(model.channels(), levels);
  const Eigen::VectorXd rate = drift_rates(model, model.unpack(theta));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
  if (rate.isZero(0.0)) return out;
  for (std::size_t pos = 0; pos < layout.size(); ++pos) {
    const MomentIndex idx = layout.index(pos);
    const double q = tau_of(idx.level) / 4.0;
    out[static_cast<Eigen::Index>(pos)] =
        q * rate[static_cast<Eigen::Index>(idx.first)] * q * rate[static_cast<Eigen::Index>(idx.second)];
  }
  return out;
}

double theoretical_moment(const Model& model, const Eigen::VectorXd& theta, const MomentIndex& idx,
                          MomentMethod method) {
  require_domain(model, theta);
  if (idx.first >= model.channels() || idx.second >= model.channels() || idx.level < 1 ||
      idx.level > kMaxFilterLevel) {
    throw ValidationError("moment index out of range");
  }
  const auto values = model.unpack(theta);
  const std::size_t i = std::min(idx.first, idx.second);
  const std::size_t i2 = std::max(idx.first, idx.second);

  if (method == MomentMethod::ClosedForm) {
    double acc = 0.0;
    for (std::size_t p = 0; p < model.size(); ++p) {
      const ParamInfo& info = model.params()[p];
      if (!is_linear_role(info.role) || info.first != i || info.second != i2) continue;
      acc += linear_coefficient(model, values, p, idx.level) * theta[static_cast<Eigen::Index>(p)];
    }
    const Eigen::VectorXd rate = drift_rates(model, values);
    const double q = tau_of(idx.level) / 4.0;
    return acc + q * rate[static_cast<Eigen::Index>(i)] * q * rate[static_cast<Eigen::Index>(i2)];
  }

  const HaarLevel filter = build_filter(idx.level);
  const std::vector<double>& c = filter.diff_taps;
  const long n = static_cast<long>(c.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < model.spec().blocks.size(); ++k) {
    const LatentBlock& b = model.spec().blocks[k];
    if (b.kind == BlockKind::Drift || !b.local(i) || !b.local(i2)) continue;
    std::vector<long double> d(static_cast<std::size_t>(2 * n - 1));
    for (long lag = -(n - 1); lag <= n - 1; ++lag) {
      d[static_cast<std::size_t>(lag + n - 1)] = diff_crosscov<long double>(b, values[k], i, i2, lag);
    }
    long double block_sum = 0.0L;
    for (long l = 0; l < n; ++l) {
      long double row = 0.0L;
      for (long l2 = 0; l2 < n; ++l2) row += c[static_cast<std::size_t>(l2)] * d[static_cast<std::size_t>(l - l2 + n - 1)];
      block_sum += c[static_cast<std::size_t>(l)] * row;
    }
    acc += static_cast<double>(block_sum);
  }
  // Coefficients of a ramp with slope omega are omega * sum(c).
  double csum = 0.0;
  for (double v : c) csum += v;
  const Eigen::VectorXd rate = drift_rates(model, values);
  return acc + csum * rate[static_cast<Eigen::Index>(i)] * csum * rate[static_cast<Eigen::Index>(i2)];
}

MomentVector theoretical_vector(const Model& model, const Eigen::VectorXd& theta, int levels, MomentMethod method) {
  require_domain(model, theta);
  MomentVector out{MomentLayout(model.channels(), levels), {}};
  if (method == MomentMethod::ClosedForm) {
    out.values = linear_design(model, theta, levels) * theta + drift_moments(model, theta, levels);
    return out;
  }
  out.values.resize(static_cast<Eigen::Index>(out.layout.size()));
  for (std::size_t pos = 0; pos < out.layout.size(); ++pos) {
    out.values[static_cast<Eigen::Index>(pos)] = theoretical_moment(model, theta, out.layout.index(pos), method);
  }
  return out;
}

std::vector<MomentVector> block_contributions(const Model& model, const Eigen::VectorXd& theta, int levels) {
  require_domain(model, theta);
  const MomentLayout layout(model.channels(), levels);
  const Eigen::MatrixXd A = linear_design(model, theta, levels);
  const auto values = model.unpack(theta);
  std::vector<MomentVector> out;
  for (std::size_t k = 0; k < model.spec().blocks.size(); ++k) {
    const LatentBlock& b = model.spec().blocks[k];
    MomentVector v{layout, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()))};
    const Eigen::Index off = static_cast<Eigen::Index>(model.offset(k));
    const Eigen::Index len = static_cast<Eigen::Index>(model.block_size(k));
    v.values = A.middleCols(off, len) * theta.segment(off, len);
    if (b.kind == BlockKind::Drift) {
      for (std::size_t a = 0; a < b.size(); ++a) {
        for (std::size_t c = a; c < b.size(); ++c) {
          for (int j = 1; j <= levels; ++j) {
            const double q = tau_of(j) / 4.0;
            v.values[static_cast<Eigen::Index>(layout.position({b.channels[a], b.channels[c], j}))] =
                q * values[k].scale[static_cast<Eigen::Index>(a)] * q * values[k].scale[static_cast<Eigen::Index>(c)];
          }
        }
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

Eigen::MatrixXd jacobian(const Model& model, const Eigen::VectorXd& theta, int levels) {
  require_domain(model, theta);
  const MomentLayout layout(model.channels(), levels);
  Eigen::MatrixXd A = linear_design(model, theta, levels);
  const Eigen::VectorXd rate = drift_rates(model, model.unpack(theta));

  for (std::size_t p = 0; p < model.size(); ++p) {
    const ParamInfo& info = model.params()[p];
    const Eigen::Index col = static_cast<Eigen::Index>(p);
    if (info.role == ParamRole::DriftRate) {
      const std::size_t c = info.first;
      for (std::size_t pos = 0; pos < layout.size(); ++pos) {
        const MomentIndex idx = layout.index(pos);
        const double q = tau_of(idx.level) / 4.0;
        double d = 0.0;
        if (idx.first == c) d += q * q * rate[static_cast<Eigen::Index>(idx.second)];
        if (idx.second == c) d += q * q * rate[static_cast<Eigen::Index>(idx.first)];
        A(static_cast<Eigen::Index>(pos), col) = d;
      }
    } else if (info.role == ParamRole::Phi) {
      const double phi = theta[col];
      const double h = 1e-6 * std::max(1.0, std::abs(phi));
      Eigen::VectorXd up = theta;
      Eigen::VectorXd down = theta;
      double span = 2.0 * h;
      // Stay strictly inside (-1, 1); fall back to a one-sided difference.
      if (std::abs(phi) + h >= 1.0) {
        if (phi > 0) {
          up[col] = phi;
          down[col] = phi - h;
        } else {
          up[col] = phi + h;
          down[col] = phi;
        }
        span = h;
      } else {
        up[col] = phi + h;
        down[col] = phi - h;
      }
      A.col(col) = (linear_design(model, up, levels) * up - linear_design(model, down, levels) * down) / span;
    }
  }
  return A;
}

}  // namespace wavecov
