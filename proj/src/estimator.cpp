#include "wavecov/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "wavecov/error.hpp"
#include "wavecov/optimize.hpp"
#include "wavecov/theoretical.hpp"
#include "wavecov/wavelet.hpp"

namespace wavecov {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRestartSpread = 0.3;
constexpr std::size_t kRefinedGridPoints = 6;

struct Problem {
  const Model& model;
  const MomentVector& nu;
  const Eigen::MatrixXd& weight;
  bool diagonal = false;

  double operator()(const Eigen::VectorXd& theta) const {
    if (model.domain_error(theta)) return kInf;
    const int J = nu.layout.levels();
    const Eigen::VectorXd r = nu.values - linear_design(model, theta, J) * theta - drift_moments(model, theta, J);
    const double q = diagonal ? (r.array().square() * weight.diagonal().array()).sum() : r.dot(weight * r);
    return std::isfinite(q) ? q : kInf;
  }
};

bool is_diagonal(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd off = m - Eigen::MatrixXd(m.diagonal().asDiagonal());
  return off.isZero(0.0);
}

struct SearchResult {
  Eigen::VectorXd theta;
  double value = kInf;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  int restarts = 0;
  bool converged = false;
  bool closed_form = false;
};

// Weighted least squares for models linear in theta, with columns rescaled
// so that very different parameter magnitudes do not spoil the solve.
std::optional<Eigen::VectorXd> linear_solution(const Model& model, const MomentVector& nu, const Eigen::MatrixXd& W,
                                               const Eigen::VectorXd& any_theta) {
  const Eigen::MatrixXd A = linear_design(model, any_theta, nu.layout.levels());
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < scale.size(); ++k) {
    if (!(scale[k] > 0.0)) return std::nullopt;
  }
  const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd H = As.transpose() * W * As;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd y = ldlt.solve(As.transpose() * W * nu.values);
  if (!y.allFinite()) return std::nullopt;
  return Eigen::VectorXd(y.cwiseQuotient(scale));
}

SearchResult search(const Problem& problem, const Eigen::VectorXd& start, const FitOptions& options) {
  const Model& model = problem.model;
  SearchResult best;

  if (options.linear_shortcut && model.is_linear()) {
    if (auto sol = linear_solution(model, problem.nu, problem.weight, start)) {
      const double v = problem(*sol);
      if (std::isfinite(v)) {
        best.theta = *sol;
        best.value = v;
        best.converged = true;
        best.closed_form = true;
        return best;
      }
    }
  }

  const Eigen::Index p = static_cast<Eigen::Index>(model.size());
  // Map between the search coordinates and theta.
  Eigen::VectorXd raw_scale = Eigen::VectorXd::Ones(p);
  if (options.space == SearchSpace::Raw) {
    double fallback = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) fallback = std::max(fallback, std::abs(start[k]));
    for (Eigen::Index k = 0; k < p; ++k) {
      raw_scale[k] = start[k] != 0.0 ? std::abs(start[k]) : 1e-3 * (fallback > 0.0 ? fallback : 1.0);
    }
  }
  auto to_theta = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return options.space == SearchSpace::Transformed ? model.from_unconstrained(u) : Eigen::VectorXd(u.cwiseProduct(raw_scale));
  };
  auto from_theta = [&](const Eigen::VectorXd& theta) -> Eigen::VectorXd {
    return options.space == SearchSpace::Transformed ? model.to_unconstrained(theta)
                                                     : Eigen::VectorXd(theta.cwiseQuotient(raw_scale));
  };
  const Objective f = [&](const Eigen::VectorXd& u) { return problem(to_theta(u)); };

  NelderMeadOptions nm;
  nm.ftol = options.tolerance;
  nm.max_iterations = options.iterations_per_param * static_cast<std::size_t>(p);

  Eigen::VectorXd best_u = from_theta(start);
  best.value = f(best_u);
  if (!std::isfinite(best.value)) throw NumericalError("objective is not finite at the starting point");

  auto run = [&](const Eigen::VectorXd& u0) {
    const OptimizeResult r = nelder_mead(f, u0, nm);
    best.iterations += r.iterations;
    best.evaluations += r.evaluations;
    if (r.value < best.value || (r.value == best.value && !best.converged)) {
      best.value = r.value;
      best_u = r.x;
      best.converged = r.converged;
    }
  };

  run(best_u);
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, kRestartSpread);
  for (int r = 0; r < options.restarts; ++r) {
    Eigen::VectorXd u0 = best_u;
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
      u0 = best_u;
      for (Eigen::Index k = 0; k < p; ++k) u0[k] += gauss(rng);
      ok = std::isfinite(f(u0));
    }
    if (!ok) continue;
    ++best.restarts;
    run(u0);
  }
  best.theta = to_theta(best_u);
  return best;
}

MomentData channel_moments(const MomentData& data, std::size_t channel) {
  const MomentLayout& layout = data.nu.layout;
  const int J = layout.levels();
  MomentData out{MomentVector{MomentLayout(1, J), Eigen::VectorXd(J)}, {}, data.samples};
  out.cov.support = data.cov.support;
  out.cov.lags = data.cov.lags;
  out.cov.diagonal_only = data.cov.diagonal_only;
  out.cov.matrix.resize(J, J);
  for (int j = 1; j <= J; ++j) {
    const Eigen::Index a = static_cast<Eigen::Index>(layout.position({channel, channel, j}));
    out.nu.values[j - 1] = data.nu.values[a];
    for (int k = 1; k <= J; ++k) {
      const Eigen::Index b = static_cast<Eigen::Index>(layout.position({channel, channel, k}));
      out.cov.matrix(j - 1, k - 1) = data.cov.matrix(a, b);
    }
  }
  return out;
}

// Univariate coefficient of a block's single linear unknown at level j; for
// drift the unknown is omega^2.
double unit_coefficient(BlockKind kind, double phi, int level) {
  const double tau = std::ldexp(1.0, level);
  switch (kind) {
    case BlockKind::WhiteNoise: return 1.0 / tau;
    case BlockKind::RandomWalk: return (tau * tau + 2.0) / (12.0 * tau);
    case BlockKind::Quantization: return 6.0 / (tau * tau);
    case BlockKind::Drift: return tau * tau / 16.0;
    case BlockKind::AutoRegressive: return haar_ar1_factor(phi, phi, level);
  }
  return 0.0;
}

std::vector<double> phi_grid(int levels) {
  std::vector<double> g{0.1, 0.3};
  for (double s = 1.0; s <= levels + 2 + 1e-9; s += 0.5) g.push_back(1.0 - std::exp2(-s));
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

constexpr std::size_t kMaxAssignments = 5040;

// The per-channel fits identify AR1 components but not which block each
// belongs to. Try every per-channel assignment of components to AR1 blocks,
// profile the cross parameters (linear given phi) by weighted least squares
// with correlations capped at 0.95, and keep the assignment with the lowest
// objective. Cross parameters are returned at zero.
Eigen::VectorXd assign_ar_components(const Model& model, const MomentData& data, const Eigen::VectorXd& theta) {
  const auto& params = model.params();
  const std::vector<std::size_t> cross = model.cross_params();
  if (cross.empty()) return theta;
  struct Slot {
    std::size_t phi = 0;
    std::size_t var = 0;
  };
  std::vector<std::vector<Slot>> slots(model.channels());
  for (std::size_t k = 0; k < model.spec().blocks.size(); ++k) {
    if (model.spec().blocks[k].kind != BlockKind::AutoRegressive) continue;
    for (std::size_t c : model.spec().blocks[k].channels) {
      Slot s;
      for (std::size_t p = model.offset(k); p < model.offset(k) + model.block_size(k); ++p) {
        if (params[p].first != c || params[p].second != c) continue;
        if (params[p].role == ParamRole::Phi) s.phi = p;
        if (params[p].role == ParamRole::Variance) s.var = p;
      }
      slots[c].push_back(s);
    }
  }
  std::size_t combos = 1;
  for (const auto& sl : slots) {
    for (std::size_t n = 2; n <= sl.size(); ++n) combos *= n;
    if (combos > kMaxAssignments) return theta;
  }
  if (combos == 1) return theta;

  const int J = data.nu.layout.levels();
  const Eigen::VectorXd w = data.cov.matrix.diagonal().cwiseInverse();
  std::vector<std::vector<std::size_t>> perm(slots.size());
  for (std::size_t c = 0; c < slots.size(); ++c) {
    perm[c].resize(slots[c].size());
    std::iota(perm[c].begin(), perm[c].end(), std::size_t{0});
  }

  auto build = [&] {
    Eigen::VectorXd t = theta;
    for (std::size_t c = 0; c < slots.size(); ++c) {
      for (std::size_t s = 0; s < slots[c].size(); ++s) {
        const Slot& to = slots[c][s];
        const Slot& from = slots[c][perm[c][s]];
        t[static_cast<Eigen::Index>(to.phi)] = theta[static_cast<Eigen::Index>(from.phi)];
        t[static_cast<Eigen::Index>(to.var)] = theta[static_cast<Eigen::Index>(from.var)];
      }
    }
    for (std::size_t p : cross) t[static_cast<Eigen::Index>(p)] = 0.0;
    return t;
  };
  auto profiled_value = [&](const Eigen::VectorXd& t0) {
    if (model.domain_error(t0)) return kInf;
    const Eigen::MatrixXd D = linear_design(model, t0, J);
    const Eigen::VectorXd r = data.nu.values - D * t0 - drift_moments(model, t0, J);
    Eigen::MatrixXd A(D.rows(), static_cast<Eigen::Index>(cross.size()));
    for (std::size_t q = 0; q < cross.size(); ++q) A.col(static_cast<Eigen::Index>(q)) = D.col(static_cast<Eigen::Index>(cross[q]));
    const Eigen::VectorXd sw = w.cwiseSqrt();
    Eigen::VectorXd c = (sw.asDiagonal() * A).colPivHouseholderQr().solve(sw.cwiseProduct(r));
    Eigen::VectorXd t = t0;
    for (std::size_t q = 0; q < cross.size(); ++q) {
      const std::size_t p = cross[q];
      std::size_t va = 0, vb = 0;
      for (std::size_t v = model.offset(params[p].block); v < model.offset(params[p].block) + model.block_size(params[p].block); ++v) {
        if (params[v].role != ParamRole::Variance) continue;
        if (params[v].first == params[p].first) va = v;
        if (params[v].first == params[p].second) vb = v;
      }
      const double bound = 0.95 * std::sqrt(t0[static_cast<Eigen::Index>(va)] * t0[static_cast<Eigen::Index>(vb)]);
      const double x = c[static_cast<Eigen::Index>(q)];
      t[static_cast<Eigen::Index>(p)] = std::isfinite(x) ? std::clamp(x, -bound, bound) : 0.0;
    }
    for (int shrink = 0; shrink < 20 && model.domain_error(t); ++shrink) {
      for (std::size_t p : cross) t[static_cast<Eigen::Index>(p)] *= 0.5;
    }
    const Eigen::VectorXd res = data.nu.values - linear_design(model, t, J) * t - drift_moments(model, t, J);
    const double q = (res.array().square() * w.array()).sum();
    return std::isfinite(q) ? q : kInf;
  };

  Eigen::VectorXd best = theta;
  double best_value = kInf;
  // Odometer over the per-channel permutations.
  while (true) {
    const Eigen::VectorXd t = build();
    const double v = profiled_value(t);
    if (v < best_value) {
      best_value = v;
      best = t;
    }
    std::size_t c = 0;
    while (c < perm.size() && !std::next_permutation(perm[c].begin(), perm[c].end())) ++c;
    if (c == perm.size()) break;
  }
  return best;
}

}  // namespace

MomentData compute_moments(const MultiSignal& x, int levels, const HacOptions& hac) {
  const WaveletCoefficients coeffs(x, levels);
  return {moment_vector(coeffs), moment_covariance(coeffs, hac), static_cast<std::size_t>(x.rows())};
}

Eigen::MatrixXd weight_matrix(const MomentCovariance& cov, Weighting weighting) {
  const Eigen::VectorXd v = cov.matrix.diagonal();
  if (weighting == Weighting::Diagonal) {
    if (!(v.minCoeff() > 0.0)) throw NumericalError("moment covariance has a non-positive diagonal entry");
    return Eigen::MatrixXd(v.cwiseInverse().asDiagonal());
  }
  if (cov.diagonal_only) throw ValidationError("full weighting needs the full moment covariance");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov.matrix);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw NumericalError("moment covariance is not invertible");
  }
  Eigen::MatrixXd W = ldlt.solve(Eigen::MatrixXd::Identity(cov.matrix.rows(), cov.matrix.cols()));
  return 0.5 * (W + W.transpose());
}

double objective(const Model& model, const Eigen::VectorXd& theta, const MomentVector& nu, const Eigen::MatrixXd& weight) {
  return Problem{model, nu, weight, is_diagonal(weight)}(theta);
}

Eigen::VectorXd grid_start(const Model& model, const Eigen::VectorXd& wv, const Eigen::VectorXd& weights) {
  if (model.channels() != 1) throw ValidationError("grid_start expects a one-channel model");
  const int J = static_cast<int>(wv.size());
  const auto& blocks = model.spec().blocks;
  const std::size_t K = blocks.size();
  std::vector<std::size_t> ar;
  for (std::size_t k = 0; k < K; ++k) {
    if (blocks[k].kind == BlockKind::AutoRegressive) ar.push_back(k);
  }
  const std::vector<double> grid = phi_grid(J);
  if (ar.size() > grid.size()) throw ValidationError("too many AR1 blocks on one channel for the start grid");

  const Eigen::VectorXd sw = weights.cwiseSqrt();
  const Eigen::VectorXd y = wv.cwiseProduct(sw);

  struct Candidate {
    double rss = kInf;
    std::vector<double> phi;
    Eigen::VectorXd coef;
    Eigen::MatrixXd design;
  };
  auto evaluate = [&](const std::vector<double>& phi) {
    Candidate c{kInf, phi, {}, Eigen::MatrixXd(J, static_cast<Eigen::Index>(K))};
    for (std::size_t k = 0; k < K; ++k) {
      for (int j = 1; j <= J; ++j) c.design(j - 1, static_cast<Eigen::Index>(k)) = unit_coefficient(blocks[k].kind, phi[k], j);
    }
    const Eigen::MatrixXd Xw = sw.asDiagonal() * c.design;
    const Eigen::VectorXd scale = Xw.colwise().norm().transpose();
    c.coef = nnls(Xw * scale.cwiseInverse().asDiagonal(), y).cwiseQuotient(scale);
    c.rss = (y - Xw * c.coef).squaredNorm();
    if (!std::isfinite(c.rss)) c.rss = kInf;
    return c;
  };

  // Strictly ascending coefficients across the AR1 blocks.
  std::vector<Candidate> candidates;
  std::vector<double> phi(K, 0.0);
  std::vector<std::size_t> pick(ar.size());
  auto recurse = [&](auto&& self, std::size_t depth, std::size_t from) -> void {
    if (depth == ar.size()) {
      for (std::size_t d = 0; d < ar.size(); ++d) phi[ar[d]] = grid[pick[d]];
      candidates.push_back(evaluate(phi));
      return;
    }
    for (std::size_t g = from; g + (ar.size() - depth) <= grid.size(); ++g) {
      pick[depth] = g;
      self(self, depth + 1, g + 1);
    }
  };
  recurse(recurse, 0, 0);
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) { return a.rss < b.rss; });

  // The grid is coarse where fine levels are most precise, so grid points
  // are refined over the coefficients alone, the other parameters profiled
  // out by NNLS. Refined are the best few overall and, for every block and
  // grid value, the best point giving the block that value.
  Candidate best = candidates.front();
  if (!ar.empty()) {
    std::vector<std::size_t> seeds;
    for (std::size_t c = 0; c < std::min<std::size_t>(kRefinedGridPoints, candidates.size()); ++c) seeds.push_back(c);
    for (std::size_t d = 0; d < ar.size(); ++d) {
      for (double g : grid) {
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          if (candidates[c].phi[ar[d]] != g) continue;
          if (std::find(seeds.begin(), seeds.end(), c) == seeds.end()) seeds.push_back(c);
          break;
        }
      }
    }
    const Objective f = [&](const Eigen::VectorXd& u) {
      std::vector<double> p = candidates.front().phi;
      for (std::size_t d = 0; d < ar.size(); ++d) p[ar[d]] = std::tanh(u[static_cast<Eigen::Index>(d)]);
      for (std::size_t d = 0; d < ar.size(); ++d) {
        if (!(std::abs(p[ar[d]]) < 1.0) || p[ar[d]] == 0.0) return kInf;
      }
      return evaluate(p).rss;
    };
    NelderMeadOptions nm;
    nm.max_iterations = 400 * ar.size();
    for (std::size_t c : seeds) {
      Eigen::VectorXd u0(static_cast<Eigen::Index>(ar.size()));
      for (std::size_t d = 0; d < ar.size(); ++d) u0[static_cast<Eigen::Index>(d)] = std::atanh(candidates[c].phi[ar[d]]);
      const OptimizeResult r = nelder_mead(f, u0, nm);
      if (!(r.value < best.rss)) continue;
      std::vector<double> p = candidates[c].phi;
      for (std::size_t d = 0; d < ar.size(); ++d) p[ar[d]] = std::tanh(r.x[static_cast<Eigen::Index>(d)]);
      Candidate refined = evaluate(p);
      if (refined.rss < best.rss) best = std::move(refined);
    }
  }
  const std::vector<double>& best_phi = best.phi;
  const Eigen::VectorXd& best_coef = best.coef;
  const Eigen::MatrixXd& best_design = best.design;

  Eigen::VectorXd theta(static_cast<Eigen::Index>(model.size()));
  for (std::size_t k = 0; k < K; ++k) {
    double c = best_coef[static_cast<Eigen::Index>(k)];
    if (!(c > 0.0)) {
      double floor = kInf;
      for (int j = 0; j < J; ++j) {
        const double a = best_design(j, static_cast<Eigen::Index>(k));
        if (a > 0.0 && wv[j] > 0.0) floor = std::min(floor, wv[j] / a);
      }
      c = std::isfinite(floor) ? 0.01 * floor : 1e-300;
    }
    const Eigen::Index off = static_cast<Eigen::Index>(model.offset(k));
    switch (blocks[k].kind) {
      case BlockKind::AutoRegressive:
        theta[off] = best_phi[k];
        theta[off + 1] = c;
        break;
      case BlockKind::Drift: theta[off] = std::sqrt(c); break;
      default: theta[off] = c; break;
    }
  }
  return theta;
}

Eigen::VectorXd starting_values(const Model& model, const MomentData& data, const FitOptions& options) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size()));
  for (std::size_t c = 0; c < model.channels(); ++c) {
    const SubModel sub = restrict_to_channel(model, c);
    const Model m1(sub.spec);
    const MomentData d1 = channel_moments(data, c);
    const Eigen::VectorXd w = d1.cov.matrix.diagonal().cwiseInverse();
    Eigen::VectorXd t1 = grid_start(m1, d1.nu.values, w);
    FitOptions o = options;
    o.start = t1;
    o.standard_errors = false;
    o.weighting = Weighting::Diagonal;
    try {
      t1 = fit_moments(m1, d1, o).theta;
    } catch (const NumericalError&) {
      // Keep the grid values.
    }
    for (std::size_t k = 0; k < sub.source_index.size(); ++k) {
      theta[static_cast<Eigen::Index>(sub.source_index[k])] = t1[static_cast<Eigen::Index>(k)];
    }
  }
  return assign_ar_components(model, data, theta);
}

FitResult fit_moments(const Model& model, const MomentData& data, const FitOptions& options) {
  const ValidationReport report = validate(model.spec());
  if (!report.ok()) throw ValidationError("invalid model: " + report.summary());
  if (data.nu.layout.channels() != model.channels()) {
    throw ValidationError("model has " + std::to_string(model.channels()) + " channels but the data has " +
                          std::to_string(data.nu.layout.channels()));
  }
  const int J = data.nu.layout.levels();

  FitResult out;
  out.warnings = report.warnings;
  out.empirical = data.nu;
  out.moment_cov = data.cov;
  out.samples = data.samples;
  out.weight = weight_matrix(data.cov, options.weighting);

  const Eigen::VectorXd start = options.start ? *options.start : starting_values(model, data, options);
  if (auto err = model.domain_error(start)) throw ValidationError("starting point outside the parameter space: " + *err);

  const Problem problem{model, data.nu, out.weight, options.weighting == Weighting::Diagonal};
  const SearchResult s = search(problem, start, options);
  out.theta = model.canonicalize(s.theta);
  out.objective = problem(out.theta);
  out.implied = theoretical_vector(model, out.theta, J);
  out.diagnostics = {s.iterations, s.evaluations, s.restarts, s.converged, s.closed_form, ""};
  if (!s.converged) {
    out.diagnostics.message = "Nelder-Mead reached its iteration cap";
    out.warnings.push_back("optimizer did not converge");
  }

  if (options.standard_errors) {
    if (data.cov.diagonal_only) throw ValidationError("standard errors need the full moment covariance");
    const Eigen::MatrixXd A = jacobian(model, out.theta, J);
    const Eigen::MatrixXd WA = out.weight * A;
    const Eigen::MatrixXd H = A.transpose() * WA;
    const Eigen::VectorXd d = H.diagonal();
    if (!(d.minCoeff() > 0.0)) {
      throw NumericalError("A'WA is singular: some parameter does not affect any moment");
    }
    const Eigen::VectorXd s_inv = d.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd Hs = s_inv.asDiagonal() * H * s_inv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Hs);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 1e-13 * hi)) {
      throw NumericalError("A'WA is singular (scaled condition " + std::to_string(hi / std::max(lo, 0.0)) +
                           "): the moments do not identify the parameters");
    }
    const Eigen::MatrixXd Hs_inv =
        eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::MatrixXd H_inv = s_inv.asDiagonal() * Hs_inv * s_inv.asDiagonal();
    const Eigen::MatrixXd B = WA * H_inv;
    Eigen::MatrixXd xi = B.transpose() * data.cov.matrix * B;
    xi = (0.5 * (xi + xi.transpose())).eval();
    out.covariance = xi;
    out.asymptotic = static_cast<double>(data.samples) * xi;
    out.std_errors = xi.diagonal().cwiseMax(0.0).cwiseSqrt();
  }
  return out;
}

FitResult fit(const MultiSignal& x, const ModelSpec& spec, const FitOptions& options) {
  const Model model(spec);
  if (model.channels() != static_cast<std::size_t>(x.cols())) {
    throw ValidationError("model has " + std::to_string(model.channels()) + " channels but the data has " +
                          std::to_string(x.cols()));
  }
  const int J = options.levels.value_or(max_level(static_cast<std::size_t>(x.rows())));
  HacOptions hac = options.hac;
  if (!options.standard_errors && options.weighting == Weighting::Diagonal) hac.diagonal_only = true;
  return fit_moments(model, compute_moments(x, J, hac), options);
}

FitResult univariate_fit(std::span<const double> x, const ModelSpec& spec, const FitOptions& options) {
  if (spec.channels != 1) throw ValidationError("univariate_fit expects a one-channel model");
  const MultiSignal m = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return fit(m, spec, options);
}

}  // namespace wavecov
