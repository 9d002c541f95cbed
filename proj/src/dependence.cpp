#include <algorithm>
#include <exception>

#include "wavecov/error.hpp"
#include "wavecov/estimator.hpp"
#include "wavecov/simulate.hpp"
#include "wavecov/wavelet.hpp"

namespace wavecov {
namespace {

struct PairFit {
  double stat = 0.0;
  bool converged = false;
  FitResult null_fit;
  FitResult full_fit;
};

// Fit the null model, then the full model starting from the null solution
// with cross parameters at zero, both against the same weights.
PairFit fit_pair(const Model& full, const Model& null, const std::vector<std::size_t>& null_to_full,
                 const MomentData& data, const FitOptions& options) {
  PairFit out;
  out.null_fit = fit_moments(null, data, options);
  Eigen::VectorXd embedded = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(full.size()));
  for (std::size_t k = 0; k < null_to_full.size(); ++k) {
    embedded[static_cast<Eigen::Index>(null_to_full[k])] = out.null_fit.theta[static_cast<Eigen::Index>(k)];
  }
  FitOptions o = options;
  o.start = embedded;
  out.full_fit = fit_moments(full, data, o);
  out.stat = std::max(0.0, out.null_fit.objective - out.full_fit.objective);
  out.converged = out.null_fit.diagnostics.converged && out.full_fit.diagnostics.converged;
  return out;
}

}  // namespace

DepTestResult dependence_test(const MultiSignal& x, const ModelSpec& spec_full, const DependenceTestOptions& options) {
  if (options.bootstrap < 19) throw ValidationError("bootstrap count must be at least 19");
  const Model full(spec_full);
  if (full.cross_params().empty()) throw ValidationError("the model has no cross parameter to test");
  if (full.channels() != static_cast<std::size_t>(x.cols())) {
    throw ValidationError("model has " + std::to_string(full.channels()) + " channels but the data has " +
                          std::to_string(x.cols()));
  }
  const SubModel null_sub = null_model(full);
  const Model null(null_sub.spec);

  FitOptions fo = options.fit;
  fo.standard_errors = false;
  fo.start.reset();
  const std::size_t T = static_cast<std::size_t>(x.rows());
  const int J = fo.levels.value_or(max_level(T));
  fo.levels = J;
  HacOptions hac = fo.hac;
  hac.diagonal_only = fo.weighting == Weighting::Diagonal;

  const PairFit observed = fit_pair(full, null, null_sub.source_index, compute_moments(x, J, hac), fo);

  DepTestResult out;
  out.stat = observed.stat;
  out.theta_null = observed.null_fit.theta;
  out.theta_full = observed.full_fit.theta;
  out.objective_null = observed.null_fit.objective;
  out.objective_full = observed.full_fit.objective;
  out.bootstrap = options.bootstrap;

  const SimConfig base{null, out.theta_null, T, options.seed, 0};
  const long B = static_cast<long>(options.bootstrap);
  std::vector<double> stats(options.bootstrap, 0.0);
  std::vector<char> kept(options.bootstrap, 0);
  std::vector<std::exception_ptr> fatal(options.bootstrap);

#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < B; ++b) {
    const std::size_t i = static_cast<std::size_t>(b);
    try {
      SimConfig cfg = base;
      cfg.replicate = static_cast<std::uint64_t>(b);
      const MultiSignal sim = simulate(cfg);
      FitOptions rep = fo;
      rep.seed = options.seed + static_cast<std::uint64_t>(b) + 1;
      const PairFit pf = fit_pair(full, null, null_sub.source_index, compute_moments(sim, J, hac), rep);
      if (pf.converged) {
        stats[i] = pf.stat;
        kept[i] = 1;
      }
    } catch (const NumericalError&) {
      // Dropped replicate.
    } catch (...) {
      fatal[i] = std::current_exception();
    }
  }
  for (const auto& f : fatal) {
    if (f) std::rethrow_exception(f);
  }

  std::size_t exceed = 0;
  for (std::size_t i = 0; i < options.bootstrap; ++i) {
    if (!kept[i]) {
      ++out.dropped;
      continue;
    }
    out.boot_dist.push_back(stats[i]);
    if (stats[i] >= out.stat) ++exceed;
  }
  if (10 * out.dropped > options.bootstrap) {
    throw NumericalError(std::to_string(out.dropped) + " of " + std::to_string(options.bootstrap) +
                         " bootstrap refits failed to converge (limit 10%)");
  }
  out.p_value = static_cast<double>(1 + exceed) / static_cast<double>(out.boot_dist.size() + 1);
  return out;
}

}  // namespace wavecov
