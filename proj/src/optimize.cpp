#include "wavecov/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "wavecov/error.hpp"

namespace wavecov {

OptimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const NelderMeadOptions& options) {
  const Eigen::Index n = x0.size();
  if (n == 0) throw ValidationError("nelder_mead: empty parameter vector");
  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;
  const double gamma = 0.75 - 1.0 / (2.0 * dn);
  const double delta = 1.0 - 1.0 / dn;

  OptimizeResult res;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  values[0] = eval(x0);
  if (!std::isfinite(values[0])) throw NumericalError("nelder_mead: objective is not finite at the start point");
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd& v = simplex[static_cast<std::size_t>(k + 1)];
    v[k] += options.initial_step;
    values[static_cast<std::size_t>(k + 1)] = eval(v);
    if (!std::isfinite(values[static_cast<std::size_t>(k + 1)])) {
      v[k] = x0[k] - options.initial_step;
      values[static_cast<std::size_t>(k + 1)] = eval(v);
    }
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(n + 1));
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<Eigen::VectorXd> s2;
    std::vector<double> v2;
    for (std::size_t i : order) {
      s2.push_back(simplex[i]);
      v2.push_back(values[i]);
    }
    simplex.swap(s2);
    values.swap(v2);
  };

  const std::size_t last = static_cast<std::size_t>(n);
  sort_simplex();
  while (res.iterations < options.max_iterations) {
    const double spread = values[last] - values[0];
    double diameter = 0.0;
    for (std::size_t i = 1; i <= last; ++i) diameter = std::max(diameter, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
    if ((std::isfinite(spread) && spread <= options.ftol * std::abs(values[0])) || diameter <= options.xtol) {
      res.converged = true;
      break;
    }
    ++res.iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < last; ++i) centroid += simplex[i];
    centroid /= dn;

    const Eigen::VectorXd xr = centroid + alpha * (centroid - simplex[last]);
    const double fr = eval(xr);
    bool shrink = false;
    if (fr < values[0]) {
      const Eigen::VectorXd xe = centroid + beta * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[last] = xe;
        values[last] = fe;
      } else {
        simplex[last] = xr;
        values[last] = fr;
      }
    } else if (fr < values[last - 1]) {
      simplex[last] = xr;
      values[last] = fr;
    } else if (fr < values[last]) {
      const Eigen::VectorXd xc = centroid + gamma * (xr - centroid);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[last] = xc;
        values[last] = fc;
      } else {
        shrink = true;
      }
    } else {
      const Eigen::VectorXd xc = centroid + gamma * (simplex[last] - centroid);
      const double fc = eval(xc);
      if (fc < values[last]) {
        simplex[last] = xc;
        values[last] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t i = 1; i <= last; ++i) {
        simplex[i] = simplex[0] + delta * (simplex[i] - simplex[0]);
        values[i] = eval(simplex[i]);
      }
    }
    sort_simplex();
  }
  res.x = simplex[0];
  res.value = values[0];
  return res;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, std::size_t max_iterations) {
  const Eigen::Index n = A.cols();
  if (A.rows() != b.size()) throw ValidationError("nnls: dimension mismatch");
  if (max_iterations == 0) max_iterations = static_cast<std::size_t>(3 * n + 10);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()) * std::max(1.0, b.cwiseAbs().maxCoeff()) *
                     static_cast<double>(std::max<Eigen::Index>(A.rows(), n));

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (passive[static_cast<std::size_t>(k)]) idx.push_back(k);
    }
    z = Eigen::VectorXd::Zero(n);
    if (idx.empty()) return;
    Eigen::MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(static_cast<Eigen::Index>(c)) = A.col(idx[c]);
    const Eigen::VectorXd sol = Ap.colPivHouseholderQr().solve(b);
    for (std::size_t c = 0; c < idx.size(); ++c) z[idx[c]] = sol[static_cast<Eigen::Index>(c)];
  };

  for (std::size_t outer = 0; outer < max_iterations; ++outer) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!passive[static_cast<std::size_t>(k)] && w[k] > wmax) {
        wmax = w[k];
        best = k;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    Eigen::VectorXd z;
    for (std::size_t inner = 0; inner < max_iterations; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (passive[static_cast<std::size_t>(k)] && z[k] <= 0.0) feasible = false;
      }
      if (feasible) break;
      double step = 1.0;
      Eigen::Index blocking = -1;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (passive[static_cast<std::size_t>(k)] && z[k] <= 0.0) {
          const double s = x[k] / (x[k] - z[k]);
          if (blocking < 0 || s < step) {
            step = s;
            blocking = k;
          }
        }
      }
      x += step * (z - x);
      x[blocking] = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (passive[static_cast<std::size_t>(k)] && x[k] <= 0.0) {
          passive[static_cast<std::size_t>(k)] = false;
          x[k] = 0.0;
        }
      }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      if (passive[static_cast<std::size_t>(k)]) x[k] = std::max(z[k], 0.0);
    }
  }
  return x;
}

}  // namespace wavecov
