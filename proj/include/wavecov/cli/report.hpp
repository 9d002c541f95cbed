#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavecov/estimator.hpp"
#include "wavecov/models.hpp"
#include "wavecov/moments.hpp"

namespace wavecov::cli {

/// Columns i, i_prime, j, tau, gamma_hat, sign, abs_gamma, ci_lo, ci_hi
/// (channels 1-based), then `implied` and one implied_<block> column per
/// block contribution when given. sign * abs_gamma == gamma_hat, so the
/// signed-log plotting convention is a direct column mapping.
std::string moment_table(const MomentVector& nu, const std::vector<Interval>& ci, const MomentVector* implied = nullptr,
                         const std::vector<std::string>& block_names = {},
                         const std::vector<MomentVector>& blocks = {});

/// Run settings echoed into reports.
struct ReportContext {
  std::string data_path;
  std::vector<std::string> channel_names;
  std::optional<double> rate;
  std::size_t samples = 0;
  int levels = 0;
  Weighting weighting = Weighting::Diagonal;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  HacOptions hac;
};

std::string fit_report(const Model& model, const FitResult& fit, const ReportContext& ctx);

std::string dependence_report(const Model& full, const Model& null, const DepTestResult& test, const ReportContext& ctx);

}  // namespace wavecov::cli
