#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "wavecov/cli/dataset.hpp"
#include "wavecov/estimator.hpp"

namespace wavecov::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kNumerical = 3, kIo = 4 };

/// Exit code for an exception from the library or the commands.
int exit_code(const std::exception& e);

/// Sets the OpenMP thread count when positive.
void set_threads(int threads);

struct SimulateArgs {
  std::filesystem::path model;
  std::size_t samples = 0;
  std::size_t replicates = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

/// Replicate r (1-based) goes to <stem>_r<r><ext> when there is more than one.
std::filesystem::path replicate_path(const std::filesystem::path& out, std::size_t r, std::size_t count);

struct MomentsArgs {
  std::filesystem::path data;
  IngestOptions ingest;
  std::optional<int> levels;
  double alpha = 0.05;
  HacOptions hac;
  std::filesystem::path out;
};

struct FitArgs {
  std::filesystem::path data;
  std::filesystem::path model;
  IngestOptions ingest;
  std::optional<int> levels;
  double alpha = 0.05;
  Weighting weighting = Weighting::Diagonal;
  HacOptions hac;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  /// Moment table with implied moments; <out stem>_moments.csv when unset.
  std::optional<std::filesystem::path> table;
};

struct TestDepArgs {
  std::filesystem::path data;
  std::filesystem::path model;
  IngestOptions ingest;
  std::optional<int> levels;
  Weighting weighting = Weighting::Diagonal;
  HacOptions hac;
  std::size_t bootstrap = 99;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

/// Each command writes its outputs and returns an exit code; failures are
/// thrown. `log` receives one-line progress notes.
int cmd_simulate(const SimulateArgs& args, std::ostream& log);
int cmd_moments(const MomentsArgs& args, std::ostream& log);
int cmd_fit(const FitArgs& args, std::ostream& log);
int cmd_testdep(const TestDepArgs& args, std::ostream& log);

}  // namespace wavecov::cli
