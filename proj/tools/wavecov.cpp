// wavecov: simulate, moments, fit and test-dep from the command line.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <sstream>

#include "wavecov/cli/commands.hpp"
#include "wavecov/error.hpp"

namespace {

using namespace wavecov;
using namespace wavecov::cli;

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  for (std::string t; std::getline(ss, t, ',');) out.push_back(t);
  return out;
}

struct Shared {
  std::string data;
  std::string model;
  std::string out;
  std::string columns;
  bool demean = false;
  int levels = 0;
  double alpha = 0.05;
  std::string weighting = "diag";
  std::size_t bootstrap = 99;
  std::uint64_t seed = 0;
  std::size_t lag = 0;
};

void add_data(CLI::App* cmd, Shared& s) {
  cmd->add_option("data", s.data, "input CSV with a header row")->required();
  cmd->add_flag("--demean", s.demean, "remove each channel's mean");
  cmd->add_option("--columns", s.columns, "comma-separated column names to keep");
  cmd->add_option("--levels", s.levels, "number of wavelet levels (default: largest usable)")->check(CLI::PositiveNumber);
  cmd->add_option("--lag", s.lag, "base Bartlett truncation lag (default: floor(T^(1/3)))")->check(CLI::PositiveNumber);
}

void add_weighting(CLI::App* cmd, Shared& s) {
  cmd->add_option("--weighting", s.weighting, "weighting matrix")
      ->check(CLI::IsMember({"diag", "full"}))
      ->capture_default_str();
}

IngestOptions ingest_of(const Shared& s) { return {s.demean, s.columns.empty() ? std::vector<std::string>{} : split_names(s.columns)}; }

std::optional<int> levels_of(const Shared& s) { return s.levels > 0 ? std::optional<int>(s.levels) : std::nullopt; }

HacOptions hac_of(const Shared& s) {
  HacOptions h;
  if (s.lag > 0) h.lag = s.lag;
  return h;
}

Weighting weighting_of(const Shared& s) { return s.weighting == "full" ? Weighting::Full : Weighting::Diagonal; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent error-model estimation from wavelet cross-covariances"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: OpenMP default)")->check(CLI::NonNegativeNumber);

  Shared s;
  std::size_t samples = 0;
  std::size_t replicates = 1;
  std::string table;

  auto* sim = app.add_subcommand("simulate", "simulate a fully specified model to CSV");
  sim->add_option("model", s.model, "model file with every value given")->required();
  sim->add_option("-T,--samples", samples, "samples per replicate")->required();
  sim->add_option("-R,--replicates", replicates, "replicate count; files get _r<k> suffixes when > 1")->capture_default_str();
  sim->add_option("--seed", s.seed, "random seed")->capture_default_str();
  sim->add_option("-o,--out", s.out, "output CSV")->required();

  auto* mom = app.add_subcommand("moments", "empirical wavelet cross-covariances with confidence intervals");
  add_data(mom, s);
  mom->add_option("--alpha", s.alpha, "significance level of the intervals")->capture_default_str();
  mom->add_option("-o,--out", s.out, "output CSV")->required();

  auto* fit = app.add_subcommand("fit", "fit a latent model");
  add_data(fit, s);
  fit->add_option("model", s.model, "model file")->required();
  add_weighting(fit, s);
  fit->add_option("--alpha", s.alpha, "significance level of the intervals")->capture_default_str();
  fit->add_option("--seed", s.seed, "seed for optimizer restarts")->capture_default_str();
  fit->add_option("-o,--out", s.out, "JSON report")->required();
  fit->add_option("--table", table, "moment table with implied values (default: <report stem>_moments.csv)");

  auto* dep = app.add_subcommand("test-dep", "bootstrap test of cross-channel dependence");
  add_data(dep, s);
  dep->add_option("model", s.model, "model file with the cross terms to test")->required();
  add_weighting(dep, s);
  dep->add_option("--bootstrap", s.bootstrap, "bootstrap replicates")->capture_default_str();
  dep->add_option("--seed", s.seed, "random seed")->capture_default_str();
  dep->add_option("-o,--out", s.out, "JSON report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kValidation;
  }

  try {
    set_threads(threads);
    if (*sim) return cmd_simulate({s.model, samples, replicates, s.seed, s.out}, std::cerr);
    if (*mom) return cmd_moments({s.data, ingest_of(s), levels_of(s), s.alpha, hac_of(s), s.out}, std::cerr);
    if (*fit) {
      FitArgs a{s.data, s.model, ingest_of(s), levels_of(s), s.alpha, weighting_of(s), hac_of(s), s.seed, s.out, std::nullopt};
      if (!table.empty()) a.table = table;
      return cmd_fit(a, std::cerr);
    }
    if (*dep) {
      return cmd_testdep({s.data, s.model, ingest_of(s), levels_of(s), weighting_of(s), hac_of(s), s.bootstrap, s.seed, s.out},
                         std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  }
  return kOk;
}
