#include "wavecov/cli/commands.hpp"

#include <omp.h>

#include <cmath>
#include <map>

#include "wavecov/cli/model_file.hpp"
#include "wavecov/cli/report.hpp"
#include "wavecov/error.hpp"
#include "wavecov/simulate.hpp"
#include "wavecov/theoretical.hpp"

namespace wavecov::cli {
namespace {

int levels_for(const std::optional<int>& requested, std::size_t samples) {
  const int top = max_level(samples);
  if (!requested) return top;
  if (*requested < 1 || *requested > top) {
    throw ValidationError("--levels must lie in 1.." + std::to_string(top) + " for " + std::to_string(samples) +
                          " samples");
  }
  return *requested;
}

void check_channels(const Model& model, const Dataset& ds) {
  if (model.channels() != ds.channels()) {
    throw ValidationError("model has " + std::to_string(model.channels()) + " channels but the data has " +
                          std::to_string(ds.channels()));
  }
}

// Domain and distinct-coefficient rules for the values a model file gives,
// checked before any data is read.
void check_given(const Model& model, const ModelFile& file) {
  std::vector<std::string> problems;
  std::map<std::size_t, std::vector<std::pair<double, std::string>>> phis;
  for (std::size_t p = 0; p < model.size(); ++p) {
    if (!file.values[p]) continue;
    const ParamInfo& info = model.params()[p];
    const double x = *file.values[p];
    if (!std::isfinite(x)) {
      problems.push_back(info.name + " is not finite");
    } else if (info.transform == Transform::Log && !(x > 0.0)) {
      problems.push_back(info.name + " must be positive");
    } else if (info.transform == Transform::Atanh) {
      if (!(std::abs(x) < 1.0) || x == 0.0) problems.push_back(info.name + " must satisfy 0 < |phi| < 1");
      for (const auto& [other, name] : phis[info.first]) {
        if (other == x) problems.push_back(name + " and " + info.name + " are equal");
      }
      phis[info.first].emplace_back(x, info.name);
    }
  }
  if (problems.empty()) return;
  std::string msg = "invalid model values:";
  for (const auto& p : problems) msg += " " + p + ";";
  msg.pop_back();
  throw ValidationError(msg);
}

// Values given in the model file override per-channel starting values.
Eigen::VectorXd start_from(const Model& model, const ModelFile& file, const MomentData& data, const FitOptions& options) {
  if (file.complete()) return file.theta();
  Eigen::VectorXd start = starting_values(model, data, options);
  for (std::size_t p = 0; p < model.size(); ++p) {
    if (file.values[p]) start[static_cast<Eigen::Index>(p)] = *file.values[p];
  }
  return start;
}

}  // namespace

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return kValidation;
  if (dynamic_cast<const NumericalError*>(&e)) return kNumerical;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kIo;
  return kNumerical;
}

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

std::filesystem::path replicate_path(const std::filesystem::path& out, std::size_t r, std::size_t count) {
  if (count <= 1) return out;
  std::filesystem::path p = out.parent_path() / out.stem();
  p += "_r" + std::to_string(r);
  p += out.extension();
  return p;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& log) {
  if (args.replicates < 1) throw ValidationError("replicate count must be at least 1");
  if (args.samples < 4) throw ValidationError("sample count must be at least 4");
  const ModelFile file = read_model_file(args.model);
  const Eigen::VectorXd theta = file.theta();
  require_valid(file.spec, &theta);
  const Model model(file.spec);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < model.channels(); ++c) names.push_back("x" + std::to_string(c + 1));
  for (std::size_t r = 0; r < args.replicates; ++r) {
    const SimConfig cfg{model, theta, args.samples, args.seed, r};
    const auto path = replicate_path(args.out, r + 1, args.replicates);
    write_atomic(path, format_csv(names, simulate(cfg)));
    log << "wrote " << path.string() << '\n';
  }
  return kOk;
}

int cmd_moments(const MomentsArgs& args, std::ostream& log) {
  const Dataset ds = ingest(args.data, args.ingest);
  const int J = levels_for(args.levels, ds.samples());
  HacOptions hac = args.hac;
  hac.diagonal_only = true;
  const MomentData m = compute_moments(ds.values, J, hac);
  write_atomic(args.out, moment_table(m.nu, confidence_intervals(m.nu, m.cov, args.alpha)));
  log << "wrote " << args.out.string() << " (" << ds.channels() << " channels, " << J << " levels)\n";
  return kOk;
}

int cmd_fit(const FitArgs& args, std::ostream& log) {
  const ModelFile file = read_model_file(args.model);
  require_valid(file.spec);
  const Model model(file.spec);
  check_given(model, file);
  if (file.complete()) {
    const Eigen::VectorXd theta = file.theta();
    require_valid(file.spec, &theta);
  }
  const Dataset ds = ingest(args.data, args.ingest);
  check_channels(model, ds);
  const int J = levels_for(args.levels, ds.samples());

  FitOptions options;
  options.levels = J;
  options.weighting = args.weighting;
  options.hac = args.hac;
  options.seed = args.seed;
  const MomentData data = compute_moments(ds.values, J, args.hac);
  const Eigen::VectorXd start = start_from(model, file, data, options);
  require_valid(file.spec, &start);
  options.start = start;
  const FitResult fit = fit_moments(model, data, options);

  ReportContext ctx{args.data.string(), ds.names, ds.rate, ds.samples(), J, args.weighting, args.alpha, args.seed, args.hac};
  write_atomic(args.out, fit_report(model, fit, ctx));

  std::vector<std::string> names;
  for (const auto& b : model.spec().blocks) names.push_back(b.name);
  const auto table = args.table.value_or(args.out.parent_path() / (args.out.stem().string() + "_moments.csv"));
  write_atomic(table, moment_table(fit.empirical, confidence_intervals(fit.empirical, fit.moment_cov, args.alpha),
                                   &fit.implied, names, block_contributions(model, fit.theta, J)));
  log << "wrote " << args.out.string() << " and " << table.string() << '\n';
  for (const auto& w : fit.warnings) log << "warning: " << w << '\n';
  return fit.diagnostics.converged ? kOk : kNumerical;
}

int cmd_testdep(const TestDepArgs& args, std::ostream& log) {
  const ModelFile file = read_model_file(args.model);
  require_valid(file.spec);
  const Model full(file.spec);
  const Dataset ds = ingest(args.data, args.ingest);
  check_channels(full, ds);
  const int J = levels_for(args.levels, ds.samples());

  DependenceTestOptions options;
  options.bootstrap = args.bootstrap;
  options.seed = args.seed;
  options.fit.levels = J;
  options.fit.weighting = args.weighting;
  options.fit.hac = args.hac;
  options.fit.seed = args.seed;
  const DepTestResult test = dependence_test(ds.values, file.spec, options);

  const Model null(null_model(full).spec);
  ReportContext ctx{args.data.string(), ds.names, ds.rate, ds.samples(), J, args.weighting, 0.05, args.seed, args.hac};
  write_atomic(args.out, dependence_report(full, null, test, ctx));
  log << "wrote " << args.out.string() << " (p = " << test.p_value << ")\n";
  return kOk;
}

}  // namespace wavecov::cli
