#include "wavecov/cli/report.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "wavecov/error.hpp"

namespace wavecov::cli {
namespace {

using nlohmann::ordered_json;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json context_json(const ReportContext& ctx) {
  ordered_json data;
  data["path"] = ctx.data_path;
  data["channels"] = ctx.channel_names;
  data["samples"] = ctx.samples;
  if (ctx.rate) data["rate_hz"] = *ctx.rate;
  ordered_json hac;
  hac["rule"] = ctx.hac.rule == BandwidthRule::Fixed ? "fixed" : "level-adaptive";
  if (ctx.hac.lag) hac["lag"] = *ctx.hac.lag;
  hac["level_factor"] = ctx.hac.level_factor;
  hac["variance_floor"] = ctx.hac.variance_floor;
  ordered_json options;
  options["levels"] = ctx.levels;
  options["weighting"] = ctx.weighting == Weighting::Diagonal ? "diag" : "full";
  options["alpha"] = ctx.alpha;
  options["seed"] = ctx.seed;
  options["hac"] = std::move(hac);
  return {{"data", std::move(data)}, {"options", std::move(options)}};
}

ordered_json blocks_json(const Model& model) {
  ordered_json out = ordered_json::array();
  for (const LatentBlock& b : model.spec().blocks) {
    ordered_json channels = ordered_json::array();
    for (std::size_t c : b.channels) channels.push_back(c + 1);
    out.push_back({{"name", b.name}, {"kind", std::string(to_string(b.kind))}, {"channels", std::move(channels)}});
  }
  return out;
}

ordered_json theta_json(const Model& model, const Eigen::VectorXd& theta) {
  ordered_json out = ordered_json::object();
  for (std::size_t p = 0; p < model.size(); ++p) out[model.params()[p].name] = theta[static_cast<Eigen::Index>(p)];
  return out;
}

}  // namespace

std::string moment_table(const MomentVector& nu, const std::vector<Interval>& ci, const MomentVector* implied,
                         const std::vector<std::string>& block_names, const std::vector<MomentVector>& blocks) {
  if (ci.size() != static_cast<std::size_t>(nu.values.size())) throw ValidationError("interval count mismatch");
  if (block_names.size() != blocks.size()) throw ValidationError("block name count mismatch");
  std::string out = "i,i_prime,j,tau,gamma_hat,sign,abs_gamma,ci_lo,ci_hi";
  if (implied) out += ",implied";
  for (const auto& name : block_names) out += ",implied_" + name;
  out += '\n';
  for (std::size_t k = 0; k < ci.size(); ++k) {
    const MomentIndex idx = nu.layout.index(k);
    const double g = nu.values[static_cast<Eigen::Index>(k)];
    out += std::to_string(idx.first + 1) + ',' + std::to_string(idx.second + 1) + ',' + std::to_string(idx.level) + ',' +
           std::to_string(std::size_t{1} << idx.level) + ',' + num(g) + ',' + (g < 0.0 ? "-1" : "1") + ',' +
           num(std::abs(g)) + ',' + num(ci[k].lo) + ',' + num(ci[k].hi);
    if (implied) out += ',' + num(implied->values[static_cast<Eigen::Index>(k)]);
    for (const auto& b : blocks) out += ',' + num(b.values[static_cast<Eigen::Index>(k)]);
    out += '\n';
  }
  return out;
}

std::string fit_report(const Model& model, const FitResult& fit, const ReportContext& ctx) {
  ordered_json r;
  r["command"] = "fit";
  r.update(context_json(ctx));
  r["model"] = {{"class", std::string(to_string(model.classify()))}, {"blocks", blocks_json(model)}};

  const bool have_se = fit.std_errors.size() == static_cast<Eigen::Index>(model.size());
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - ctx.alpha / 2.0);
  ordered_json params = ordered_json::array();
  for (std::size_t p = 0; p < model.size(); ++p) {
    const ParamInfo& info = model.params()[p];
    const auto i = static_cast<Eigen::Index>(p);
    ordered_json e;
    e["name"] = info.name;
    e["unit"] = info.unit;
    e["estimate"] = fit.theta[i];
    if (have_se) {
      e["std_error"] = fit.std_errors[i];
      e["ci_lo"] = fit.theta[i] - z * fit.std_errors[i];
      e["ci_hi"] = fit.theta[i] + z * fit.std_errors[i];
    }
    params.push_back(std::move(e));
  }
  r["parameters"] = std::move(params);
  if (have_se) {
    r["covariance"] = matrix_json(fit.covariance);
    r["asymptotic_covariance"] = matrix_json(fit.asymptotic);
  }
  r["objective"] = fit.objective;
  r["diagnostics"] = {{"converged", fit.diagnostics.converged},     {"closed_form", fit.diagnostics.closed_form},
                      {"iterations", fit.diagnostics.iterations},   {"evaluations", fit.diagnostics.evaluations},
                      {"restarts", fit.diagnostics.restarts},       {"message", fit.diagnostics.message}};
  r["warnings"] = fit.warnings;

  ordered_json moments = ordered_json::array();
  const Eigen::VectorXd var = fit.moment_cov.variances();
  for (Eigen::Index k = 0; k < fit.empirical.values.size(); ++k) {
    const MomentIndex idx = fit.empirical.layout.index(static_cast<std::size_t>(k));
    moments.push_back({{"i", idx.first + 1},
                       {"i_prime", idx.second + 1},
                       {"j", idx.level},
                       {"empirical", fit.empirical.values[k]},
                       {"implied", fit.implied.values[k]},
                       {"std_error", std::sqrt(std::max(var[k], 0.0))}});
  }
  r["moments"] = std::move(moments);
  return r.dump(2) + "\n";
}

std::string dependence_report(const Model& full, const Model& null, const DepTestResult& test, const ReportContext& ctx) {
  ordered_json r;
  r["command"] = "test-dep";
  r.update(context_json(ctx));
  r["options"].erase("alpha");
  r["model"] = {{"class", std::string(to_string(full.classify()))}, {"blocks", blocks_json(full)}};
  ordered_json cross = ordered_json::array();
  for (std::size_t p : full.cross_params()) cross.push_back(full.params()[p].name);
  r["tested"] = std::move(cross);
  r["statistic"] = test.stat;
  r["p_value"] = test.p_value;
  r["bootstrap"] = test.bootstrap;
  r["dropped"] = test.dropped;
  r["objective_null"] = test.objective_null;
  r["objective_full"] = test.objective_full;
  r["theta_null"] = theta_json(null, test.theta_null);
  r["theta_full"] = theta_json(full, test.theta_full);
  r["boot_dist"] = test.boot_dist;
  return r.dump(2) + "\n";
}

}  // namespace wavecov::cli
