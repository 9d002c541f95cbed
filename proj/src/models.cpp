#include "wavecov/models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "wavecov/error.hpp"

namespace wavecov {
namespace {

std::string channel_label(std::size_t a) { return std::to_string(a + 1); }

std::string symbol(BlockKind kind) {
  switch (kind) {
    case BlockKind::WhiteNoise: return "sigma";
    case BlockKind::RandomWalk: return "lambda";
    case BlockKind::Quantization: return "q2";
    case BlockKind::Drift: return "omega";
    case BlockKind::AutoRegressive: return "z";
  }
  return "?";
}

std::string unit(BlockKind kind) {
  switch (kind) {
    case BlockKind::RandomWalk: return "u^2/sample";
    case BlockKind::Drift: return "u/sample";
    default: return "u^2";
  }
}

std::vector<Violation> structural_violations(const ModelSpec& spec) {
  std::vector<Violation> out;
  if (spec.channels == 0) out.push_back({std::nullopt, "structure", "model has no channels"});
  if (spec.blocks.empty()) out.push_back({std::nullopt, "structure", "model has no blocks"});
  std::map<std::string, std::size_t> names;
  for (std::size_t k = 0; k < spec.blocks.size(); ++k) {
    const LatentBlock& b = spec.blocks[k];
    auto bad = [&](std::string msg) { out.push_back({k, "structure", std::move(msg)}); };
    if (!b.name.empty() && !names.emplace(b.name, k).second) bad("duplicate block name '" + b.name + "'");
    if (b.channels.empty()) bad("block loads no channel");
    for (std::size_t a = 0; a < b.channels.size(); ++a) {
      if (b.channels[a] >= spec.channels) {
        bad("channel " + channel_label(b.channels[a]) + " exceeds channel count " + std::to_string(spec.channels));
      }
      if (a > 0 && b.channels[a] <= b.channels[a - 1]) bad("channels must be strictly increasing");
    }
    if (!b.cross.empty() && !supports_cross(b.kind)) {
      bad(std::string(to_string(b.kind)) + " blocks carry no cross terms");
    }
    for (std::size_t c = 0; c < b.cross.size(); ++c) {
      const auto [p, q] = b.cross[c];
      if (p >= q || q >= b.channels.size()) bad("invalid cross pair");
      for (std::size_t d = 0; d < c; ++d) {
        if (b.cross[d] == b.cross[c]) bad("repeated cross pair");
      }
    }
  }
  return out;
}

std::string join_messages(const std::vector<Violation>& v) {
  std::ostringstream os;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) os << "; ";
    if (v[k].block) os << "block " << (*v[k].block + 1) << ": ";
    os << v[k].message << " [" << v[k].rule << "]";
  }
  return os.str();
}

double corr_bound(double va, double vb) { return std::sqrt(va * vb); }

}  // namespace

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::WhiteNoise: return "WN";
    case BlockKind::RandomWalk: return "RW";
    case BlockKind::Quantization: return "QN";
    case BlockKind::Drift: return "DR";
    case BlockKind::AutoRegressive: return "AR1";
  }
  return "?";
}

BlockKind parse_block_kind(std::string_view text) {
  std::string up(text);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "WN") return BlockKind::WhiteNoise;
  if (up == "RW") return BlockKind::RandomWalk;
  if (up == "QN") return BlockKind::Quantization;
  if (up == "DR") return BlockKind::Drift;
  if (up == "AR1") return BlockKind::AutoRegressive;
  throw ValidationError("unknown block kind '" + std::string(text) + "' (expected WN, RW, QN, DR or AR1)");
}

bool supports_cross(BlockKind kind) {
  return kind == BlockKind::WhiteNoise || kind == BlockKind::RandomWalk || kind == BlockKind::AutoRegressive;
}

std::string_view to_string(ModelClass c) {
  switch (c) {
    case ModelClass::M1: return "M1";
    case ModelClass::M2: return "M2";
    case ModelClass::Custom: return "custom";
  }
  return "?";
}

bool LatentBlock::has_cross(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  return std::find(cross.begin(), cross.end(), std::pair{a, b}) != cross.end();
}

std::optional<std::size_t> LatentBlock::local(std::size_t channel) const {
  auto it = std::lower_bound(channels.begin(), channels.end(), channel);
  if (it == channels.end() || *it != channel) return std::nullopt;
  return static_cast<std::size_t>(it - channels.begin());
}

void LatentBlock::set_full_cross() {
  cross.clear();
  for (std::size_t a = 0; a < channels.size(); ++a) {
    for (std::size_t b = a + 1; b < channels.size(); ++b) cross.emplace_back(a, b);
  }
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  const auto problems = structural_violations(spec_);
  if (!problems.empty()) throw ValidationError("malformed model: " + join_messages(problems));

  for (std::size_t k = 0; k < spec_.blocks.size(); ++k) {
    LatentBlock& b = spec_.blocks[k];
    std::sort(b.cross.begin(), b.cross.end());
    if (b.name.empty()) {
      std::string tag(to_string(b.kind));
      for (char& c : tag) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      b.name = tag + "_" + std::to_string(k + 1);
    }
  }

  for (std::size_t k = 0; k < spec_.blocks.size(); ++k) {
    const LatentBlock& b = spec_.blocks[k];
    offsets_.push_back(params_.size());
    auto add = [&](ParamRole role, std::size_t a, std::size_t c, std::string name, std::string u, Transform t) {
      params_.push_back({k, role, b.channels[a], b.channels[c], b.name + "." + std::move(name), std::move(u), t});
      diag_of_.emplace_back(0, 0);
    };
    const std::size_t n = b.size();
    switch (b.kind) {
      case BlockKind::Quantization:
      case BlockKind::Drift: {
        const ParamRole role = b.kind == BlockKind::Drift ? ParamRole::DriftRate : ParamRole::QuantizationPower;
        for (std::size_t a = 0; a < n; ++a) {
          add(role, a, a, symbol(b.kind) + "[" + channel_label(b.channels[a]) + "]", unit(b.kind), Transform::Log);
        }
        break;
      }
      case BlockKind::AutoRegressive:
        for (std::size_t a = 0; a < n; ++a) {
          add(ParamRole::Phi, a, a, "phi[" + channel_label(b.channels[a]) + "]", "1", Transform::Atanh);
        }
        [[fallthrough]];
      case BlockKind::WhiteNoise:
      case BlockKind::RandomWalk: {
        std::vector<std::size_t> diag_index(n);
        std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> pending;
        for (std::size_t a = 0; a < n; ++a) {
          diag_index[a] = params_.size();
          const std::string ca = channel_label(b.channels[a]);
          add(ParamRole::Variance, a, a, symbol(b.kind) + "[" + ca + "," + ca + "]", unit(b.kind), Transform::Log);
          for (std::size_t c = a + 1; c < n; ++c) {
            if (!b.has_cross(a, c)) continue;
            pending.push_back({params_.size(), {a, c}});
            add(ParamRole::Covariance, a, c, symbol(b.kind) + "[" + ca + "," + channel_label(b.channels[c]) + "]",
                unit(b.kind), Transform::Correlation);
          }
        }
        for (const auto& [idx, ac] : pending) diag_of_[idx] = {diag_index[ac.first], diag_index[ac.second]};
        break;
      }
    }
  }
  offsets_.push_back(params_.size());
}

std::vector<BlockValues> Model::unpack(const Eigen::VectorXd& theta) const {
  if (static_cast<std::size_t>(theta.size()) != size()) {
    throw ValidationError("parameter vector has " + std::to_string(theta.size()) + " entries, model expects " +
                          std::to_string(size()));
  }
  std::vector<BlockValues> out(spec_.blocks.size());
  for (std::size_t k = 0; k < spec_.blocks.size(); ++k) {
    const LatentBlock& b = spec_.blocks[k];
    const Eigen::Index n = static_cast<Eigen::Index>(b.size());
    BlockValues& v = out[k];
    if (b.kind == BlockKind::Quantization || b.kind == BlockKind::Drift) {
      v.scale.resize(n);
    } else {
      v.cov = Eigen::MatrixXd::Zero(n, n);
      if (b.kind == BlockKind::AutoRegressive) v.phi.resize(n);
    }
  }
  for (std::size_t p = 0; p < size(); ++p) {
    const ParamInfo& info = params_[p];
    const LatentBlock& b = spec_.blocks[info.block];
    const Eigen::Index a = static_cast<Eigen::Index>(*b.local(info.first));
    const Eigen::Index c = static_cast<Eigen::Index>(*b.local(info.second));
    BlockValues& v = out[info.block];
    const double x = theta[static_cast<Eigen::Index>(p)];
    switch (info.role) {
      case ParamRole::Variance:
      case ParamRole::Covariance:
        v.cov(a, c) = x;
        v.cov(c, a) = x;
        break;
      case ParamRole::Phi: v.phi[a] = x; break;
      case ParamRole::QuantizationPower:
      case ParamRole::DriftRate: v.scale[a] = x; break;
    }
  }
  return out;
}

Eigen::VectorXd Model::pack(const std::vector<BlockValues>& values) const {
  if (values.size() != spec_.blocks.size()) throw ValidationError("block value count does not match model");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(size()));
  for (std::size_t p = 0; p < size(); ++p) {
    const ParamInfo& info = params_[p];
    const LatentBlock& b = spec_.blocks[info.block];
    const Eigen::Index a = static_cast<Eigen::Index>(*b.local(info.first));
    const Eigen::Index c = static_cast<Eigen::Index>(*b.local(info.second));
    const BlockValues& v = values[info.block];
    double x = 0.0;
    switch (info.role) {
      case ParamRole::Variance:
      case ParamRole::Covariance: x = v.cov(a, c); break;
      case ParamRole::Phi: x = v.phi[a]; break;
      case ParamRole::QuantizationPower:
      case ParamRole::DriftRate: x = v.scale[a]; break;
    }
    theta[static_cast<Eigen::Index>(p)] = x;
  }
  return theta;
}

std::optional<std::string> Model::domain_error(const Eigen::VectorXd& theta) const {
  if (static_cast<std::size_t>(theta.size()) != size()) return std::string("parameter vector has wrong length");
  for (std::size_t p = 0; p < size(); ++p) {
    const double x = theta[static_cast<Eigen::Index>(p)];
    const ParamInfo& info = params_[p];
    if (!std::isfinite(x)) return info.name + " is not finite";
    switch (info.transform) {
      case Transform::Log:
        if (!(x > 0.0)) return info.name + " must be positive";
        break;
      case Transform::Atanh:
        if (!(std::abs(x) < 1.0) || x == 0.0) return info.name + " must satisfy 0 < |phi| < 1";
        break;
      case Transform::Correlation: {
        const double va = theta[static_cast<Eigen::Index>(diag_of_[p].first)];
        const double vb = theta[static_cast<Eigen::Index>(diag_of_[p].second)];
        if (va > 0.0 && vb > 0.0 && !(std::abs(x) < corr_bound(va, vb))) {
          return info.name + " implies a correlation of magnitude >= 1";
        }
        break;
      }
    }
  }
  const auto values = unpack(theta);
  for (std::size_t k = 0; k < spec_.blocks.size(); ++k) {
    if (values[k].cov.rows() < 3) continue;
    Eigen::LLT<Eigen::MatrixXd> llt(values[k].cov);
    if (llt.info() != Eigen::Success) return "covariance of block '" + spec_.blocks[k].name + "' is not positive definite";
  }
  return std::nullopt;
}

Eigen::VectorXd Model::to_unconstrained(const Eigen::VectorXd& theta) const {
  if (auto err = domain_error(theta)) throw ValidationError(*err);
  Eigen::VectorXd u(theta.size());
  for (std::size_t p = 0; p < size(); ++p) {
    const Eigen::Index i = static_cast<Eigen::Index>(p);
    switch (params_[p].transform) {
      case Transform::Log: u[i] = std::log(theta[i]); break;
      case Transform::Atanh: u[i] = std::atanh(theta[i]); break;
      case Transform::Correlation: {
        const double bound = corr_bound(theta[static_cast<Eigen::Index>(diag_of_[p].first)],
                                        theta[static_cast<Eigen::Index>(diag_of_[p].second)]);
        u[i] = std::atanh(theta[i] / bound);
        break;
      }
    }
  }
  return u;
}

Eigen::VectorXd Model::from_unconstrained(const Eigen::VectorXd& u) const {
  if (static_cast<std::size_t>(u.size()) != size()) throw ValidationError("unconstrained vector has wrong length");
  Eigen::VectorXd theta(u.size());
  for (std::size_t p = 0; p < size(); ++p) {
    const Eigen::Index i = static_cast<Eigen::Index>(p);
    if (params_[p].transform == Transform::Log) theta[i] = std::exp(u[i]);
    if (params_[p].transform == Transform::Atanh) theta[i] = std::tanh(u[i]);
  }
  for (std::size_t p = 0; p < size(); ++p) {
    if (params_[p].transform != Transform::Correlation) continue;
    const Eigen::Index i = static_cast<Eigen::Index>(p);
    theta[i] = std::tanh(u[i]) * corr_bound(theta[static_cast<Eigen::Index>(diag_of_[p].first)],
                                            theta[static_cast<Eigen::Index>(diag_of_[p].second)]);
  }
  return theta;
}

ModelClass Model::classify() const {
  bool m1 = true;
  bool m2 = true;
  bool any_ar = false;
  for (std::size_t ch = 0; ch < spec_.channels; ++ch) {
    std::map<BlockKind, int> count;
    for (const LatentBlock& b : spec_.blocks) {
      if (b.local(ch)) ++count[b.kind];
    }
    for (const auto& [kind, n] : count) {
      if (kind == BlockKind::AutoRegressive) {
        any_ar = true;
        m1 = false;
        continue;
      }
      if (n > 1) m1 = m2 = false;
      if (kind == BlockKind::RandomWalk || kind == BlockKind::Drift) m2 = false;
    }
  }
  if (m1) return ModelClass::M1;
  if (m2 && any_ar) return ModelClass::M2;
  return ModelClass::Custom;
}

bool Model::is_linear() const {
  return std::all_of(spec_.blocks.begin(), spec_.blocks.end(), [](const LatentBlock& b) {
    return b.kind == BlockKind::WhiteNoise || b.kind == BlockKind::RandomWalk || b.kind == BlockKind::Quantization;
  });
}

std::vector<std::size_t> Model::cross_params() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < size(); ++p) {
    if (params_[p].role == ParamRole::Covariance) out.push_back(p);
  }
  return out;
}

std::size_t Model::find(std::string_view name) const {
  for (std::size_t p = 0; p < size(); ++p) {
    if (params_[p].name == name) return p;
  }
  throw ValidationError("no parameter named '" + std::string(name) + "'");
}

Eigen::VectorXd Model::canonicalize(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd out = theta;
  std::vector<bool> done(spec_.blocks.size(), false);
  for (std::size_t k = 0; k < spec_.blocks.size(); ++k) {
    const LatentBlock& b = spec_.blocks[k];
    if (done[k] || b.kind != BlockKind::AutoRegressive) continue;
    std::vector<std::size_t> group{k};
    for (std::size_t m = k + 1; m < spec_.blocks.size(); ++m) {
      const LatentBlock& o = spec_.blocks[m];
      if (o.kind == BlockKind::AutoRegressive && o.channels == b.channels && o.cross == b.cross) group.push_back(m);
    }
    for (std::size_t m : group) done[m] = true;
    if (group.size() < 2) continue;
    std::vector<std::size_t> order(group.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return theta[static_cast<Eigen::Index>(offsets_[group[x]])] < theta[static_cast<Eigen::Index>(offsets_[group[y]])];
    });
    const Eigen::Index len = static_cast<Eigen::Index>(block_size(k));
    for (std::size_t s = 0; s < group.size(); ++s) {
      out.segment(static_cast<Eigen::Index>(offsets_[group[s]]), len) =
          theta.segment(static_cast<Eigen::Index>(offsets_[group[order[s]]]), len);
    }
  }
  return out;
}

std::string ValidationReport::summary() const { return join_messages(violations); }

ValidationReport validate(const ModelSpec& spec, const Eigen::VectorXd* theta) {
  ValidationReport report;
  report.violations = structural_violations(spec);
  if (!report.ok()) return report;

  const Model model(spec);
  for (std::size_t ch = 0; ch < spec.channels; ++ch) {
    const bool loaded =
        std::any_of(spec.blocks.begin(), spec.blocks.end(), [&](const LatentBlock& b) { return b.local(ch).has_value(); });
    if (!loaded) report.violations.push_back({std::nullopt, "coverage", "channel " + channel_label(ch) + " is loaded by no block"});
  }

  report.model_class = model.classify();
  if (spec.declared_class && *spec.declared_class != ModelClass::Custom && *spec.declared_class != report.model_class) {
    report.violations.push_back({std::nullopt, "class",
                                 "declared class " + std::string(to_string(*spec.declared_class)) +
                                     " but the blocks form class " + std::string(to_string(report.model_class))});
  }
  if (report.model_class == ModelClass::Custom) {
    report.warnings.push_back("model is outside classes M1 and M2; identifiability is not guaranteed");
  }

  if (theta == nullptr) return report;
  if (static_cast<std::size_t>(theta->size()) != model.size()) {
    report.violations.push_back({std::nullopt, "structure",
                                 "parameter vector has " + std::to_string(theta->size()) + " entries, model expects " +
                                     std::to_string(model.size())});
    return report;
  }

  for (std::size_t p = 0; p < model.size(); ++p) {
    const ParamInfo& info = model.params()[p];
    const double x = (*theta)[static_cast<Eigen::Index>(p)];
    if (!std::isfinite(x)) {
      report.violations.push_back({info.block, "domain", info.name + " is not finite"});
    } else if (info.transform == Transform::Log && !(x > 0.0)) {
      report.violations.push_back({info.block, "domain", info.name + " must be positive"});
    } else if (info.transform == Transform::Atanh && (!(std::abs(x) < 1.0) || x == 0.0)) {
      report.violations.push_back({info.block, "domain", info.name + " must satisfy 0 < |phi| < 1"});
    }
  }
  const auto values = model.unpack(*theta);
  for (std::size_t k = 0; k < spec.blocks.size(); ++k) {
    const Eigen::MatrixXd& cov = values[k].cov;
    if (cov.size() == 0 || !cov.allFinite()) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
      report.violations.push_back({k, "PSD", "covariance of block '" + model.spec().blocks[k].name + "' is not positive definite"});
    }
  }
  for (std::size_t ch = 0; ch < spec.channels; ++ch) {
    std::vector<std::pair<double, std::size_t>> phis;
    for (std::size_t k = 0; k < spec.blocks.size(); ++k) {
      const LatentBlock& b = model.spec().blocks[k];
      if (b.kind != BlockKind::AutoRegressive) continue;
      if (auto a = b.local(ch)) phis.emplace_back(values[k].phi[static_cast<Eigen::Index>(*a)], k);
    }
    for (std::size_t x = 0; x < phis.size(); ++x) {
      for (std::size_t y = x + 1; y < phis.size(); ++y) {
        if (phis[x].first == phis[y].first) {
          report.violations.push_back({phis[y].second, "distinct-phi",
                                       "AR1 blocks '" + model.spec().blocks[phis[x].second].name + "' and '" +
                                           model.spec().blocks[phis[y].second].name +
                                           "' share coefficient " + std::to_string(phis[x].first) + " on channel " +
                                           channel_label(ch)});
        }
      }
    }
  }
  return report;
}

void require_valid(const ModelSpec& spec, const Eigen::VectorXd* theta) {
  const ValidationReport r = validate(spec, theta);
  if (!r.ok()) throw ValidationError("invalid model: " + r.summary());
}

namespace {

SubModel reduce(const Model& model, ModelSpec spec, const std::vector<std::size_t>& block_source) {
  const Model sub(spec);
  SubModel out{sub.spec(), {}};
  for (const ParamInfo& info : sub.params()) {
    const std::size_t src_block = block_source[info.block];
    std::size_t found = model.size();
    for (std::size_t p = model.offset(src_block); p < model.offset(src_block) + model.block_size(src_block); ++p) {
      const ParamInfo& fi = model.params()[p];
      if (fi.role == info.role && fi.first == info.first && fi.second == info.second) found = p;
    }
    if (found == model.size()) throw Error("internal: sub-model parameter " + info.name + " has no source");
    out.source_index.push_back(found);
  }
  return out;
}

}  // namespace

SubModel restrict_to_channel(const Model& model, std::size_t channel) {
  if (channel >= model.channels()) throw ValidationError("channel " + channel_label(channel) + " out of range");
  ModelSpec spec;
  spec.channels = model.channels();
  std::vector<std::size_t> block_source;
  for (std::size_t k = 0; k < model.spec().blocks.size(); ++k) {
    const LatentBlock& b = model.spec().blocks[k];
    if (!b.local(channel)) continue;
    LatentBlock r{b.kind, b.name, {channel}, {}};
    spec.blocks.push_back(std::move(r));
    block_source.push_back(k);
  }
  if (spec.blocks.empty()) throw ValidationError("channel " + channel_label(channel) + " is loaded by no block");
  // Keep global channel numbering while matching, then collapse to one channel.
  SubModel out = reduce(model, spec, block_source);
  out.spec.channels = 1;
  for (LatentBlock& b : out.spec.blocks) b.channels = {0};
  return out;
}

SubModel null_model(const Model& model) {
  ModelSpec spec = model.spec();
  std::vector<std::size_t> block_source(spec.blocks.size());
  std::iota(block_source.begin(), block_source.end(), 0);
  for (LatentBlock& b : spec.blocks) b.cross.clear();
  return reduce(model, spec, block_source);
}

}  // namespace wavecov
