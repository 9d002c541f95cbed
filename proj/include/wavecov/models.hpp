#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wavecov {

enum class BlockKind { WhiteNoise, RandomWalk, Quantization, Drift, AutoRegressive };

/// Short tags: WN, RW, QN, DR, AR1.
std::string_view to_string(BlockKind kind);
/// Accepts the short tags case-insensitively; throws ValidationError otherwise.
BlockKind parse_block_kind(std::string_view text);

/// Cross terms are only meaningful for WN, RW and AR1 blocks.
bool supports_cross(BlockKind kind);

/// One latent process and the channels it loads on.
struct LatentBlock {
  BlockKind kind = BlockKind::WhiteNoise;
  std::string name;
  /// Global channel indices (0-based, strictly increasing).
  std::vector<std::size_t> channels;
  /// Pairs (a, b), a < b, of local channel positions with a free cross
  /// parameter. Pairs not listed are fixed at zero.
  std::vector<std::pair<std::size_t, std::size_t>> cross;

  std::size_t size() const { return channels.size(); }
  bool has_cross(std::size_t a, std::size_t b) const;
  /// Local position of a global channel, or nullopt if not loaded.
  std::optional<std::size_t> local(std::size_t channel) const;
  /// All pairs a < b.
  void set_full_cross();
};

enum class ModelClass { M1, M2, Custom };

std::string_view to_string(ModelClass c);

struct ModelSpec {
  std::size_t channels = 0;
  std::vector<LatentBlock> blocks;
  std::optional<ModelClass> declared_class;
};

enum class ParamRole { Variance, Covariance, Phi, QuantizationPower, DriftRate };

enum class Transform { Log, Atanh, Correlation };

struct ParamInfo {
  std::size_t block = 0;
  ParamRole role = ParamRole::Variance;
  /// Global channels (first == second for per-channel parameters).
  std::size_t first = 0;
  std::size_t second = 0;
  std::string name;
  std::string unit;
  Transform transform = Transform::Log;
};

/// Natural-form values of one block on its local channels.
struct BlockValues {
  /// WN sigma, RW lambda or AR1 innovation covariance z (symmetric; entries
  /// without a free parameter are zero). Empty for QN and DR.
  Eigen::MatrixXd cov;
  /// AR1 coefficients per local channel.
  Eigen::VectorXd phi;
  /// QN power Q^2 or DR rate omega per local channel.
  Eigen::VectorXd scale;
};

/// Flat parameter layout of a ModelSpec.
///
/// Blocks are laid out in order. Inside a block: AR1 coefficients per
/// channel come first; then the covariance (WN/RW/AR1) row by row over the
/// upper triangle, each diagonal entry followed by the free cross entries of
/// that row; QN and DR carry one value per channel.
class Model {
 public:
  /// Throws ValidationError when the spec is structurally malformed (see
  /// validate() for the full rule set).
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t channels() const { return spec_.channels; }
  std::size_t size() const { return params_.size(); }
  const std::vector<ParamInfo>& params() const { return params_; }
  std::size_t offset(std::size_t block) const { return offsets_[block]; }
  std::size_t block_size(std::size_t block) const { return offsets_[block + 1] - offsets_[block]; }

  std::vector<BlockValues> unpack(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd pack(const std::vector<BlockValues>& values) const;

  /// Nullopt when theta is inside the parameter space, else a description.
  std::optional<std::string> domain_error(const Eigen::VectorXd& theta) const;
  /// Throws ValidationError for out-of-domain theta.
  Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& theta) const;
  /// Inverse of to_unconstrained. The result can still fail the full PD
  /// check for blocks on three or more channels.
  Eigen::VectorXd from_unconstrained(const Eigen::VectorXd& u) const;

  ModelClass classify() const;
  /// True when every block is WN, RW or QN, so nu is linear in theta.
  bool is_linear() const;
  /// Indices of off-diagonal covariance parameters.
  std::vector<std::size_t> cross_params() const;
  std::size_t find(std::string_view name) const;

  /// Among AR1 blocks with identical channels and cross structure, reorder
  /// values so that the coefficient on the first channel ascends in block
  /// order.
  Eigen::VectorXd canonicalize(const Eigen::VectorXd& theta) const;

 private:
  ModelSpec spec_;
  std::vector<ParamInfo> params_;
  std::vector<std::size_t> offsets_;
  // For covariance parameters: indices of the two matching variances.
  std::vector<std::pair<std::size_t, std::size_t>> diag_of_;
};

struct Violation {
  /// Block index, or nullopt for spec-level problems.
  std::optional<std::size_t> block;
  std::string rule;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;
  ModelClass model_class = ModelClass::Custom;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

/// Structural checks and, when theta is given, domain/PD checks and the
/// distinct-coefficient rule for AR1 blocks sharing a channel.
ValidationReport validate(const ModelSpec& spec, const Eigen::VectorXd* theta = nullptr);

/// Throws ValidationError carrying the report summary if validation fails.
void require_valid(const ModelSpec& spec, const Eigen::VectorXd* theta = nullptr);

/// A reduced spec with a map from its parameter indices into the source
/// model's parameter vector.
struct SubModel {
  ModelSpec spec;
  std::vector<std::size_t> source_index;
};

/// Blocks loading `channel`, cut down to that channel alone.
SubModel restrict_to_channel(const Model& model, std::size_t channel);

/// The same blocks with every cross parameter removed.
SubModel null_model(const Model& model);

}  // namespace wavecov
