#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wavecov/models.hpp"

namespace wavecov::cli {

/// A parsed model file: the spec plus any values given for its parameters,
/// indexed like Model(spec).params(). See docs/model_files.md for the grammar.
struct ModelFile {
  ModelSpec spec;
  std::vector<std::optional<double>> values;

  bool complete() const;
  /// All values; throws ValidationError naming the first missing one.
  Eigen::VectorXd theta() const;
};

ModelFile parse_model(std::istream& in, std::string_view source = "<model>");
ModelFile read_model_file(const std::filesystem::path& path);

/// Text form of a model with values, readable by parse_model.
std::string format_model(const Model& model, const Eigen::VectorXd& theta);

}  // namespace wavecov::cli
