#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wavecov/moments.hpp"

namespace wavecov::cli {

struct Dataset {
  std::vector<std::string> names;
  /// Rows are samples, columns follow `names`.
  MultiSignal values;
  /// Samples per second, from a leading "# rate: <hz>" comment; metadata only.
  std::optional<double> rate;

  std::size_t channels() const { return names.size(); }
  std::size_t samples() const { return static_cast<std::size_t>(values.rows()); }
};

struct IngestOptions {
  bool demean = false;
  /// Columns to keep, by header name, in this order; all when empty.
  std::vector<std::string> columns;
};

/// CSV with a header row and a numeric body. Lines starting with '#' before
/// the header are comments. Empty, ragged or non-numeric cells raise a
/// ValidationError naming the line and column.
Dataset parse_csv(std::istream& in, const IngestOptions& options = {}, std::string_view source = "<input>");
Dataset ingest(const std::filesystem::path& path, const IngestOptions& options = {});

/// Header plus rows with 17 significant digits.
std::string format_csv(const std::vector<std::string>& names, const MultiSignal& values);

/// Write to a temporary file next to `path`, then rename over it.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace wavecov::cli
