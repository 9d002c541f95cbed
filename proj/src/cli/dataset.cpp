#include "wavecov/cli/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "wavecov/error.hpp"

namespace wavecov::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

}  // namespace

Dataset parse_csv(std::istream& in, const IngestOptions& options, std::string_view source) {
  const std::string where(source);
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      auto body = trim(t.substr(1));
      if (body.starts_with("rate:")) {
        const auto v = parse_number(trim(body.substr(5)));
        if (!v || !(*v > 0.0)) throw ValidationError(where + ":" + std::to_string(lineno) + ": bad rate comment");
        ds.rate = *v;
      }
      continue;
    }
    for (auto name : split(t)) {
      if (name.empty()) throw ValidationError(where + ":" + std::to_string(lineno) + ": empty column name in header");
      header.emplace_back(name);
    }
    break;
  }
  if (header.empty()) throw ValidationError(where + ": no header row");

  std::vector<std::size_t> keep;
  if (options.columns.empty()) {
    keep.resize(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) keep[c] = c;
  } else {
    for (const auto& name : options.columns) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw ValidationError(where + ": no column named '" + name + "'");
      keep.push_back(static_cast<std::size_t>(it - header.begin()));
    }
  }
  for (std::size_t c : keep) ds.names.push_back(header[c]);

  std::vector<double> flat;
  std::vector<double> row(header.size());
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    const auto cells = split(t);
    const std::string at = where + ":" + std::to_string(lineno) + ": ";
    if (cells.size() != header.size()) {
      throw ValidationError(at + "expected " + std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string col = "column " + std::to_string(c + 1) + " ('" + header[c] + "')";
      if (cells[c].empty()) throw ValidationError(at + "missing value in " + col);
      const auto v = parse_number(cells[c]);
      if (!v) throw ValidationError(at + "non-numeric value '" + std::string(cells[c]) + "' in " + col);
      if (!std::isfinite(*v)) throw ValidationError(at + "non-finite value in " + col);
      row[c] = *v;
    }
    for (std::size_t c : keep) flat.push_back(row[c]);
    ++rows;
  }
  if (rows == 0) throw ValidationError(where + ": no data rows");

  const auto n = static_cast<Eigen::Index>(keep.size());
  ds.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), static_cast<Eigen::Index>(rows), n);
  if (options.demean) {
    for (Eigen::Index c = 0; c < n; ++c) {
      auto col = ds.values.col(c);
      col.array() -= col.mean();
      // A second pass removes the rounding left by the first.
      col.array() -= col.mean();
    }
  }
  return ds;
}

Dataset ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_csv(in, options, path.string());
}

std::string format_csv(const std::vector<std::string>& names, const MultiSignal& values) {
  std::string out;
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) out += ',';
    out += names[c];
  }
  out += '\n';
  char buf[32];
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) out += ',';
      const int len = std::snprintf(buf, sizeof buf, "%.17g", values(t, c));
      out.append(buf, static_cast<std::size_t>(len));
    }
    out += '\n';
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

}  // namespace wavecov::cli
