#include "wavecov/cli/model_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "wavecov/error.hpp"

namespace wavecov::cli {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

std::size_t parse_index(std::string_view s, const std::string& at) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw ValidationError(at + "expected a channel number >= 1, got '" + std::string(s) + "'");
  }
  return v - 1;
}

double parse_value(std::string_view s, const std::string& at) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError(at + "expected a number or 'auto', got '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

struct PendingValue {
  std::size_t block = 0;
  std::string key;
  std::optional<double> value;
  std::string at;
};

}  // namespace

bool ModelFile::complete() const {
  return std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

Eigen::VectorXd ModelFile::theta() const {
  const Model model(spec);
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t p = 0; p < values.size(); ++p) {
    if (!values[p]) throw ValidationError("model file gives no value for " + model.params()[p].name);
    out[static_cast<Eigen::Index>(p)] = *values[p];
  }
  return out;
}

ModelFile parse_model(std::istream& in, std::string_view source) {
  const std::string where(source);
  ModelFile out;
  std::optional<std::size_t> channels;
  std::vector<PendingValue> pending;
  std::vector<std::string> block_at;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto tok = tokens(line);
    if (tok.empty()) continue;
    const std::string at = where + ":" + std::to_string(lineno) + ": ";
    const std::string head = lower(tok[0]);
    if (head == "channels") {
      if (tok.size() != 2) throw ValidationError(at + "expected 'channels <count>'");
      if (channels) throw ValidationError(at + "channel count given twice");
      channels = parse_index(tok[1], at) + 1;
    } else if (head == "class") {
      if (tok.size() != 2) throw ValidationError(at + "expected 'class M1|M2|custom'");
      const std::string c = lower(tok[1]);
      if (c == "m1") {
        out.spec.declared_class = ModelClass::M1;
      } else if (c == "m2") {
        out.spec.declared_class = ModelClass::M2;
      } else if (c == "custom") {
        out.spec.declared_class = ModelClass::Custom;
      } else {
        throw ValidationError(at + "unknown class '" + tok[1] + "'");
      }
    } else if (head == "block") {
      if (!channels) throw ValidationError(at + "'channels' must precede the first block");
      if (tok.size() < 2) throw ValidationError(at + "expected 'block <kind> ...'");
      LatentBlock b;
      try {
        b.kind = parse_block_kind(tok[1]);
      } catch (const ValidationError& e) {
        throw ValidationError(at + e.what());
      }
      const std::size_t k = out.spec.blocks.size();
      std::optional<std::string> cross;
      for (std::size_t t = 2; t < tok.size(); ++t) {
        const auto eq = tok[t].find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError(at + "expected key=value, got '" + tok[t] + "'");
        const std::string key = tok[t].substr(0, eq);
        const std::string val = tok[t].substr(eq + 1);
        if (key == "name") {
          b.name = val;
        } else if (key == "channels") {
          if (!b.channels.empty()) throw ValidationError(at + "channels given twice");
          for (auto c : split(val, ',')) b.channels.push_back(parse_index(c, at));
        } else if (key == "cross") {
          cross = val;
        } else if (val == "auto") {
          pending.push_back({k, key, std::nullopt, at});
        } else {
          pending.push_back({k, key, parse_value(val, at), at});
        }
      }
      if (b.channels.empty()) throw ValidationError(at + "block needs channels=");
      if (!std::is_sorted(b.channels.begin(), b.channels.end()) ||
          std::adjacent_find(b.channels.begin(), b.channels.end()) != b.channels.end()) {
        throw ValidationError(at + "block channels must be strictly increasing");
      }
      if (cross && *cross == "all") {
        b.set_full_cross();
      } else if (cross && *cross != "none") {
        for (auto pair : split(*cross, ',')) {
          const auto parts = split(pair, '-');
          if (parts.size() != 2) throw ValidationError(at + "cross pairs are written a-b, got '" + std::string(pair) + "'");
          const auto a = b.local(parse_index(parts[0], at));
          const auto c = b.local(parse_index(parts[1], at));
          if (!a || !c || *a == *c) throw ValidationError(at + "cross pair '" + std::string(pair) + "' is not two loaded channels");
          b.cross.emplace_back(std::min(*a, *c), std::max(*a, *c));
        }
      }
      out.spec.blocks.push_back(std::move(b));
      block_at.push_back(at);
    } else {
      throw ValidationError(at + "unknown statement '" + tok[0] + "'");
    }
  }
  if (!channels) throw ValidationError(where + ": missing 'channels' statement");
  out.spec.channels = *channels;

  const Model model(out.spec);
  out.spec = model.spec();
  out.values.assign(model.size(), std::nullopt);
  std::vector<char> seen(model.size(), 0);
  for (const PendingValue& pv : pending) {
    const std::string full = out.spec.blocks[pv.block].name + "." + pv.key;
    std::size_t p = 0;
    try {
      p = model.find(full);
    } catch (const ValidationError&) {
      throw ValidationError(pv.at + "block '" + out.spec.blocks[pv.block].name + "' has no parameter '" + pv.key + "'");
    }
    if (seen[p]) throw ValidationError(pv.at + full + " given twice");
    seen[p] = 1;
    out.values[p] = pv.value;
  }
  return out;
}

ModelFile read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_model(in, path.string());
}

std::string format_model(const Model& model, const Eigen::VectorXd& theta) {
  std::ostringstream os;
  os << "channels " << model.channels() << '\n';
  if (model.spec().declared_class) os << "class " << to_string(*model.spec().declared_class) << '\n';
  char buf[40];
  for (std::size_t k = 0; k < model.spec().blocks.size(); ++k) {
    const LatentBlock& b = model.spec().blocks[k];
    os << "block " << to_string(b.kind) << " name=" << b.name << " channels=";
    for (std::size_t a = 0; a < b.size(); ++a) os << (a ? "," : "") << b.channels[a] + 1;
    if (!b.cross.empty()) {
      os << " cross=";
      for (std::size_t c = 0; c < b.cross.size(); ++c) {
        os << (c ? "," : "") << b.channels[b.cross[c].first] + 1 << '-' << b.channels[b.cross[c].second] + 1;
      }
    }
    for (std::size_t p = model.offset(k); p < model.offset(k) + model.block_size(k); ++p) {
      std::snprintf(buf, sizeof buf, "%.17g", theta[static_cast<Eigen::Index>(p)]);
      os << ' ' << model.params()[p].name.substr(b.name.size() + 1) << '=' << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace wavecov::cli
