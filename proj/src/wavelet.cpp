#include "wavecov/wavelet.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "wavecov/error.hpp"

namespace wavecov {
namespace {

void check_level(int level) {
  if (level < 1 || level > kMaxFilterLevel) {
    throw ValidationError("wavelet level " + std::to_string(level) + " outside 1.." +
                          std::to_string(kMaxFilterLevel));
  }
}

// Neumaier-compensated accumulator; the sliding window below adds and
// removes O(T) terms and plain summation drifts visibly for long series.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

HaarLevel build_filter(int level) {
  check_level(level);
  HaarLevel f;
  f.level = level;
  f.length = std::size_t{1} << level;
  const double scale = std::ldexp(1.0, -level);
  const std::size_t half = f.length / 2;
  f.taps.resize(f.length);
  for (std::size_t l = 0; l < f.length; ++l) f.taps[l] = l < half ? scale : -scale;
  f.diff_taps.resize(f.length - 1);
  double run = 0.0;
  for (std::size_t l = 0; l + 1 < f.length; ++l) {
    run += f.taps[l];
    f.diff_taps[l] = run;
  }
  return f;
}

CoefficientSeries decompose(std::span<const double> x, int level, std::size_t channel) {
  check_level(level);
  const std::size_t len = std::size_t{1} << level;
  if (x.size() < len) {
    throw ValidationError("series of length " + std::to_string(x.size()) +
                          " is shorter than the level-" + std::to_string(level) +
                          " filter (" + std::to_string(len) + ")");
  }
  const std::size_t half = len / 2;
  const double scale = std::ldexp(1.0, -level);

  // W_t = 2^-j * sum_{k<half} (x_{t-k} - x_{t-k-half}); the lagged
  // differences stay well scaled even when x itself wanders far from zero.
  auto lagged = [&](std::size_t s) { return x[s] - x[s - half]; };

  CoefficientSeries out;
  out.level = level;
  out.channel = channel;
  out.values.resize(x.size() - len + 1);

  CompensatedSum window;
  for (std::size_t s = half; s < len; ++s) window.add(lagged(s));
  out.values[0] = scale * window.value();
  for (std::size_t t = len, k = 1; t < x.size(); ++t, ++k) {
    window.add(lagged(t));
    window.add(-lagged(t - half));
    out.values[k] = scale * window.value();
  }
  return out;
}

int max_level(std::size_t samples) {
  if (samples < 4) {
    throw ValidationError("need at least 4 samples for a level-1 decomposition, got " +
                          std::to_string(samples));
  }
  int level = static_cast<int>(std::bit_width(samples)) - 2;  // floor(log2 T) - 1
  if (level > kMaxFilterLevel) level = kMaxFilterLevel;
  while (level > 1 && samples - (std::size_t{1} << level) + 1 < kMinLevelCoefficients) --level;
  return level;
}

}  // namespace wavecov
