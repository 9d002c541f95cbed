#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wavecov {

inline constexpr int kMaxFilterLevel = 30;

/// Smallest number of coefficients max_level() accepts at the coarsest level.
inline constexpr std::size_t kMinLevelCoefficients = 16;

/// Haar filter at decomposition level j.
///
/// taps[l] is +2^-j for l < 2^(j-1) and -2^-j otherwise, so the taps sum to
/// zero and white noise with variance s2 has level-j wavelet variance s2/2^j.
/// diff_taps[l] = taps[0] + ... + taps[l] (l = 0..L-2): filtering a series
/// with taps equals filtering its first differences with diff_taps.
struct HaarLevel {
  int level = 0;
  std::size_t length = 0;
  std::vector<double> taps;
  std::vector<double> diff_taps;
};

HaarLevel build_filter(int level);

/// Level-j coefficients of one channel where the filter fully overlaps the
/// data: values[k] is the coefficient ending at sample index L_j - 1 + k
/// (0-based), so there are M_j = T - L_j + 1 of them.
struct CoefficientSeries {
  int level = 0;
  std::size_t channel = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// Non-circular Haar decomposition at one level, O(T) regardless of level.
CoefficientSeries decompose(std::span<const double> x, int level, std::size_t channel = 0);

/// Coarsest usable level for T samples: floor(log2 T) - 1, lowered while
/// the coarsest level would have fewer than kMinLevelCoefficients
/// coefficients, but never below 1.
int max_level(std::size_t samples);

}  // namespace wavecov
