#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "wavecov/models.hpp"
#include "wavecov/moments.hpp"

namespace wavecov {

struct SimConfig {
  Model model;
  Eigen::VectorXd theta;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  /// Stream index; (seed, replicate) fixes the output bit for bit.
  std::uint64_t replicate = 0;
};

/// One trajectory of the latent model with Gaussian innovations; rows are
/// samples t = 1..T, columns are channels.
MultiSignal simulate(const SimConfig& cfg);

/// Replicates 0..count-1 of cfg (cfg.replicate is ignored). Generated in
/// parallel; the result does not depend on the thread count.
std::vector<MultiSignal> simulate_batch(const SimConfig& cfg, std::size_t count);

}  // namespace wavecov
