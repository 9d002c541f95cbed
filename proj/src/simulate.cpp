#include "wavecov/simulate.hpp"

#include <exception>
#include <random>
#include <string>

#include "wavecov/error.hpp"

namespace wavecov {
namespace {

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t replicate) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replicate), static_cast<std::uint32_t>(replicate >> 32)};
    engine_.seed(seq);
  }

  double normal() { return gauss_(engine_); }

  void fill(Eigen::Ref<Eigen::VectorXd> v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = normal();
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_;
};

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& cov, const std::string& what) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw ValidationError(what + " covariance is not positive definite");
  return llt.matrixL();
}

}  // namespace

MultiSignal simulate(const SimConfig& cfg) {
  const Model& model = cfg.model;
  if (cfg.samples < 4) throw ValidationError("simulation needs at least 4 samples");
  require_valid(model.spec(), &cfg.theta);
  const auto values = model.unpack(cfg.theta);
  const Eigen::Index T = static_cast<Eigen::Index>(cfg.samples);
  MultiSignal x = MultiSignal::Zero(T, static_cast<Eigen::Index>(model.channels()));
  Stream rng(cfg.seed, cfg.replicate);

  for (std::size_t k = 0; k < model.spec().blocks.size(); ++k) {
    const LatentBlock& b = model.spec().blocks[k];
    const BlockValues& v = values[k];
    const Eigen::Index n = static_cast<Eigen::Index>(b.size());
    auto col = [&](Eigen::Index a) { return static_cast<Eigen::Index>(b.channels[static_cast<std::size_t>(a)]); };
    Eigen::VectorXd z(n);

    switch (b.kind) {
      case BlockKind::WhiteNoise: {
        const Eigen::MatrixXd L = cholesky(v.cov, b.name);
        for (Eigen::Index t = 0; t < T; ++t) {
          rng.fill(z);
          const Eigen::VectorXd e = L * z;
          for (Eigen::Index a = 0; a < n; ++a) x(t, col(a)) += e[a];
        }
        break;
      }
      case BlockKind::RandomWalk: {
        const Eigen::MatrixXd L = cholesky(v.cov, b.name);
        Eigen::VectorXd level = Eigen::VectorXd::Zero(n);
        for (Eigen::Index t = 0; t < T; ++t) {
          rng.fill(z);
          level += L * z;
          for (Eigen::Index a = 0; a < n; ++a) x(t, col(a)) += level[a];
        }
        break;
      }
      case BlockKind::Quantization: {
        Eigen::VectorXd prev(n);
        rng.fill(prev);
        const Eigen::VectorXd sd = v.scale.cwiseSqrt();
        for (Eigen::Index t = 0; t < T; ++t) {
          rng.fill(z);
          for (Eigen::Index a = 0; a < n; ++a) x(t, col(a)) += sd[a] * (z[a] - prev[a]);
          prev = z;
        }
        break;
      }
      case BlockKind::Drift:
        for (Eigen::Index t = 0; t < T; ++t) {
          for (Eigen::Index a = 0; a < n; ++a) x(t, col(a)) += v.scale[a] * static_cast<double>(t + 1);
        }
        break;
      case BlockKind::AutoRegressive: {
        Eigen::MatrixXd gamma0(n, n);
        for (Eigen::Index a = 0; a < n; ++a) {
          for (Eigen::Index c = 0; c < n; ++c) gamma0(a, c) = v.cov(a, c) / (1.0 - v.phi[a] * v.phi[c]);
        }
        const Eigen::MatrixXd L0 = cholesky(gamma0, b.name + " stationary");
        const Eigen::MatrixXd L = cholesky(v.cov, b.name);
        rng.fill(z);
        Eigen::VectorXd state = L0 * z;
        for (Eigen::Index t = 0; t < T; ++t) {
          rng.fill(z);
          state = v.phi.cwiseProduct(state) + L * z;
          for (Eigen::Index a = 0; a < n; ++a) x(t, col(a)) += state[a];
        }
        break;
      }
    }
  }
  return x;
}

std::vector<MultiSignal> simulate_batch(const SimConfig& cfg, std::size_t count) {
  if (count == 0) throw ValidationError("replicate count must be at least 1");
  require_valid(cfg.model.spec(), &cfg.theta);
  std::vector<MultiSignal> out(count);
  std::vector<std::exception_ptr> failures(count);
  const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long r = 0; r < n; ++r) {
    try {
      SimConfig c = cfg;
      c.replicate = static_cast<std::uint64_t>(r);
      out[static_cast<std::size_t>(r)] = simulate(c);
    } catch (...) {
      failures[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

}  // namespace wavecov
