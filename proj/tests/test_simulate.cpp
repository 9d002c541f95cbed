#include <doctest.h>

#include <cmath>

#include "wavecov/error.hpp"
#include "wavecov/simulate.hpp"
#include "wavecov/theoretical.hpp"

using namespace wavecov;

namespace {

Model one_block(BlockKind kind, std::size_t channels, bool cross) {
  ModelSpec s;
  s.channels = channels;
  LatentBlock b{kind, "b", {}, {}};
  for (std::size_t c = 0; c < channels; ++c) b.channels.push_back(c);
  if (cross) b.set_full_cross();
  s.blocks.push_back(b);
  return Model(s);
}

Model wn_rw3() {
  ModelSpec s;
  s.channels = 3;
  s.blocks.push_back({BlockKind::WhiteNoise, "wn", {0, 1, 2}, {}});
  LatentBlock rw{BlockKind::RandomWalk, "rw", {0, 1, 2}, {}};
  rw.set_full_cross();
  s.blocks.push_back(rw);
  return Model(s);
}

Eigen::VectorXd wn_rw3_theta() {
  Eigen::VectorXd t(9);
  t << 1.010e-4, 7.12e-5, 4.90e-5, 0.0119, -0.0004, 0.0048, 0.0220, 0.0093, 0.1628;
  return t;
}

}  // namespace

TEST_CASE("drift is a ramp") {
  const MultiSignal x = simulate({one_block(BlockKind::Drift, 1, false), Eigen::VectorXd::Ones(1), 4, 1, 0});
  CHECK(x.col(0) == Eigen::Vector4d(1, 2, 3, 4));
}

TEST_CASE("determinism") {
  const SimConfig cfg{wn_rw3(), wn_rw3_theta(), 1000, 42, 3};
  CHECK(simulate(cfg) == simulate(cfg));
  SimConfig other = cfg;
  other.replicate = 4;
  CHECK(simulate(cfg) != simulate(other));
  other = cfg;
  other.seed = 43;
  CHECK(simulate(cfg) != simulate(other));
}

TEST_CASE("batch replicates match single draws") {
  SimConfig cfg{wn_rw3(), wn_rw3_theta(), 256, 7, 99};
  const auto batch = simulate_batch(cfg, 3);
  REQUIRE(batch.size() == 3);
  for (std::uint64_t r = 0; r < 3; ++r) {
    cfg.replicate = r;
    CHECK(batch[r] == simulate(cfg));
  }
  CHECK(batch[0] != batch[1]);
  CHECK(simulate_batch(cfg, 1)[0] == batch[0]);
  CHECK_THROWS_AS(simulate_batch(cfg, 0), ValidationError);
}

TEST_CASE("difference covariance of white noise plus random walk") {
  // Cov(dX) = Lambda + 2 Sigma.
  const std::size_t T = 1 << 18;
  const Eigen::VectorXd t = wn_rw3_theta();
  const MultiSignal x = simulate({wn_rw3(), t, T, 5, 0});
  const MultiSignal d = x.bottomRows(T - 1) - x.topRows(T - 1);
  const Eigen::MatrixXd S = d.transpose() * d / static_cast<double>(T - 1);
  Eigen::Matrix3d expect;
  expect << t[3] + 2 * t[0], t[4], t[5], t[4], t[6] + 2 * t[1], t[7], t[5], t[7], t[8] + 2 * t[2];
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      // Lag-1 correlation of dX from the white noise part adds to the
      // variance of the sample mean; a loose bound covers it.
      const double se = std::sqrt((expect(a, a) * expect(b, b) + expect(a, b) * expect(a, b)) * 3.0 / static_cast<double>(T));
      CHECK(std::abs(S(a, b) - expect(a, b)) < 3.0 * se);
    }
  }
}

TEST_CASE("stationary AR1 start") {
  // Variance of X_1 across replicates must equal z / (1 - phi^2) with no burn-in.
  const Model m = one_block(BlockKind::AutoRegressive, 1, false);
  const double phi = 0.99, z = 2.0;
  const auto batch = simulate_batch({m, Eigen::Vector2d(phi, z), 4, 17, 0}, 4000);
  double s2 = 0.0;
  for (const auto& x : batch) s2 += x(0, 0) * x(0, 0);
  s2 /= static_cast<double>(batch.size());
  const double expect = z / (1 - phi * phi);
  CHECK(std::abs(s2 - expect) < 3.0 * expect * std::sqrt(2.0 / static_cast<double>(batch.size())));
}

TEST_CASE("long AR1 path autocovariance") {
  const Model m = one_block(BlockKind::AutoRegressive, 1, false);
  const double phi = 0.7, z = 1.0;
  const std::size_t T = 1 << 17;
  const MultiSignal x = simulate({m, Eigen::Vector2d(phi, z), T, 3, 0});
  const double g0 = x.col(0).squaredNorm() / static_cast<double>(T);
  const double expect = z / (1 - phi * phi);
  // Var of the sample variance of an AR1: 2 g0^2 (1 + phi^2) / (1 - phi^2) / T.
  const double se = expect * std::sqrt(2.0 * (1 + phi * phi) / (1 - phi * phi) / static_cast<double>(T));
  CHECK(std::abs(g0 - expect) < 3.0 * se);
}

TEST_CASE("channels sharing a random walk") {
  const Model m = one_block(BlockKind::RandomWalk, 2, true);
  const Eigen::Vector3d t(1.0, 0.6, 2.0);
  const std::size_t T = 1 << 17;
  const MultiSignal x = simulate({m, t, T, 9, 0});
  const MultiSignal d = x.bottomRows(T - 1) - x.topRows(T - 1);
  const double c = d.col(0).dot(d.col(1)) / static_cast<double>(T - 1);
  CHECK(std::abs(c - 0.6) < 3.0 * std::sqrt((2.0 + 0.36) / static_cast<double>(T)));
}

TEST_CASE("quantization noise moments") {
  const Model m = one_block(BlockKind::Quantization, 1, false);
  const MultiSignal x = simulate({m, Eigen::VectorXd::Constant(1, 0.5), 1 << 17, 2, 0});
  // X = U_t - U_{t-1}: variance 2 Q^2, lag-1 covariance -Q^2.
  const Eigen::Index T = x.rows();
  const double v = x.col(0).squaredNorm() / static_cast<double>(T);
  const double c1 = x.col(0).head(T - 1).dot(x.col(0).tail(T - 1)) / static_cast<double>(T - 1);
  CHECK(v == doctest::Approx(1.0).epsilon(0.03));
  CHECK(c1 == doctest::Approx(-0.5).epsilon(0.05));
}

TEST_CASE("mean empirical moments match theory") {
  const Model m = wn_rw3();
  const Eigen::VectorXd t = wn_rw3_theta();
  const int R = 200, J = 8;
  const auto batch = simulate_batch({m, t, 1 << 12, 21, 0}, R);
  const MomentVector nu0 = theoretical_vector(m, t, J);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(nu0.values.size()), sq = sum;
  for (const auto& x : batch) {
    const Eigen::VectorXd v = moment_vector(x, J).values;
    sum += v;
    sq += v.cwiseAbs2();
  }
  // 120 entries checked jointly: Bonferroni bound at family-wise 1%.
  for (Eigen::Index k = 0; k < sum.size(); ++k) {
    const double mean = sum[k] / R;
    const double se = std::sqrt((sq[k] / R - mean * mean) / (R - 1));
    CHECK(std::abs(mean - nu0.values[k]) < 4.0 * se);
  }
}

TEST_CASE("invalid parameters are rejected") {
  const Model m = one_block(BlockKind::WhiteNoise, 1, false);
  CHECK_THROWS_AS(simulate({m, Eigen::VectorXd::Constant(1, -1.0), 10, 1, 0}), ValidationError);
  CHECK_THROWS_AS(simulate({m, Eigen::VectorXd::Constant(1, 1.0), 3, 1, 0}), ValidationError);
}
