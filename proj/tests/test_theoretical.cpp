#include <doctest.h>

#include <cmath>
#include <random>

#include "wavecov/error.hpp"
#include "wavecov/theoretical.hpp"
#include "wavecov/wavelet.hpp"

using namespace wavecov;

namespace {

using Real = long double;

// Cov(D^a_s, D^b_{s+h}) for one block, written out per kind.
Real diff_cov(BlockKind kind, Real v, Real pa, Real pb, bool same, long h) {
  const long ah = h < 0 ? -h : h;
  switch (kind) {
    case BlockKind::WhiteNoise: return ah == 0 ? 2 * v : (ah == 1 ? -v : 0);
    case BlockKind::RandomWalk: return h == 0 ? v : 0;
    case BlockKind::Quantization:
      if (!same) return 0;
      return ah == 0 ? 6 * v : (ah == 1 ? -4 * v : (ah == 2 ? v : 0));
    case BlockKind::AutoRegressive: {
      auto g = [&](long k) { return v * (k >= 0 ? std::pow(pb, k) : std::pow(pa, -k)) / (1 - pa * pb); };
      return 2 * g(h) - g(h - 1) - g(h + 1);
    }
    case BlockKind::Drift: return 0;
  }
  return 0;
}

std::vector<Real> diff_taps(int j) {
  const long L = 1L << j;
  std::vector<Real> c(static_cast<std::size_t>(L - 1));
  Real s = 0;
  for (long l = 0; l + 1 < L; ++l) {
    s += (l < L / 2 ? 1 : -1) * std::ldexp(Real(1), -j);
    c[static_cast<std::size_t>(l)] = s;
  }
  return c;
}

// Sum over blocks of c' Gamma c plus the squared drift mean.
Real oracle(const Model& m, const Eigen::VectorXd& theta, std::size_t a, std::size_t b, int j) {
  const auto c = diff_taps(j);
  const auto vals = m.unpack(theta);
  Real total = 0, rate_a = 0, rate_b = 0;
  for (std::size_t k = 0; k < m.spec().blocks.size(); ++k) {
    const LatentBlock& blk = m.spec().blocks[k];
    const auto la = blk.local(a), lb = blk.local(b);
    if (blk.kind == BlockKind::Drift) {
      if (la) rate_a += vals[k].scale[static_cast<Eigen::Index>(*la)];
      if (lb) rate_b += vals[k].scale[static_cast<Eigen::Index>(*lb)];
      continue;
    }
    if (!la || !lb) continue;
    Real v = 0, pa = 0, pb = 0;
    if (blk.kind == BlockKind::Quantization) {
      if (a != b) continue;
      v = vals[k].scale[static_cast<Eigen::Index>(*la)];
    } else {
      v = vals[k].cov(static_cast<Eigen::Index>(*la), static_cast<Eigen::Index>(*lb));
    }
    if (blk.kind == BlockKind::AutoRegressive) {
      pa = vals[k].phi[static_cast<Eigen::Index>(*la)];
      pb = vals[k].phi[static_cast<Eigen::Index>(*lb)];
    }
    for (std::size_t l = 0; l < c.size(); ++l) {
      for (std::size_t n = 0; n < c.size(); ++n) {
        total += c[l] * c[n] * diff_cov(blk.kind, v, pa, pb, a == b, static_cast<long>(l) - static_cast<long>(n));
      }
    }
  }
  const Real q = std::ldexp(Real(1), j) / 4;
  return total + q * rate_a * q * rate_b;
}

ModelSpec mixed_spec() {
  ModelSpec s;
  s.channels = 2;
  LatentBlock wn{BlockKind::WhiteNoise, "wn", {0, 1}, {}};
  wn.set_full_cross();
  LatentBlock rw{BlockKind::RandomWalk, "rw", {0, 1}, {}};
  rw.set_full_cross();
  LatentBlock ar{BlockKind::AutoRegressive, "ar", {0, 1}, {}};
  ar.set_full_cross();
  s.blocks = {wn, rw, {BlockKind::Quantization, "qn", {0}, {}}, {BlockKind::Drift, "dr", {1}, {}}, ar};
  return s;
}

Eigen::VectorXd mixed_theta() {
  Eigen::VectorXd t(13);
  // wn (3), rw (3), qn, dr, ar phi (2) + z (3)
  t << 2.0, 0.5, 1.0, 1e-3, -2e-4, 4e-3, 0.3, 0.01, 0.6, -0.85, 1.5, 0.4, 0.9;
  return t;
}

}  // namespace

TEST_CASE("difference covariances of single blocks") {
  BlockValues rw{Eigen::MatrixXd::Constant(1, 1, 1.0), {}, {}};
  const LatentBlock rwb{BlockKind::RandomWalk, "rw", {0}, {}};
  CHECK(block_diff_crosscov(rwb, rw, 0, 0, 0) == 1.0);
  CHECK(block_diff_crosscov(rwb, rw, 0, 0, 1) == 0.0);

  const LatentBlock arb{BlockKind::AutoRegressive, "ar", {0}, {}};
  BlockValues ar{Eigen::MatrixXd::Constant(1, 1, 3.0), Eigen::VectorXd::Zero(1), {}};
  CHECK(block_diff_crosscov(arb, ar, 0, 0, 0) == doctest::Approx(6.0));
  CHECK(block_diff_crosscov(arb, ar, 0, 0, 1) == doctest::Approx(-3.0));
  CHECK(block_diff_crosscov(arb, ar, 0, 0, 2) == doctest::Approx(0.0));

  const LatentBlock qnb{BlockKind::Quantization, "qn", {0}, {}};
  BlockValues qn{{}, {}, Eigen::VectorXd::Ones(1)};
  CHECK(block_diff_crosscov(qnb, qn, 0, 0, 0) == 6.0);
  CHECK(block_diff_crosscov(qnb, qn, 0, 0, 1) == -4.0);
  CHECK(block_diff_crosscov(qnb, qn, 0, 0, -2) == 1.0);
  CHECK(block_diff_crosscov(qnb, qn, 0, 0, 3) == 0.0);
  CHECK_THROWS_AS(block_diff_crosscov(qnb, qn, 0, 1, 0), ValidationError);
}

TEST_CASE("cross-covariance symmetry under swapping channels") {
  const Model m(mixed_spec());
  const auto vals = m.unpack(mixed_theta());
  const LatentBlock& ar = m.spec().blocks[4];
  for (long h = -5; h <= 5; ++h) {
    CHECK(block_diff_crosscov(ar, vals[4], 0, 1, h) == doctest::Approx(block_diff_crosscov(ar, vals[4], 1, 0, -h)));
  }
  for (int j = 1; j <= 6; ++j) {
    CHECK(theoretical_moment(m, mixed_theta(), {0, 1, j}) == theoretical_moment(m, mixed_theta(), {1, 0, j}));
  }
}

TEST_CASE("AR1 Haar factor at hand-computed points") {
  // Level 1: (gamma_0 - gamma_1) / 2 with gamma_k = phi^k / (1 - phi^2).
  CHECK(haar_ar1_factor(0.5, 0.5, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  // Level 2: (1/16)(4/3)(4 + 2*0.5 - 4*0.25 - 2*0.125).
  CHECK(haar_ar1_factor(0.5, 0.5, 2) == doctest::Approx(0.3125).epsilon(1e-14));
}

TEST_CASE("closed forms at simple points") {
  ModelSpec s;
  s.channels = 1;
  s.blocks.push_back({BlockKind::WhiteNoise, "wn", {0}, {}});
  CHECK(theoretical_moment(Model(s), Eigen::VectorXd::Ones(1), {0, 0, 2}) == doctest::Approx(0.25));
  CHECK(theoretical_moment(Model(s), Eigen::VectorXd::Ones(1), {0, 0, 2}, MomentMethod::QuadraticForm) ==
        doctest::Approx(0.25));
  s.blocks[0].kind = BlockKind::RandomWalk;
  CHECK(theoretical_moment(Model(s), Eigen::VectorXd::Ones(1), {0, 0, 1}) == doctest::Approx(0.25));
  CHECK(theoretical_moment(Model(s), Eigen::VectorXd::Ones(1), {0, 0, 1}, MomentMethod::QuadraticForm) ==
        doctest::Approx(0.25));
  s.blocks[0].kind = BlockKind::Drift;
  CHECK(theoretical_moment(Model(s), Eigen::VectorXd::Ones(1), {0, 0, 3}) == doctest::Approx(4.0));
}

TEST_CASE("ramp coefficients are omega 2^(j-2)") {
  std::vector<double> ramp(600);
  for (std::size_t t = 0; t < ramp.size(); ++t) ramp[t] = 0.3 * static_cast<double>(t + 1);
  for (int j = 1; j <= 8; ++j) {
    for (double w : decompose(ramp, j).values) CHECK(w == doctest::Approx(0.3 * std::ldexp(1.0, j - 2)).epsilon(1e-12));
  }
}

TEST_CASE("closed forms agree with the independent quadratic form") {
  const Model m(mixed_spec());
  const Eigen::VectorXd t = mixed_theta();
  for (int j = 1; j <= 8; ++j) {
    for (auto [a, b] : {std::pair<std::size_t, std::size_t>{0, 0}, {0, 1}, {1, 1}}) {
      const double ref = static_cast<double>(oracle(m, t, a, b, j));
      CHECK(std::abs(theoretical_moment(m, t, {a, b, j}) - ref) <= 1e-10 * std::abs(ref));
      CHECK(std::abs(theoretical_moment(m, t, {a, b, j}, MomentMethod::QuadraticForm) - ref) <= 1e-10 * std::abs(ref));
    }
  }
}

TEST_CASE("random AR1 pairs with different coefficients") {
  ModelSpec s;
  s.channels = 2;
  LatentBlock ar{BlockKind::AutoRegressive, "ar", {0, 1}, {}};
  ar.set_full_cross();
  s.blocks.push_back(ar);
  const Model m(s);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.995, 0.995);
  for (int draw = 0; draw < 20; ++draw) {
    Eigen::VectorXd t(5);
    t << u(rng), u(rng), 1.3, 0.6 * std::sqrt(1.3 * 0.8) * (draw % 2 ? 1 : -1), 0.8;
    if (t[0] == 0.0 || t[1] == 0.0) continue;
    for (int j = 1; j <= 8; ++j) {
      const double ref = static_cast<double>(oracle(m, t, 0, 1, j));
      CHECK(std::abs(theoretical_moment(m, t, {0, 1, j}) - ref) <= 1e-10 * std::abs(ref));
    }
  }
}

TEST_CASE("additivity across blocks") {
  const Model m(mixed_spec());
  const Eigen::VectorXd t = mixed_theta();
  const MomentVector all = theoretical_vector(m, t, 9);
  const auto parts = block_contributions(m, t, 9);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(all.values.size());
  for (const auto& p : parts) sum += p.values;
  for (Eigen::Index k = 0; k < sum.size(); ++k) CHECK(std::abs(sum[k] - all.values[k]) <= 1e-12 * std::abs(all.values[k]));
}

TEST_CASE("channels sharing no block have zero cross moments") {
  ModelSpec s;
  s.channels = 2;
  s.blocks = {{BlockKind::WhiteNoise, "a", {0}, {}}, {BlockKind::RandomWalk, "b", {1}, {}}};
  const Model m(s);
  for (int j = 1; j <= 5; ++j) CHECK(theoretical_moment(m, Eigen::Vector2d(1.0, 1.0), {0, 1, j}) == 0.0);
}

TEST_CASE("jacobian") {
  const Model m(mixed_spec());
  const Eigen::VectorXd t = mixed_theta();
  const int J = 8;
  const Eigen::MatrixXd A = jacobian(m, t, J);
  const MomentLayout L(2, J);
  for (int j = 1; j <= J; ++j) {
    CHECK(A(static_cast<Eigen::Index>(L.position({0, 0, j})), 0) == doctest::Approx(std::ldexp(1.0, -j)));
    // sigma[1,1] loads nothing on (2,2).
    CHECK(A(static_cast<Eigen::Index>(L.position({1, 1, j})), 0) == 0.0);
  }
  // Five-point central differences in long double as reference.
  for (Eigen::Index p = 0; p < t.size(); ++p) {
    const double h = 1e-4 * std::max(1e-3, std::abs(t[p]));
    auto at = [&](double d) {
      Eigen::VectorXd x = t;
      x[p] += d;
      return theoretical_vector(m, x, J).values;
    };
    const Eigen::VectorXd fd = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
    for (Eigen::Index r = 0; r < fd.size(); ++r) {
      const double scale = std::max(std::abs(fd[r]), 1e-8 * A.col(p).cwiseAbs().maxCoeff());
      CHECK(std::abs(A(r, p) - fd[r]) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("out-of-domain theta is rejected") {
  const Model m(mixed_spec());
  Eigen::VectorXd t = mixed_theta();
  t[8] = 1.0;
  CHECK_THROWS_AS(theoretical_vector(m, t, 4), ValidationError);
}
