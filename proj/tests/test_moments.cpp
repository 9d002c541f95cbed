#include <doctest.h>

#include <cmath>
#include <random>

#include "wavecov/error.hpp"
#include "wavecov/moments.hpp"

using namespace wavecov;

namespace {

MultiSignal gaussian(std::size_t T, std::size_t channels, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  MultiSignal x(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(channels));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index t = 0; t < x.rows(); ++t) x(t, c) = g(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("layout order") {
  const MomentLayout L(3, 4);
  CHECK(L.size() == 24);
  CHECK(L.position({0, 0, 1}) == 0);
  CHECK(L.position({0, 0, 4}) == 3);
  CHECK(L.position({0, 1, 1}) == 4);
  CHECK(L.position({1, 1, 1}) == 12);
  CHECK(L.position({2, 2, 4}) == 23);
  for (std::size_t p = 0; p < L.size(); ++p) CHECK(L.position(L.index(p)) == p);
  CHECK(L.position({1, 0, 1}) == L.position({0, 1, 1}));
  CHECK_THROWS_AS(L.position({0, 3, 1}), ValidationError);
  CHECK_THROWS_AS(L.position({0, 0, 5}), ValidationError);
}

TEST_CASE("wccv on small series") {
  CoefficientSeries a{1, 0, {-1, 1, -1}};
  CHECK(wccv(a, a) == doctest::Approx(1.0));
  CoefficientSeries z{1, 1, {0, 0, 0}};
  CHECK(wccv(a, z) == 0.0);
}

TEST_CASE("diagonal entries equal the univariate wavelet variance") {
  const MultiSignal x = gaussian(5000, 3, 1);
  const int J = 8;
  const MomentVector nu = moment_vector(x, J);
  for (std::size_t c = 0; c < 3; ++c) {
    const Eigen::VectorXd col = x.col(static_cast<Eigen::Index>(c));
    const Eigen::VectorXd wv = wavelet_variance(std::span<const double>(col.data(), col.size()), J);
    for (int j = 1; j <= J; ++j) CHECK(std::abs(nu[{c, c, j}] - wv[j - 1]) <= 1e-12 * std::abs(wv[j - 1]));
  }
}

TEST_CASE("one channel gives the wavelet variance sequence") {
  const MultiSignal x = gaussian(2048, 1, 2);
  const Eigen::VectorXd col = x.col(0);
  const MomentVector nu = moment_vector(x, 6);
  CHECK(nu.values == wavelet_variance(std::span<const double>(col.data(), col.size()), 6));
}

TEST_CASE("duplicated channel") {
  MultiSignal x(4096, 2);
  x.col(0) = gaussian(4096, 1, 3).col(0);
  x.col(1) = x.col(0);
  const MomentVector nu = moment_vector(x, 8);
  for (int j = 1; j <= 8; ++j) CHECK(nu[{0, 1, j}] == nu[{0, 0, j}]);
}

TEST_CASE("scaling equivariance") {
  MultiSignal x = gaussian(4096, 2, 4);
  const MomentVector a = moment_vector(x, 7);
  x.col(0) *= 3.0;
  const MomentVector b = moment_vector(x, 7);
  for (int j = 1; j <= 7; ++j) {
    CHECK(b[{0, 0, j}] == doctest::Approx(9.0 * a[{0, 0, j}]).epsilon(1e-12));
    CHECK(b[{0, 1, j}] == doctest::Approx(3.0 * a[{0, 1, j}]).epsilon(1e-12));
    CHECK(b[{1, 1, j}] == a[{1, 1, j}]);
  }
}

TEST_CASE("independent channels have cross moments near zero") {
  // Mean over 200 replicates against its own Monte Carlo standard error.
  const int R = 200, J = 8;
  const std::size_t T = 1 << 12;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(J), sq = Eigen::VectorXd::Zero(J);
  for (int r = 0; r < R; ++r) {
    const MomentVector nu = moment_vector(gaussian(T, 2, 100 + r), J);
    for (int j = 1; j <= J; ++j) {
      sum[j - 1] += nu[{0, 1, j}];
      sq[j - 1] += nu[{0, 1, j}] * nu[{0, 1, j}];
    }
  }
  for (int j = 0; j < J; ++j) {
    const double mean = sum[j] / R;
    const double se = std::sqrt((sq[j] / R - mean * mean) / (R - 1));
    CHECK(std::abs(mean) < 3.0 * se);
  }
}

TEST_CASE("level-1 variance of the white-noise wavelet variance") {
  // W_t = (x_t - x_{t-1}) / 2 is MA(1) with gamma_0 = s2/2, gamma_1 = -s2/4,
  // so the long-run variance of W_t^2 is 2 (gamma_0^2 + 2 gamma_1^2) = 3 s2^2 / 4.
  const std::size_t T = 1 << 14;
  const MultiSignal x = gaussian(T, 1, 5);
  HacOptions h;
  h.variance_floor = 0.0;
  const MomentCovariance cov = moment_covariance(x, 4, h);
  const double expect = 0.75 / static_cast<double>(T - 1);
  CHECK(cov.matrix(0, 0) == doctest::Approx(expect).epsilon(0.15));
}

TEST_CASE("covariance is symmetric and PSD") {
  const MultiSignal x = gaussian(1 << 12, 3, 6);
  const MomentCovariance cov = moment_covariance(x, 7);
  CHECK((cov.matrix - cov.matrix.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.matrix);
  CHECK(eig.eigenvalues().minCoeff() >= 0.0);
  CHECK(cov.support == (1u << 12) - (1u << 7) + 1);
}

TEST_CASE("two replicates give similar covariance estimates") {
  const MomentCovariance a = moment_covariance(gaussian(1 << 14, 1, 7), 6);
  const MomentCovariance b = moment_covariance(gaussian(1 << 14, 1, 8), 6);
  for (Eigen::Index k = 0; k < 6; ++k) CHECK(a.matrix(k, k) / b.matrix(k, k) == doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("diagonal-only covariance matches the full diagonal") {
  const MultiSignal x = gaussian(1 << 12, 2, 9);
  HacOptions h;
  const MomentCovariance full = moment_covariance(x, 6, h);
  h.diagonal_only = true;
  const MomentCovariance diag = moment_covariance(x, 6, h);
  CHECK(diag.diagonal_only);
  for (Eigen::Index k = 0; k < full.matrix.rows(); ++k) {
    CHECK(diag.matrix(k, k) == doctest::Approx(full.matrix(k, k)).epsilon(1e-9));
  }
}

TEST_CASE("repair_psd") {
  Eigen::MatrixXd m(3, 3);
  m << 1.0, 0.9, 0.9, 0.9, 1.0, -0.9, 0.9, -0.9, 1.0;
  const Eigen::MatrixXd r = repair_psd(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
  CHECK((r - r.transpose()).norm() == 0.0);
  for (Eigen::Index k = 0; k < 3; ++k) CHECK(r(k, k) == doctest::Approx(1.0).epsilon(1e-9));
  const Eigen::MatrixXd ok = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  CHECK((repair_psd(ok) - ok).norm() < 1e-10);
}

TEST_CASE("confidence intervals") {
  MomentVector nu{MomentLayout(2, 1), Eigen::Vector3d(0.0, 0.0, 1.0)};
  MomentCovariance cov;
  cov.matrix = Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal();
  const auto ci = confidence_intervals(nu, cov, 0.05);
  // (0,0) is a variance: lower bound floored at zero.
  CHECK(ci[0].lo == 0.0);
  CHECK(ci[1].lo == doctest::Approx(-1.959963985));
  CHECK(ci[1].hi == doctest::Approx(1.959963985));
  CHECK(ci[2].lo == 1.0);
  CHECK(ci[2].hi == 1.0);
  CHECK_THROWS_AS(confidence_intervals(nu, cov, 1.5), ValidationError);
}

TEST_CASE("level-1 interval coverage for white noise") {
  int covered = 0;
  const int R = 500;
  for (int r = 0; r < R; ++r) {
    const MultiSignal x = gaussian(1 << 11, 1, 1000 + r);
    const MomentVector nu = moment_vector(x, 3);
    const auto ci = confidence_intervals(nu, moment_covariance(x, 3), 0.05);
    if (ci[0].lo <= 0.5 && 0.5 <= ci[0].hi) ++covered;
  }
  const double rate = static_cast<double>(covered) / R;
  CHECK(rate >= 0.92);
  CHECK(rate <= 0.98);
}

TEST_CASE("too many levels for the sample") {
  CHECK_THROWS_AS(moment_vector(gaussian(64, 1, 1), 6), ValidationError);
}
