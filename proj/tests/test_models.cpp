#include <doctest.h>

#include <algorithm>

#include "wavecov/error.hpp"
#include "wavecov/models.hpp"

using namespace wavecov;

namespace {

ModelSpec wn_rw3() {
  ModelSpec s;
  s.channels = 3;
  s.blocks.push_back({BlockKind::WhiteNoise, "wn", {0, 1, 2}, {}});
  LatentBlock rw{BlockKind::RandomWalk, "rw", {0, 1, 2}, {}};
  rw.set_full_cross();
  s.blocks.push_back(rw);
  return s;
}

Eigen::VectorXd wn_rw3_theta() {
  Eigen::VectorXd t(9);
  t << 1.010e-4, 7.12e-5, 4.90e-5, 0.0119, -0.0004, 0.0048, 0.0220, 0.0093, 0.1628;
  return t;
}

bool has_rule(const ValidationReport& r, const std::string& rule) {
  return std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation& v) { return v.rule == rule; });
}

}  // namespace

TEST_CASE("block kind tags") {
  CHECK(parse_block_kind("ar1") == BlockKind::AutoRegressive);
  CHECK(parse_block_kind("WN") == BlockKind::WhiteNoise);
  CHECK(to_string(BlockKind::Quantization) == "QN");
  CHECK_THROWS_AS(parse_block_kind("GM"), ValidationError);
  CHECK(supports_cross(BlockKind::RandomWalk));
  CHECK_FALSE(supports_cross(BlockKind::Drift));
}

TEST_CASE("parameter layout and names") {
  const Model m(wn_rw3());
  REQUIRE(m.size() == 9);
  CHECK(m.params()[0].name == "wn.sigma[1,1]");
  CHECK(m.params()[3].name == "rw.lambda[1,1]");
  CHECK(m.params()[4].name == "rw.lambda[1,2]");
  CHECK(m.params()[5].name == "rw.lambda[1,3]");
  CHECK(m.params()[6].name == "rw.lambda[2,2]");
  CHECK(m.params()[8].name == "rw.lambda[3,3]");
  CHECK(m.find("rw.lambda[2,3]") == 7);
  CHECK(m.cross_params() == std::vector<std::size_t>{4, 5, 7});
  CHECK(m.is_linear());
  CHECK(m.classify() == ModelClass::M1);
}

TEST_CASE("default block names") {
  ModelSpec s;
  s.channels = 1;
  s.blocks.push_back({BlockKind::AutoRegressive, "", {0}, {}});
  s.blocks.push_back({BlockKind::AutoRegressive, "", {0}, {}});
  const Model m(s);
  CHECK(m.params()[0].name == "ar1_1.phi[1]");
  CHECK(m.params()[3].name == "ar1_2.z[1,1]");
}

TEST_CASE("pack and unpack round trip") {
  const Model m(wn_rw3());
  const Eigen::VectorXd t = wn_rw3_theta();
  const auto v = m.unpack(t);
  CHECK(v[0].cov(1, 1) == t[1]);
  CHECK(v[0].cov(0, 1) == 0.0);
  CHECK(v[1].cov(0, 2) == t[5]);
  CHECK(v[1].cov(2, 0) == t[5]);
  CHECK(m.pack(v) == t);
}

TEST_CASE("transform round trip") {
  ModelSpec s = wn_rw3();
  LatentBlock ar{BlockKind::AutoRegressive, "ar", {0, 1}, {}};
  ar.set_full_cross();
  s.blocks.push_back(ar);
  const Model m(s);
  Eigen::VectorXd t(m.size());
  t << wn_rw3_theta(), -0.4, 0.7, 2.0, -0.5, 1.0;
  REQUIRE_FALSE(m.domain_error(t));
  const Eigen::VectorXd back = m.from_unconstrained(m.to_unconstrained(t));
  for (Eigen::Index k = 0; k < t.size(); ++k) CHECK(back[k] == doctest::Approx(t[k]).epsilon(1e-12));
}

TEST_CASE("validation of the three-channel white noise plus random walk model") {
  const Eigen::VectorXd t = wn_rw3_theta();
  const ValidationReport r = validate(wn_rw3(), &t);
  CHECK(r.ok());
  CHECK(r.warnings.empty());
  CHECK(r.model_class == ModelClass::M1);
}

TEST_CASE("equal AR1 coefficients on a channel are rejected") {
  ModelSpec s;
  s.channels = 1;
  s.blocks.push_back({BlockKind::WhiteNoise, "wn", {0}, {}});
  s.blocks.push_back({BlockKind::AutoRegressive, "a", {0}, {}});
  s.blocks.push_back({BlockKind::AutoRegressive, "b", {0}, {}});
  Eigen::VectorXd t(5);
  t << 1.0, 0.5, 1.0, 0.5, 2.0;
  const ValidationReport r = validate(s, &t);
  CHECK(has_rule(r, "distinct-phi"));
  t[3] = 0.9;
  CHECK(validate(s, &t).ok());
  CHECK(validate(s, &t).model_class == ModelClass::M2);
}

TEST_CASE("non-PD white noise covariance is rejected") {
  ModelSpec s;
  s.channels = 2;
  LatentBlock wn{BlockKind::WhiteNoise, "wn", {0, 1}, {}};
  wn.set_full_cross();
  s.blocks.push_back(wn);
  Eigen::VectorXd t(3);
  t << 1.0, 1.5, 1.0;
  const ValidationReport r = validate(s, &t);
  CHECK_FALSE(r.ok());
  CHECK(has_rule(r, "PSD"));
  CHECK(Model(s).domain_error(t).has_value());
}

TEST_CASE("structural violations") {
  ModelSpec s;
  s.channels = 2;
  s.blocks.push_back({BlockKind::WhiteNoise, "wn", {0}, {}});
  CHECK(has_rule(validate(s), "coverage"));
  s.blocks.push_back({BlockKind::Quantization, "qn", {0, 1}, {{0, 1}}});
  CHECK(has_rule(validate(s), "structure"));
  CHECK_THROWS_AS(Model{s}, ValidationError);
  ModelSpec bad;
  bad.channels = 1;
  bad.blocks.push_back({BlockKind::RandomWalk, "rw", {3}, {}});
  CHECK_THROWS_AS(require_valid(bad), ValidationError);
}

TEST_CASE("declared class must match") {
  ModelSpec s = wn_rw3();
  s.declared_class = ModelClass::M2;
  CHECK(has_rule(validate(s), "class"));
  s.declared_class = ModelClass::M1;
  CHECK(validate(s).ok());
}

TEST_CASE("custom models warn") {
  ModelSpec s;
  s.channels = 1;
  s.blocks.push_back({BlockKind::RandomWalk, "rw", {0}, {}});
  s.blocks.push_back({BlockKind::AutoRegressive, "ar", {0}, {}});
  const ValidationReport r = validate(s);
  CHECK(r.ok());
  CHECK(r.model_class == ModelClass::Custom);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("domain errors") {
  const Model m(wn_rw3());
  Eigen::VectorXd t = wn_rw3_theta();
  t[0] = -1.0;
  CHECK(m.domain_error(t).has_value());
  CHECK_THROWS_AS(m.to_unconstrained(t), ValidationError);
  t = wn_rw3_theta();
  t[4] = 0.2;
  CHECK(m.domain_error(t).has_value());
}

TEST_CASE("restrict to one channel") {
  const Model m(wn_rw3());
  const SubModel sub = restrict_to_channel(m, 2);
  CHECK(sub.spec.channels == 1);
  CHECK(sub.spec.blocks.size() == 2);
  CHECK(sub.source_index == std::vector<std::size_t>{2, 8});
  CHECK(Model(sub.spec).params()[1].name == "rw.lambda[1,1]");
}

TEST_CASE("null model drops cross terms") {
  const Model m(wn_rw3());
  const SubModel sub = null_model(m);
  CHECK(Model(sub.spec).size() == 6);
  CHECK(sub.source_index == std::vector<std::size_t>{0, 1, 2, 3, 6, 8});
}

TEST_CASE("interchangeable AR1 blocks are put in ascending order") {
  ModelSpec s;
  s.channels = 1;
  s.blocks.push_back({BlockKind::AutoRegressive, "a", {0}, {}});
  s.blocks.push_back({BlockKind::AutoRegressive, "b", {0}, {}});
  const Model m(s);
  Eigen::VectorXd t(4);
  t << 0.9, 2.0, 0.1, 3.0;
  const Eigen::VectorXd c = m.canonicalize(t);
  CHECK(c[0] == 0.1);
  CHECK(c[1] == 3.0);
  CHECK(c[2] == 0.9);
  CHECK(c[3] == 2.0);
}
