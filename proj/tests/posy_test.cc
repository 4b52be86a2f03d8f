#include "asr/posy.h"

#include <cmath>
#include <random>

#include "asr/error.h"
#include "asr/optimizer.h"
#include "gtest/gtest.h"

namespace asr {
namespace {

Monomial ObjectiveTerm(double alpha) {
  return Monomial{alpha, {{"d", 1}, {"c", 1}, {"s", 1}, {"b", -1}}};
}

TEST(MonomialTest, EvaluatesObjectiveTerm) {
  VariableValues v{{"d", 10}, {"c", 3}, {"s", 0.5}, {"b", 5}};
  EXPECT_DOUBLE_EQ(3.0, EvalMonomial(ObjectiveTerm(1.0), v));
}

TEST(MonomialTest, ZeroExponentsGiveCoefficient) {
  Monomial m{2.5, {{"x", 0}, {"y", 0}}};
  EXPECT_DOUBLE_EQ(2.5, EvalMonomial(m, {{"x", 7}, {"y", 0.3}}));
}

TEST(MonomialTest, MissingAndNonPositiveValues) {
  VariableValues v{{"d", 10}, {"c", 3}, {"s", 0.5}};
  try {
    EvalMonomial(ObjectiveTerm(1.0), v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(ErrorCode::kMissingVariable, e.code());
  }
  v["b"] = 0;
  try {
    EvalMonomial(ObjectiveTerm(1.0), v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(ErrorCode::kNonPositiveValue, e.code());
  }
}

TEST(PosynomialTest, SumsTerms) {
  Posynomial p{{Monomial{2, {{"x", 1}}}, Monomial{3, {{"x", 2}}}}};
  EXPECT_DOUBLE_EQ(5.0, EvalPosynomial(p, {{"x", 1}}));
  Posynomial single{{ObjectiveTerm(2.0)}};
  VariableValues v{{"d", 10}, {"c", 3}, {"s", 0.5}, {"b", 5}};
  EXPECT_DOUBLE_EQ(EvalMonomial(ObjectiveTerm(2.0), v), EvalPosynomial(single, v));
  Posynomial ratio{{Monomial{1, {{"x", 1}, {"y", -1}}}}};
  EXPECT_DOUBLE_EQ(2.0, EvalPosynomial(ratio, {{"x", 4}, {"y", 2}}));
}

Posynomial RandomPosynomial(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(0.01, 10);
  std::uniform_real_distribution<double> expo(-3, 3);
  std::uniform_int_distribution<int> terms(1, 6);
  Posynomial p;
  int n = terms(rng);
  for (int t = 0; t < n; ++t) {
    Monomial m{coef(rng), {}};
    for (const char* var : {"x", "y", "z"}) {
      if (rng() % 2) m.exponents[var] = expo(rng);
    }
    p.terms.push_back(m);
  }
  return p;
}

TEST(PosynomialTest, PositiveOnPositiveOrthant) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> value(1e-3, 1e3);
  for (int i = 0; i < 2000; ++i) {
    Posynomial p = RandomPosynomial(rng);
    VariableValues v{{"x", value(rng)}, {"y", value(rng)}, {"z", value(rng)}};
    EXPECT_GT(EvalPosynomial(p, v), 0);
  }
}

TEST(PosynomialTest, LogSpaceAgreesWithDirect) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> logv(-4, 4);
  for (int i = 0; i < 2000; ++i) {
    Posynomial p = RandomPosynomial(rng);
    VariableValues y{{"x", logv(rng)}, {"y", logv(rng)}, {"z", logv(rng)}};
    VariableValues x;
    for (const auto& [k, v] : y) x[k] = std::exp(v);
    double direct = EvalPosynomial(p, x);
    double via_log = std::exp(LogEvalPosynomial(p, y));
    EXPECT_NEAR(direct, via_log, 1e-9 * direct);
  }
}

GpInstance CanonicalInstance() {
  ProblemParams params;
  params.c_total = 100;
  std::vector<UserDemand> users{{"u1", "C", 10, 1, 10, 1}};
  return MakeAnycastInstance(params, users, CanonicalGraph());
}

TEST(ValidateStandardFormTest, CanonicalInstanceIsValid) {
  ValidationReport report = ValidateStandardForm(CanonicalInstance());
  EXPECT_TRUE(report.valid());
  EXPECT_TRUE(report.warnings.empty());
}

TEST(ValidateStandardFormTest, NegativeCoefficientNamesConstraint) {
  GpInstance g = CanonicalInstance();
  g.constraints[2].lhs.terms.push_back(Monomial{-1, {{"d[u1]", 1}}});
  ValidationReport report = ValidateStandardForm(g);
  ASSERT_FALSE(report.valid());
  EXPECT_NE(std::string::npos, report.violations[0].find("delay[u1]"));
}

TEST(ValidateStandardFormTest, EmptyConstraintListWarns) {
  GpInstance g = CanonicalInstance();
  g.constraints.clear();
  g.u.clear();
  ValidationReport report = ValidateStandardForm(g);
  EXPECT_TRUE(report.valid());
  EXPECT_EQ(1u, report.warnings.size());
}

TEST(ValidateStandardFormTest, ParameterInvariants) {
  GpInstance g = CanonicalInstance();
  g.params.alpha = 0;
  g.params.users[0].b_min_mbps = 20;
  EXPECT_EQ(2u, ValidateStandardForm(g).violations.size());
}

TEST(PerturbTest, AllOnesKeepsInstance) {
  GpInstance g = CanonicalInstance();
  GpInstance p = Perturb(g, std::vector<double>(g.constraints.size(), 1.0));
  EXPECT_EQ(g.u, p.u);
  EXPECT_EQ(g.constraints.size(), p.constraints.size());
}

TEST(PerturbTest, OriginalUntouchedAndErrors) {
  GpInstance g = CanonicalInstance();
  std::vector<double> u(g.constraints.size(), 1.2);
  GpInstance p = Perturb(g, u);
  EXPECT_EQ(u, p.u);
  EXPECT_EQ(std::vector<double>(g.constraints.size(), 1.0), g.u);
  try {
    Perturb(g, {1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(ErrorCode::kDimensionMismatch, e.code());
  }
  u[0] = 0;
  try {
    Perturb(g, u);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(ErrorCode::kNonPositivePerturbation, e.code());
  }
}

TEST(PerturbTest, InverseRestoresRightHandSides) {
  GpInstance g = CanonicalInstance();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(0.5, 2);
  std::vector<double> u, inv;
  for (std::size_t i = 0; i < g.constraints.size(); ++i) {
    u.push_back(dist(rng));
    inv.push_back(1.0 / u.back());
  }
  GpInstance twice = Perturb(Perturb(g, u), inv);
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_NEAR(g.u[i], twice.u[i], 1e-15);
  }
}

TEST(PerturbTest, LooseningKeepsFeasiblePoints) {
  GpInstance g = CanonicalInstance();
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> value(0.05, 20);
  std::uniform_real_distribution<double> scale(1.0, 1.5);
  for (int trial = 0; trial < 2000; ++trial) {
    VariableValues x{{"d[u1]", value(rng)},      {"c[u1]", value(rng)},
                     {"s[u1]", value(rng) / 20}, {"b[u1]", value(rng)},
                     {"load[S_A]", value(rng) / 20},
                     {"load[S_B]", value(rng) / 20}};
    std::vector<double> u(g.constraints.size()), looser(g.constraints.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = scale(rng) - 0.3;
      looser[i] = u[i] * scale(rng);
    }
    bool feasible = true;
    bool feasible_loose = true;
    for (std::size_t i = 0; i < g.constraints.size(); ++i) {
      double lhs = EvalPosynomial(g.constraints[i].lhs, x);
      feasible &= ConstraintHolds(lhs, u[i], g.constraints[i].relation, 0);
      feasible_loose &=
          ConstraintHolds(lhs, looser[i], g.constraints[i].relation, 0);
    }
    if (feasible) EXPECT_TRUE(feasible_loose);
  }
}

TEST(ResolvePerturbationTest, SelectorsApplyInOrder) {
  ProblemParams params;
  params.c_total = 100;
  std::vector<UserDemand> users{{"u1", "C", 10, 1, 10, 1},
                                {"u2", "C", 10, 1, 10, 1}};
  GpInstance g = MakeAnycastInstance(params, users, CanonicalGraph());
  std::vector<double> u = ResolvePerturbation(
      g, {{"*", 1.2}, {"delay", 0.9}, {"delay[u2]", 0.8}, {"load", 0.5}});
  ASSERT_EQ(8u, u.size());
  EXPECT_EQ((std::vector<double>{0.5, 1.2, 0.9, 1.2, 1.2, 0.8, 1.2, 1.2}), u);
  EXPECT_THROW(ResolvePerturbation(g, {{"latency", 0.9}}), Error);
}

}  // namespace
}  // namespace asr
