#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "radlab/function_expr.hpp"

using namespace radlab;

TEST(FuncExpr, ParsesSumOfPowers) {
  const auto f = FuncExpr::parse("2*t^3 + 0.5 + t");
  ASSERT_EQ(f.terms().size(), 3u);
  EXPECT_DOUBLE_EQ(f(2.0), 2 * 8 + 0.5 + 2);
  EXPECT_EQ(f.leading().exponent, 3.0);
  EXPECT_EQ(f.lowest().exponent, 0.0);
}

TEST(FuncExpr, ZeroToTheZeroIsOne) {
  EXPECT_EQ(FuncExpr::parse("3")(0.0), 3.0);
  EXPECT_EQ(FuncExpr::parse("t^0")(0.0), 1.0);
  EXPECT_EQ(FuncExpr::parse("t^2")(0.0), 0.0);
}

TEST(FuncExpr, MergesAndSortsTerms) {
  const auto f = FuncExpr::parse("t^2 + 3*t^2 + 1");
  ASSERT_EQ(f.terms().size(), 2u);
  EXPECT_EQ(f.terms()[1].coeff, 4.0);
  EXPECT_EQ(f, FuncExpr::parse("1 + 4*t^2"));
}

TEST(FuncExpr, ScientificAndFractionalLiterals) {
  const auto f = FuncExpr::parse("1.5e-1*t^2.5");
  EXPECT_NEAR(f(4.0), 0.15 * 32.0, 1e-14);
}

TEST(FuncExpr, RejectsNegativeLiteral) {
  try {
    (void)FuncExpr::parse("t^-1");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("negative literal not allowed"), std::string::npos);
    EXPECT_EQ(e.position(), 2u);
  }
}

TEST(FuncExpr, RejectsMalformedInput) {
  EXPECT_THROW((void)FuncExpr::parse(""), ParseError);
  EXPECT_THROW((void)FuncExpr::parse("   "), ParseError);
  EXPECT_THROW((void)FuncExpr::parse("t +"), ParseError);
  EXPECT_THROW((void)FuncExpr::parse("2*x"), ParseError);
  EXPECT_THROW((void)FuncExpr::parse("t^"), ParseError);
  EXPECT_THROW((void)FuncExpr::parse("1e"), ParseError);
  EXPECT_THROW((void)FuncExpr::parse("0"), ParseError);
  EXPECT_THROW((void)FuncExpr::parse("t t"), ParseError);
}

TEST(FuncExpr, ScaledArgumentMatchesComposition) {
  const auto h = FuncExpr::parse("t^6");
  const auto g = h.with_scaled_argument(0.5);
  EXPECT_DOUBLE_EQ(g.leading().coeff, 1.0 / 64.0);
  EXPECT_EQ(g.to_string(), FuncExpr::parse("0.015625*t^6").to_string());
}

TEST(FuncExpr, CanonicalTextRoundTripsOnRandomSums) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coeff(0.01, 10.0), expo(0.0, 6.0);
  std::uniform_int_distribution<int> count(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<PowerTerm> terms;
    for (int k = count(rng); k > 0; --k) terms.push_back({coeff(rng), expo(rng)});
    const auto f = FuncExpr::from_terms(terms);
    const auto g = FuncExpr::parse(f.to_string());
    EXPECT_EQ(f, g) << f.to_string();
    const double t = 0.1 + trial * 0.05;
    EXPECT_EQ(f(t), g(t));
  }
}

TEST(FuncExpr, ScalingComposesOnRandomSums) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coeff(0.1, 3.0), expo(0.0, 5.0), lam(0.2, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = FuncExpr::from_terms({{coeff(rng), expo(rng)}, {coeff(rng), expo(rng)}});
    const double a = lam(rng), b = lam(rng);
    const auto lhs = f.with_scaled_argument(a).with_scaled_argument(b);
    const auto rhs = f.with_scaled_argument(a * b);
    for (double t : {0.3, 1.0, 7.0}) EXPECT_NEAR(lhs(t), rhs(t), 1e-12 * std::abs(rhs(t)));
  }
}

TEST(DeriveK, LeadingExponent) {
  EXPECT_EQ(derive_k(FuncExpr::parse("t^2 + 5*t")).leading_exponent, 2.0);
  EXPECT_EQ(derive_k(FuncExpr::parse("3")).leading_exponent, 0.0);
  EXPECT_EQ(derive_k(FuncExpr::parse("3")).leading_coeff, 3.0);
}

TEST(ValidateAssumptions, RequiresGrowingG1) {
  const auto one = FuncExpr::constant(1.0);
  const auto t = FuncExpr::power(1.0, 1.0);
  const auto rep = validate_assumptions(one, one, one, one, t);
  EXPECT_FALSE(rep.valid);
  ASSERT_FALSE(rep.errors.empty());
  EXPECT_NE(rep.errors[0].find("k1 > 0"), std::string::npos);
}

TEST(ValidateAssumptions, RequiresK2AtMostK1) {
  const auto one = FuncExpr::constant(1.0);
  const auto rep = validate_assumptions(one, one, FuncExpr::power(1, 1), FuncExpr::power(1, 2), FuncExpr::power(1, 1));
  EXPECT_FALSE(rep.valid);
  EXPECT_EQ(rep.k1, 1.0);
  EXPECT_EQ(rep.k2, 2.0);
}

TEST(ValidateAssumptions, AcceptsPowerFamily) {
  const auto one = FuncExpr::constant(1.0);
  const auto rep = validate_assumptions(one, one, FuncExpr::power(1, 2), FuncExpr::power(1, 1), FuncExpr::power(1, 6));
  EXPECT_TRUE(rep.valid);
  EXPECT_TRUE(rep.errors.empty());
}
