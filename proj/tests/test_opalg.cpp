#include <random>

#include <gtest/gtest.h>

#include "epchain/chain.hpp"
#include "epchain/dense.hpp"
#include "epchain/error.hpp"
#include "epchain/operator_expr.hpp"
#include "oracle.hpp"

using namespace epchain;

namespace {

OperatorExpr random_expr(int L, int terms, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint64_t> mask(0, (std::uint64_t{1} << L) - 1);
  std::uniform_int_distribution<long> num(-5, 5), den(1, 4);
  OperatorExpr a(L);
  for (int k = 0; k < terms; ++k) {
    a.add_term({mask(rng), mask(rng)}, ComplexRational(mpq_class(num(rng), den(rng)), mpq_class(num(rng), den(rng))));
  }
  return a;
}

}  // namespace

TEST(PauliProduct, Table) {
  auto xx = pauli_product(Pauli::X, Pauli::X);
  EXPECT_EQ(xx.phase, ComplexRational(1));
  EXPECT_EQ(xx.letter, Pauli::I);
  auto xy = pauli_product(Pauli::X, Pauli::Y);
  EXPECT_EQ(xy.phase, ComplexRational::i());
  EXPECT_EQ(xy.letter, Pauli::Z);
  auto iz = pauli_product(Pauli::I, Pauli::Z);
  EXPECT_EQ(iz.phase, ComplexRational(1));
  EXPECT_EQ(iz.letter, Pauli::Z);
}

TEST(PauliProduct, AgreesWithMatrices) {
  const oracle::M2 m[4] = {oracle::id2(), oracle::sx(), oracle::sy(), oracle::sz()};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      auto p = pauli_product(static_cast<Pauli>(a), static_cast<Pauli>(b));
      const oracle::M2 lhs = m[a] * m[b];
      const oracle::M2 rhs = p.phase.to_complex() * m[static_cast<int>(p.letter)];
      EXPECT_LT((lhs - rhs).norm(), 1e-15) << a << "," << b;
    }
}

TEST(SiteOp, ExpansionsMatchMatrices) {
  oracle::M2 plus;
  plus << 0, 2, 0, 0;
  const std::pair<SiteOp, oracle::M2> cases[] = {
      {SiteOp::I, oracle::id2()},  {SiteOp::X, oracle::sx()},           {SiteOp::Y, oracle::sy()},
      {SiteOp::Z, oracle::sz()},   {SiteOp::Plus, plus},                {SiteOp::Minus, plus.adjoint()},
      {SiteOp::ProjDown, oracle::pdown()}, {SiteOp::ProjUp, oracle::pup()}};
  for (const auto& [op, m] : cases) {
    EXPECT_LT((to_dense(OperatorExpr::site(1, 1, op)).matrix() - m).norm(), 1e-15);
  }
  auto pd = OperatorExpr::site(1, 1, SiteOp::ProjDown);
  EXPECT_EQ(pd.coefficient(PauliString::parse("I")), ComplexRational(mpq_class(1, 2)));
  EXPECT_EQ(pd.coefficient(PauliString::parse("Z")), ComplexRational(mpq_class(-1, 2)));
}

TEST(Multiply, Examples) {
  auto x = OperatorExpr::site(1, 1, SiteOp::X), y = OperatorExpr::site(1, 1, SiteOp::Y);
  EXPECT_EQ(multiply(x, y), OperatorExpr::site(1, 1, SiteOp::Z).scaled(ComplexRational::i()));

  auto pd = OperatorExpr::site(1, 1, SiteOp::ProjDown);
  EXPECT_EQ(multiply(pd, pd), pd);

  const ComplexRational half(mpq_class(1, 2));
  auto p = OperatorExpr::site(2, 1, SiteOp::Plus).scaled(half);
  auto m = OperatorExpr::site(2, 1, SiteOp::Minus).scaled(half);
  EXPECT_EQ(multiply(p, m), OperatorExpr::site(2, 1, SiteOp::ProjUp));
}

TEST(Multiply, LengthMismatchThrows) {
  EXPECT_THROW(multiply(OperatorExpr(1), OperatorExpr(2)), UsageError);
  EXPECT_THROW(conservation_residual(OperatorExpr(1), OperatorExpr(2)), UsageError);
}

TEST(Canonical, ZeroCoefficientsRemoved) {
  auto x = OperatorExpr::site(2, 1, SiteOp::X);
  EXPECT_TRUE((x - x).is_zero());
  EXPECT_EQ((x - x).size(), 0u);
  OperatorExpr a(2);
  a.add_term(PauliString::parse("XZ"), 3);
  a.add_term(PauliString::parse("XZ"), -3);
  EXPECT_TRUE(a.is_zero());
}

TEST(ConservationResidual, Examples) {
  // H = 2|up><down| on one site annihilates against ProjDown.
  auto h = OperatorExpr::site(1, 1, SiteOp::Plus);
  EXPECT_TRUE(conservation_residual(h, OperatorExpr::site(1, 1, SiteOp::ProjDown)).is_zero());

  auto h5 = build_h_nhs({1, 1.0, 1.0, 0.5});
  auto r = conservation_residual(h5, OperatorExpr::site(1, 1, SiteOp::ProjDown));
  EXPECT_FALSE(r.is_zero());
  oracle::M2 expect;
  expect << 0, 0.5, -0.5, 0;
  EXPECT_LT((to_dense(r).matrix() - expect).norm(), 1e-15);
  EXPECT_NEAR(to_dense(r).matrix().norm(), std::sqrt(0.5), 1e-15);

  auto hx = build_h_xxx({4, 1.0, 1.0, 0.0});
  EXPECT_TRUE(conservation_residual(hx, hx).is_zero());
}

TEST(Apply, Examples) {
  auto up = StateVector::basis(1, 0), down = StateVector::basis(1, 1);
  auto r = apply(OperatorExpr::site(1, 1, SiteOp::X), up);
  EXPECT_LT((r.amplitudes() - down.amplitudes()).norm(), 1e-15);

  auto dd = StateVector::basis(2, 3);
  auto h = apply(build_h_xxx({2, 1.0, 1.0, 0.0}), dd);
  EXPECT_LT((h.amplitudes() - dd.amplitudes()).norm(), 1e-15);

  auto raised = apply(OperatorExpr::site(1, 1, SiteOp::Plus).scaled(ComplexRational(mpq_class(1, 2))), down);
  EXPECT_LT((raised.amplitudes() - up.amplitudes()).norm(), 1e-15);
}

TEST(Dense, CapEnforced) {
  EXPECT_THROW(to_dense(OperatorExpr::identity(11)), UsageError);
  EXPECT_NO_THROW(to_dense(OperatorExpr::identity(3), 3));
  EXPECT_THROW(to_dense(OperatorExpr::identity(4), 3), UsageError);
}

TEST(Dense, HamiltonianMatchesKroneckerOracle) {
  for (int L = 1; L <= 6; ++L) {
    for (double delta : {0.0, 0.37, -0.2}) {
      const auto h = to_dense(build_h_nhs({L, 0.8, 1.3, delta})).matrix();
      EXPECT_LT(oracle::rel(h, oracle::h_nhs(L, 0.8, 1.3, delta)), 1e-14) << "L=" << L;
    }
  }
}

TEST(Property, MultiplyMatchesDenseProduct) {
  std::mt19937_64 rng(11);
  for (int L = 1; L <= 5; ++L) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto a = random_expr(L, 6, rng), b = random_expr(L, 6, rng);
      const auto ab = to_dense(multiply(a, b)).matrix();
      const auto ref = (to_dense(a).matrix() * to_dense(b).matrix()).eval();
      EXPECT_LT((ab - ref).norm() / std::max(1.0, ref.norm()), 1e-12);
    }
  }
}

TEST(Property, MultiplyAssociativeAndBilinear) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto a = random_expr(3, 4, rng), b = random_expr(3, 4, rng), c = random_expr(3, 4, rng);
    EXPECT_EQ(multiply(multiply(a, b), c), multiply(a, multiply(b, c)));
    EXPECT_EQ(multiply(a, b + c), multiply(a, b) + multiply(a, c));
    const ComplexRational s(mpq_class(3, 7), mpq_class(-2));
    EXPECT_EQ(multiply(a.scaled(s), b), multiply(a, b).scaled(s));
  }
}

TEST(Property, AdjointInvolutionAndDense) {
  std::mt19937_64 rng(7);
  for (int L = 1; L <= 5; ++L) {
    const auto a = random_expr(L, 8, rng);
    EXPECT_EQ(adjoint(adjoint(a)), a);
    EXPECT_EQ((to_dense(adjoint(a)).matrix() - to_dense(a).matrix().adjoint()).norm(), 0.0);
    EXPECT_TRUE((a + adjoint(a)).is_hermitian());
  }
}

TEST(Property, ApplyMatchesDense) {
  std::mt19937_64 rng(3);
  for (int L = 1; L <= 8; ++L) {
    const auto a = random_expr(L, 10, rng) + build_h_nhs({L, 1.0, 1.0, 0.3});
    const auto m = to_dense(a).matrix();
    const CompiledOperator c(a);
    for (int rep = 0; rep < 100; ++rep) {
      const StateVector v(L, oracle::random_state(m.rows(), rng));
      const Eigen::VectorXcd ref = m * v.amplitudes();
      const auto got = c.apply(v).amplitudes();
      ASSERT_LT((got - ref).norm(), 1e-13 * std::max(1.0, ref.norm())) << "L=" << L;
    }
  }
}

TEST(Property, ApplyLinear) {
  std::mt19937_64 rng(9);
  const auto a = random_expr(5, 12, rng);
  const StateVector u(5, oracle::random_state(32, rng)), v(5, oracle::random_state(32, rng));
  const cplx s(0.3, -1.2);
  const StateVector w(5, u.amplitudes() + s * v.amplitudes());
  const Eigen::VectorXcd lhs = apply(a, w).amplitudes();
  const Eigen::VectorXcd rhs = apply(a, u).amplitudes() + s * apply(a, v).amplitudes();
  EXPECT_LT((lhs - rhs).norm(), 1e-12);
}

TEST(Json, RoundTripExact) {
  std::mt19937_64 rng(1);
  const auto a = random_expr(4, 9, rng);
  const auto j = to_json(a);
  EXPECT_EQ(j["L"], 4);
  EXPECT_EQ(operator_from_json(j), a);
  const auto c3 = build_com_closed(3, 5);
  EXPECT_EQ(operator_from_json(nlohmann::json::parse(to_json(c3).dump())), c3);
}

TEST(Rational, ParseAndPrint) {
  EXPECT_EQ(parse_rational("-3/6"), mpq_class(-1, 2));
  EXPECT_EQ(rational_string(mpq_class(4, 8)), "1/2");
  EXPECT_THROW(parse_rational("1/0"), UsageError);
  EXPECT_THROW(parse_rational("abc"), UsageError);
  EXPECT_EQ(ComplexRational::from_double(0.375).re(), mpq_class(3, 8));
}
