#include <random>

#include <gtest/gtest.h>

#include "epchain/chain.hpp"
#include "epchain/circuit.hpp"
#include "epchain/error.hpp"
#include "oracle.hpp"

using namespace epchain;
using oracle::Mat;

namespace {

const cplx kI(0, 1);

// Test-side construction of the per-step branch operator from 2x2 pieces.
Mat branch_oracle(int L, double J, double dt, double delta) {
  const Mat u = oracle::expm(-kI * dt * (oracle::h_xxx(L, J) + oracle::field(L, oracle::sx())));
  const double d = (1.0 - delta) * dt;
  const oracle::M2 k = (std::cos(d) * oracle::id2() + std::sin(d) * oracle::sy()) / std::sqrt(2.0);
  return oracle::kron_all(std::vector<oracle::M2>(static_cast<std::size_t>(L), k)) * u;
}

CircuitProgram program(int L, int steps, double dt, double delta, TrotterMode m = TrotterMode::Auto) {
  return build_protocol({L, 1.0, 1.0, delta}, steps, dt, uniform_state(L), m);
}

}  // namespace

TEST(Trotter, Examples) {
  for (int L = 1; L <= 4; ++L) {
    EXPECT_LT((trotter_u({L, 1.0, 1.0, 0.0}, 0.0).matrix() - Mat::Identity(1 << L, 1 << L)).norm(), 1e-14);
  }
  const Mat u1 = trotter_u({1, 1.0, 1.0, 0.0}, 0.37).matrix();
  EXPECT_LT((u1 - (std::cos(0.37) * oracle::id2() - kI * std::sin(0.37) * oracle::sx())).norm(), 1e-14);
  const Mat u2 = trotter_u({2, 1.0, 1.0, 0.0}, 0.1).matrix();
  EXPECT_LT((u2.adjoint() * u2 - Mat::Identity(4, 4)).norm(), 1e-12);
  const Mat ref = oracle::expm(-kI * 0.1 * (oracle::h_xxx(2, 1.0) + oracle::field(2, oracle::sx())));
  EXPECT_LT((u2 - ref).norm(), 1e-12);
}

TEST(Trotter, SplitModes) {
  const SpinChainParams p{5, 1.0, 1.0, 0.0};
  const Mat exact = trotter_u(p, 0.05, TrotterMode::Exact).matrix();
  const Mat first = trotter_u(p, 0.05, TrotterMode::FirstOrder).matrix();
  const Mat second = trotter_u(p, 0.05, TrotterMode::SecondOrder).matrix();
  for (const Mat* m : {&first, &second, &exact}) EXPECT_LT((m->adjoint() * *m - Mat::Identity(32, 32)).norm(), 1e-12);
  const double e1 = (first - exact).norm(), e2 = (second - exact).norm();
  EXPECT_LT(e2, e1);
  const double e1h = (trotter_u(p, 0.025, TrotterMode::FirstOrder).matrix() - trotter_u(p, 0.025, TrotterMode::Exact).matrix()).norm();
  EXPECT_NEAR(e1 / e1h, 4.0, 0.4);  // local error O(dt^2)
  const Mat autou = trotter_u(p, 0.05).matrix();
  EXPECT_LT((autou - first).norm(), 1e-15);
  EXPECT_THROW(trotter_u({11, 1.0, 1.0, 0.0}, 0.1, TrotterMode::Exact), UsageError);
}

TEST(Gates, Rotation) {
  const Eigen::Matrix2cd r = rotation_r();
  EXPECT_LT((r.adjoint() * r - Eigen::Matrix2cd::Identity()).norm(), 1e-14);
  const Eigen::Vector2cd yup = Eigen::Vector2cd(1, kI) / std::sqrt(2.0), ydn = Eigen::Vector2cd(1, -kI) / std::sqrt(2.0);
  // Equal up to a global phase of the image.
  auto match = [](const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) {
    return (a - (b.dot(a) / std::abs(b.dot(a))) * b).norm();
  };
  EXPECT_LT(match(r * yup, Eigen::Vector2cd(1, 0)), 1e-14);
  EXPECT_LT(match(r * ydn, Eigen::Vector2cd(0, 1)), 1e-14);
  EXPECT_LT(std::abs((r * yup)[1]), 1e-14);
  EXPECT_LT(std::abs((r * ydn)[0]), 1e-14);
}

TEST(Gates, AncillaAndBranch) {
  const Eigen::Vector2cd a = ancilla_init(0.0).col(0);
  EXPECT_LT((a - Eigen::Vector2cd(1, 1) / std::sqrt(2.0)).norm(), 1e-15);
  const double d = 0.1;
  const Eigen::Matrix2cd b = branch_site_operator(d);
  EXPECT_LT((b - (std::cos(d) * oracle::id2() + std::sin(d) * oracle::sy()) / std::sqrt(2.0)).norm(), 1e-15);
  const Eigen::Matrix2cd r = rotation_r();
  // R^-1 diag(cos a, sin a) R with a = pi/4 - d gives the branch operator.
  Eigen::Matrix2cd k0 = Eigen::Matrix2cd::Zero();
  k0(0, 0) = std::cos(M_PI / 4 - d);
  k0(1, 1) = std::sin(M_PI / 4 - d);
  EXPECT_LT((r.adjoint() * k0 * r - b).norm(), 1e-14);
}

TEST(Gates, StatePrep) {
  std::mt19937_64 rng(8);
  for (int L = 1; L <= 4; ++L) {
    const StateVector psi(L, 2.5 * oracle::random_state(1 << L, rng));
    const Mat u = state_prep_unitary(psi);
    EXPECT_LT((u.adjoint() * u - Mat::Identity(1 << L, 1 << L)).norm(), 1e-13);
    EXPECT_LT((u.col(0) - psi.amplitudes() / psi.norm()).norm(), 1e-13);
  }
  EXPECT_THROW(state_prep_unitary(StateVector(2)), UsageError);
}

TEST(Protocol, GateStructure) {
  const auto prog = program(2, 1, 0.1, 0.0);
  ASSERT_EQ(prog.gates.size(), 1u + 1u + 2u * 5u);
  EXPECT_EQ(prog.gates[0].kind, GateKind::Init);
  EXPECT_EQ(prog.gates[1].kind, GateKind::Unitary);
  const GateKind per_site[] = {GateKind::R, GateKind::AncillaInit, GateKind::Cnot, GateKind::Measure, GateKind::RInv};
  for (int j = 0; j < 2; ++j)
    for (int g = 0; g < 5; ++g) {
      const auto& gate = prog.gates[static_cast<std::size_t>(2 + 5 * j + g)];
      EXPECT_EQ(gate.kind, per_site[g]);
      EXPECT_EQ(gate.site, j + 1);
      EXPECT_EQ(gate.step, 1);
    }
  EXPECT_NEAR(prog.dtilde, 0.1, 1e-15);
  EXPECT_NEAR(program(2, 1, 0.1, 0.4).dtilde, 0.06, 1e-15);
  EXPECT_EQ(program(3, 4, 0.1, 0.0).gates.size(), 1u + 4u * (1u + 3u * 5u));
  EXPECT_THROW(program(7, 1, 0.1, 0.0), UsageError);
  EXPECT_THROW(program(2, -1, 0.1, 0.0), UsageError);
}

TEST(Deterministic, UnitaryWhenDeltaIsOne) {
  const auto prog = program(2, 6, 0.1, 1.0);
  const auto br = run_deterministic(prog);
  const Mat u = trotter_u(prog.params, 0.1).matrix();
  Eigen::VectorXcd v = uniform_state(2).amplitudes();
  for (std::size_t k = 0; k < br.size(); ++k) {
    EXPECT_NEAR(br[k].amplitudes().squaredNorm(), std::pow(0.25, double(k)), 1e-14);
    EXPECT_LT((br[k].amplitudes() - std::pow(0.5, double(k)) * v).norm(), 1e-13);
    v = u * v;
  }
}

TEST(Deterministic, OneStepIdentity) {
  const double dt = 0.1;
  const auto prog = program(2, 1, dt, 0.0);
  const auto br = run_deterministic(prog);
  const Mat u = trotter_u(prog.params, dt).matrix();
  const oracle::M2 f = oracle::id2() + std::tan(dt) * oracle::sy();
  const Eigen::VectorXcd ref = std::pow(std::cos(dt) / std::sqrt(2.0), 2) * oracle::kron(f, f) * u * uniform_state(2).amplitudes();
  EXPECT_LT((br[1].amplitudes() - ref).norm(), 1e-12);
}

TEST(Property, BranchOperatorIdentity) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dd(0.0, 1.5);
  for (int L = 1; L <= 4; ++L) {
    const double delta = dd(rng);
    const auto prog = program(L, 10, 0.1, delta, TrotterMode::Exact);
    const Mat step = branch_step_operator(prog);
    EXPECT_LT((step - branch_oracle(L, 1.0, 0.1, delta)).norm(), 1e-12);
    const auto br = run_deterministic(prog);
    Eigen::VectorXcd v = uniform_state(L).amplitudes();
    for (std::size_t k = 0; k < br.size(); ++k) {
      EXPECT_LT((br[k].amplitudes() - v).norm(), 1e-12) << L << " " << k;
      v = step * v;
    }
  }
}

TEST(Property, FirstOrderConvergence) {
  // Normalized branch vs exp(-i H_NHS t) at t = 3 for dt and dt / 2.
  auto deviation = [](double dt) {
    const int steps = static_cast<int>(std::lround(3.0 / dt));
    const auto prog = program(2, steps, dt, 0.0);
    const auto br = run_deterministic(prog);
    const double scale = std::pow(std::sqrt(2.0) / std::cos(prog.dtilde), 2.0 * steps);
    const Eigen::VectorXcd got = br.back().amplitudes() * scale;
    const Mat h = oracle::h_nhs(2, 1.0, 1.0, 0.0);
    const Eigen::VectorXcd ref = oracle::expm(-kI * 3.0 * h) * uniform_state(2).amplitudes();
    return (got - ref).norm();
  };
  const double r1 = deviation(0.1) / deviation(0.05), r2 = deviation(0.05) / deviation(0.025);
  EXPECT_NEAR(r1, 2.0, 0.3);
  EXPECT_NEAR(r2, 2.0, 0.3);
}

TEST(Sampling, AcceptanceAtDeltaOne) {
  const auto prog = program(2, 5, 0.1, 1.0);
  const auto st = run_sampling(prog, 100000, 42);
  for (std::size_t k = 1; k < st.accepted.size(); ++k) {
    if (st.accepted[k - 1] < 100) continue;
    const double n = static_cast<double>(st.accepted[k - 1]);
    const double r = static_cast<double>(st.accepted[k]) / n;
    EXPECT_LT(std::abs(r - 0.25), 4.0 * std::sqrt(0.25 * 0.75 / n)) << k;
  }
}

TEST(Sampling, Invariants) {
  const auto prog = program(2, 10, 0.1, 0.3);
  const auto st = run_sampling(prog, 20000, 7);
  EXPECT_EQ(st.seed, 7u);
  EXPECT_EQ(st.shots, 20000u);
  for (std::size_t k = 0; k < st.total.size(); ++k) {
    EXPECT_EQ(st.total[k], 20000u);
    EXPECT_LE(st.accepted[k], st.total[k]);
    EXPECT_LE(st.all_down[k], st.accepted[k]);
    if (k > 0) EXPECT_LE(st.accepted[k], st.accepted[k - 1]);
  }
  EXPECT_EQ(st.accepted[0], 20000u);
  EXPECT_THROW(run_sampling(prog, 0, 1), UsageError);
}

TEST(Sampling, Deterministic) {
  const auto prog = program(2, 8, 0.1, 0.0);
  const auto a = run_sampling(prog, 5000, 99), b = run_sampling(prog, 5000, 99);
  EXPECT_EQ(a.accepted, b.accepted);
  EXPECT_EQ(a.all_down, b.all_down);
  const auto c = run_sampling(prog, 5000, 100);
  EXPECT_NE(a.all_down, c.all_down);
  setenv("EPCHAIN_THREADS", "1", 1);
  const auto d = run_sampling(prog, 5000, 99);
  unsetenv("EPCHAIN_THREADS");
  EXPECT_EQ(a.all_down, d.all_down);
  EXPECT_EQ(a.accepted, d.accepted);
}

TEST(Property, SamplingConsistency) {
  for (double delta : {0.0, 0.5}) {
    const auto prog = program(2, 30, 0.1, delta);
    const auto br = run_deterministic(prog);
    const auto st = run_sampling(prog, 100000, 2024);
    for (std::size_t k = 1; k < br.size(); ++k) {
      if (st.accepted[k - 1] == 0) continue;
      const double r = br[k].amplitudes().squaredNorm() / br[k - 1].amplitudes().squaredNorm();
      const double n = static_cast<double>(st.accepted[k - 1]);
      const double obs = static_cast<double>(st.accepted[k]) / n;
      EXPECT_LE(std::abs(obs - r), 4.0 * std::sqrt(r * (1 - r) / n) + 1e-12) << "delta=" << delta << " k=" << k;
    }
  }
}

TEST(Estimator, StepZero) {
  const auto prog = program(2, 3, 0.1, 0.0);
  const auto st = run_sampling(prog, 40000, 5);
  const auto raw = estimate_c1(st, prog), norm = estimate_c1(st, prog, EstimatorMode::Normalized);
  EXPECT_EQ(raw.values[0], norm.values[0]);
  EXPECT_NEAR(raw.values[0], 0.25, 4 * std::sqrt(0.25 * 0.75 / 40000));
  EXPECT_DOUBLE_EQ(deterministic_c1(prog, run_deterministic(prog))[0], 0.25);
}

TEST(Estimator, WithinErrorOfOracle) {
  for (double delta : {0.0, 1.0}) {
    const auto prog = program(2, 30, 0.1, delta);
    const auto det = deterministic_c1(prog, run_deterministic(prog));
    const auto st = run_sampling(prog, 100000, 11);
    const auto raw = estimate_c1(st, prog);
    ASSERT_EQ(raw.values.size(), det.size());
    for (std::size_t k = 0; k < det.size(); ++k) {
      const double p = det[k] / raw_normalization(prog, static_cast<int>(k));
      const double sigma = raw_normalization(prog, static_cast<int>(k)) * std::sqrt(p * (1 - p) / 1e5);
      EXPECT_LE(std::abs(raw.values[k] - det[k]), 4 * sigma) << delta << " " << k;
    }
    if (delta == 1.0) {
      // Unitary evolution of C1.
      const Mat u = trotter_u(prog.params, 0.1).matrix();
      Eigen::VectorXcd v = uniform_state(2).amplitudes();
      for (std::size_t k = 0; k < det.size(); ++k) {
        EXPECT_NEAR(det[k], std::norm(v[3]), 1e-12);
        v = u * v;
      }
    }
  }
}

TEST(Estimator, TruncationDiagnostic) {
  const auto prog = program(2, 20, 0.1, 0.0);
  const auto st = run_sampling(prog, 200, 3);
  const auto norm = estimate_c1(st, prog, EstimatorMode::Normalized);
  EXPECT_LT(norm.values.size(), 21u);
  EXPECT_FALSE(norm.diagnostic.empty());
  const auto raw = estimate_c1(st, prog);
  EXPECT_EQ(raw.values.size(), 21u);
  EXPECT_FALSE(raw.diagnostic.empty());
}

TEST(Estimator, ExactC1Flat) {
  const auto prog = program(2, 30, 0.1, 0.0);
  for (double v : exact_c1(prog)) EXPECT_NEAR(v, 0.25, 1e-12);
  const auto det = deterministic_c1(prog, run_deterministic(prog));
  for (double v : det) EXPECT_NEAR(v, 0.25, 0.05);
}

TEST(Sampling, DepolarizingChangesCounts) {
  const auto prog = program(2, 4, 0.1, 0.0);
  const auto a = run_sampling(prog, 20000, 1), b = run_sampling(prog, 20000, 1, {0.2});
  EXPECT_NE(a.all_down, b.all_down);
  EXPECT_THROW(run_sampling(prog, 10, 1, {1.5}), UsageError);
}
