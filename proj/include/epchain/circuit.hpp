#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epchain/chain.hpp"
#include "epchain/dense.hpp"
#include "epchain/dynamics.hpp"

namespace epchain {

inline constexpr int kCircuitMaxSites = 6;

enum class TrotterMode { Auto, Exact, FirstOrder, SecondOrder };

// exp(-i dt (H_XXX + g sum sigma^x)): exact for Auto with L <= 3, bond-split otherwise.
DenseOperator trotter_u(const SpinChainParams& p, double dt, TrotterMode mode = TrotterMode::Auto);

// R = (e^{i pi/4} I + e^{-i pi/4} (X + Y + Z)) / 2
Eigen::Matrix2cd rotation_r();
// exp(-i (pi/4 - dtilde) sigma^y) with dtilde = g (1 - delta) dt
Eigen::Matrix2cd ancilla_init(double dtilde);
// Post-selected single-site action (cos dtilde + sin dtilde sigma^y) / sqrt(2).
Eigen::Matrix2cd branch_site_operator(double dtilde);

// Unitary taking |up...up> to psi / |psi| (Householder reflection times a phase).
Eigen::MatrixXcd state_prep_unitary(const StateVector& psi);

enum class GateKind { Init, Unitary, R, RInv, AncillaInit, Cnot, Measure };
std::string gate_name(GateKind k);

struct Gate {
  GateKind kind;
  int site;  // 1..L for single-site gates and the CNOT control, 0 otherwise
  int step;  // 0 for Init, 1..steps afterwards
};

struct CircuitProgram {
  SpinChainParams params;
  int steps = 0;
  double dt = 0.0;
  double dtilde = 0.0;
  Eigen::MatrixXcd u_init;
  Eigen::MatrixXcd u_step;
  Eigen::Matrix2cd r;
  Eigen::Matrix2cd ancilla;
  std::vector<Gate> gates;
};

CircuitProgram build_protocol(const SpinChainParams& p, int steps, double dt, const StateVector& init,
                              TrotterMode mode = TrotterMode::Auto);

// Per-step operator prod_j branch_site_operator_j * U(dt), composed directly.
Eigen::MatrixXcd branch_step_operator(const CircuitProgram& prog);

// Unnormalized all-accepted branch after k = 0..steps steps, executed gate by gate.
std::vector<StateVector> run_deterministic(const CircuitProgram& prog);

struct TrajectoryStats {
  std::uint64_t seed = 0;
  std::uint64_t shots = 0;
  std::vector<std::uint64_t> total;     // per recorded step 0..steps
  std::vector<std::uint64_t> accepted;
  std::vector<std::uint64_t> all_down;
};

struct SamplingOptions {
  double depolarizing = 0.0;  // per single-site gate Pauli error probability
};

TrajectoryStats run_sampling(const CircuitProgram& prog, std::uint64_t shots, std::uint64_t seed,
                             const SamplingOptions& opt = {});

enum class EstimatorMode { Raw, Normalized };

struct C1Estimate {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> stderrs;
  std::string diagnostic;
};

// Raw mode rescales by 2^{Lk}, the exact per-step branch weight of C1 at delta = 0.
double raw_normalization(const CircuitProgram& prog, int k);
C1Estimate estimate_c1(const TrajectoryStats& stats, const CircuitProgram& prog,
                       EstimatorMode mode = EstimatorMode::Raw);

// <b_k|C1|b_k> 2^{Lk} from deterministic branches.
std::vector<double> deterministic_c1(const CircuitProgram& prog, const std::vector<StateVector>& branches);
// <psi(t)|C1|psi(t)> under exp(-i H_NHS t), t = k dt.
std::vector<double> exact_c1(const CircuitProgram& prog);

}  // namespace epchain
