#pragma once

// Operators and states of the open non-Hermitian Heisenberg chain
//   H = J sum_j sigma_j . sigma_{j+1} + g sum_j sigma^x_j + i g (1 - delta) sum_j sigma^y_j
// and its exceptional point at delta = 0.

#include <string>

#include "epchain/dense.hpp"
#include "epchain/operator_expr.hpp"

namespace epchain {

struct SpinChainParams {
  int L = 6;
  double J = 1.0;
  double g = 1.0;
  double delta = 0.0;

  void validate() const;
};

struct DefectSpec {
  int site = 1;  // 1..L
  double theta = 0.0;
  double phi = 0.0;
};

OperatorExpr build_h_xxx(const SpinChainParams& p);
OperatorExpr build_h_nhs(const SpinChainParams& p);
// H_XXX + sqrt(delta (2 - delta)) sum_j sigma^x_j; requires 0 <= delta <= 2.
OperatorExpr build_h_ahs(const SpinChainParams& p);

// [exp(sigma^z / 2 * ln sqrt(delta / (2 - delta)))]^{(x) L}; requires 0 < delta < 2.
OperatorExpr build_similarity(const SpinChainParams& p);
// Same operator as a diagonal vector (entry b = S_bb).
Eigen::VectorXd similarity_diagonal(int L, double delta);

enum class C2Convention {
  Averaged,  // (1/L) sum_i m_i^x
  Summed,    // sum_i m_i^x (density pipeline)
};

// n = 1: (P_down)^{(x) L}; n = 2: sum of m_i^x; n = 3: two-defect pair form.
OperatorExpr build_com_closed(int n, int L, C2Convention c2 = C2Convention::Averaged);
OperatorExpr build_c1(int L);
OperatorExpr build_c2(int L, C2Convention c2 = C2Convention::Averaged);
OperatorExpr build_c3(int L);

// P_down^{(i-1)} (x) sigma^x/2 (x) P_down^{(L-i)}
OperatorExpr build_mx(int i, int L);
// Noether current of m^x; zero for i = 0 and i = L.
OperatorExpr build_current(int i, int L, double J = 1.0);

// Total S^z = sum_i sigma^z_i / 2.
OperatorExpr build_total_sz(int L);

// C3 and the pieces it is built from.
OperatorExpr build_defect_pair(int i, int j, int sign_i, int sign_j, int L);

StateVector uniform_state(int L);
StateVector polarized_state(int L);
StateVector defect_state(int L, const DefectSpec& d);
StateVector gaussian_defect_state(int L, double center, double width);

// Dispatch by kind name: uniform | polarized | defect | gaussian_defect.
struct StateRequest {
  std::string kind = "uniform";
  DefectSpec defect{};
  double center = 7.0;
  double width = 1.0;
};
StateVector build_state(int L, const StateRequest& req);

// Observable lookup: C1, C2, C2sum, C3, Sz, norm, mx<i>, j<i>.
OperatorExpr observable_by_name(const std::string& name, int L, double J = 1.0);

// Index of the fully polarized |down...down> basis state.
inline std::uint64_t polarized_index(int L) { return (std::uint64_t{1} << L) - 1; }

}  // namespace epchain
