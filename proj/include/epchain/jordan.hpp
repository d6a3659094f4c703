#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epchain/dense.hpp"

namespace epchain {

inline constexpr double kDefaultRankTol = 1e-9;

// Generalized eigenvectors of H^dagger: H^dagger V1 = E V1, H^dagger Vn = E Vn + V(n-1).
struct JordanChain {
  double E = 0.0;
  std::vector<Eigen::VectorXcd> vectors;

  int order() const { return static_cast<int>(vectors.size()); }
};

// Max over n of |H^dagger Vn - E Vn - V(n-1)| / |Vn|.
double chain_residual(const Eigen::MatrixXcd& h, const JordanChain& c);
// Smallest singular value of [V1 ... VN].
double chain_min_singular(const JordanChain& c);

// Closed-form chain at the exceptional point of the open chain (delta = 0);
// vectors have 2^L entries, E is computed from H^dagger V1.
JordanChain heisenberg_chain(int L, double J = 1.0, double g = 1.0);

// V1 from the smallest right singular vector of H^dagger - E, then minimum-norm
// extensions until the extension residual exceeds tol.
JordanChain numeric_jordan_chain(const Eigen::MatrixXcd& h, double E, double tol = kDefaultRankTol);

enum class ComProvenance { ClosedForm, ChainConstructed, BruteForce };
std::string provenance_name(ComProvenance p);

struct ComBasis {
  std::vector<Eigen::MatrixXcd> operators;
  ComProvenance provenance = ComProvenance::ChainConstructed;
};

// Cn = sum_{j=1..n} |Vj><V(n-j+1)|, n = 1..N.
ComBasis coms_from_chain(const JordanChain& c);

inline constexpr int kBruteForceMaxDim = 128;
// Orthonormal (Frobenius) basis of {X : H^dagger X = X H}.
ComBasis com_space_bruteforce(const Eigen::MatrixXcd& h, double tol = kDefaultRankTol);

// |H^dagger C - C H|_F / |C|_F
double com_residual(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& c);

// Largest principal angle between span(a) and span(b); pi/2 if the ranks differ.
double max_principal_angle(const std::vector<Eigen::MatrixXcd>& a,
                           const std::vector<Eigen::MatrixXcd>& b, double tol = kDefaultRankTol);
// Largest angle between a vector of span(sub) and span(space).
double containment_angle(const std::vector<Eigen::MatrixXcd>& sub,
                         const std::vector<Eigen::MatrixXcd>& space, double tol = kDefaultRankTol);

struct SpinMatrices {
  Eigen::MatrixXcd x, y, z;
};
// Spin-(N-1)/2 in the z basis, m = s first.
SpinMatrices spin_matrices(int N);

struct BlockSpec {
  int N = 2;
  double E = 0.0;
  double delta = 0.0;
};

Eigen::MatrixXcd deformed_block(const BlockSpec& b);
Eigen::MatrixXcd auxiliary_block(const BlockSpec& b);
Eigen::MatrixXcd block_similarity(const BlockSpec& b);

struct BlockCorrespondence {
  Eigen::MatrixXcd c_aux;
  Eigen::MatrixXcd c_ep;
  cplx scale;           // c_ep = scale * (chain COM Cn of the delta = 0 block)
  double chain_residual;  // relative, after removing scale
  double scaling_residual;  // |S^dagger Cn S - delta^{(n-N)/2} Cn| / |.|
  double boundedness;     // max |entry| of S^dagger c_aux S
};
BlockCorrespondence block_com_correspondence(const BlockSpec& b, int n);

struct CorrespondenceRow {
  int n;
  double eigen_residual;    // |S Vn - lambda Vn| / |S Vn|
  double eigenvalue;        // lambda
  double eigenvalue_expected;  // delta^{((n-1) - L/2)/2}
  double scaling_residual;  // |S^dagger Cn S - delta^{(n-1-L)/2} Cn| / |.|
  double commutator_residual;  // |[Cn^A, H_XXX]| / (|Cn^A| |H_XXX|)
};
struct CorrespondenceReport {
  int L;
  double delta;
  std::vector<CorrespondenceRow> rows;
  double max_residual() const;
};
CorrespondenceReport heisenberg_correspondence_check(int L, double delta, double J = 1.0);

struct ObstructionReport {
  bool auxiliary_com_exact;     // [sum sz/2, H_XXX] == 0 symbolically
  std::vector<double> ratios;   // max/min nonzero diagonal magnitude per delta
  std::vector<double> exponents;  // distinct power-law exponents in delta
  bool diverges;
  bool ep_residual_nonzero;     // conservation_residual(H_NHS(0), sum sz/2) != 0
  bool passed() const { return auxiliary_com_exact && diverges && ep_residual_nonzero; }
};
ObstructionReport divergence_obstruction_check(int L, const std::vector<double>& deltas);

}  // namespace epchain
