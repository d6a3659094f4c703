#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "epchain/operator_expr.hpp"

namespace epchain {

using cplx = std::complex<double>;

inline constexpr int kDefaultDenseCap = 10;
inline constexpr int kMaxStateSites = 26;

// 2^L amplitudes in the computational basis (site 1 = most significant bit,
// |up> = 0). Not necessarily normalized.
class StateVector {
 public:
  explicit StateVector(int sites);
  StateVector(int sites, Eigen::VectorXcd amplitudes);

  static StateVector basis(int sites, std::uint64_t index);

  int sites() const { return sites_; }
  Eigen::Index dim() const { return amp_.size(); }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }
  Eigen::VectorXcd& amplitudes() { return amp_; }
  cplx operator[](Eigen::Index i) const { return amp_[i]; }
  double norm() const { return amp_.norm(); }

 private:
  int sites_;
  Eigen::VectorXcd amp_;
};

// 2^L x 2^L complex matrix.
class DenseOperator {
 public:
  explicit DenseOperator(int sites);
  DenseOperator(int sites, Eigen::MatrixXcd matrix);

  int sites() const { return sites_; }
  Eigen::Index dim() const { return m_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return m_; }
  Eigen::MatrixXcd& matrix() { return m_; }

  DenseOperator adjoint() const { return {sites_, m_.adjoint()}; }
  StateVector operator*(const StateVector& v) const;
  friend DenseOperator operator*(const DenseOperator& a, const DenseOperator& b);

 private:
  int sites_;
  Eigen::MatrixXcd m_;
};

// Matrix-free form of an OperatorExpr: terms sharing an X-mask act as
// (A v)[b ^ x] += d_x(b) v[b] with a precomputed diagonal d_x.
class CompiledOperator {
 public:
  explicit CompiledOperator(const OperatorExpr& expr);

  int sites() const { return sites_; }
  std::size_t groups() const { return groups_.size(); }

  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  StateVector apply(const StateVector& v) const;
  // <u|A|v>, sesquilinear, no normalization.
  cplx matrix_element(const StateVector& u, const StateVector& v) const;
  cplx expectation(const StateVector& v) const { return matrix_element(v, v); }

 private:
  struct Group {
    std::uint64_t x;
    std::vector<cplx> diagonal;
  };
  int sites_;
  double denominator_ = 1.0;
  std::vector<Group> groups_;
};

DenseOperator to_dense(const OperatorExpr& a, int cap = kDefaultDenseCap);
StateVector apply(const OperatorExpr& a, const StateVector& v);

cplx inner(const StateVector& u, const StateVector& v);

}  // namespace epchain
