#include "epchain/dense.hpp"

#include <bit>
#include <map>
#include <string>

#include "epchain/error.hpp"

namespace epchain {

namespace {

Eigen::Index checked_dim(int sites) {
  if (sites < 1 || sites > kMaxStateSites) {
    throw UsageError("site count must be in 1.." + std::to_string(kMaxStateSites));
  }
  return Eigen::Index{1} << sites;
}

cplx i_power(int k) {
  static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[k & 3];
}

// In-place Walsh-Hadamard transform: out[b] = sum_z in[z] (-1)^{popcount(z & b)}.
void walsh_hadamard(std::vector<cplx>& a) {
  const std::size_t n = a.size();
  for (std::size_t h = 1; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const cplx u = a[j], v = a[j + h];
        a[j] = u + v;
        a[j + h] = u - v;
      }
    }
  }
}

}  // namespace

StateVector::StateVector(int sites) : sites_(sites), amp_(Eigen::VectorXcd::Zero(checked_dim(sites))) {}

StateVector::StateVector(int sites, Eigen::VectorXcd amplitudes)
    : sites_(sites), amp_(std::move(amplitudes)) {
  if (amp_.size() != checked_dim(sites)) throw UsageError("state dimension is not 2^L");
  if (!amp_.allFinite()) throw NumericalError("non-finite amplitudes");
}

StateVector StateVector::basis(int sites, std::uint64_t index) {
  StateVector v(sites);
  if (static_cast<Eigen::Index>(index) >= v.dim()) throw UsageError("basis index out of range");
  v.amp_[static_cast<Eigen::Index>(index)] = 1.0;
  return v;
}

DenseOperator::DenseOperator(int sites) : sites_(sites) {
  const auto d = checked_dim(sites);
  m_ = Eigen::MatrixXcd::Zero(d, d);
}

DenseOperator::DenseOperator(int sites, Eigen::MatrixXcd matrix) : sites_(sites), m_(std::move(matrix)) {
  const auto d = checked_dim(sites);
  if (m_.rows() != d || m_.cols() != d) throw UsageError("operator dimension is not 2^L");
}

StateVector DenseOperator::operator*(const StateVector& v) const {
  if (v.sites() != sites_) throw UsageError("state/operator size mismatch");
  return {sites_, m_ * v.amplitudes()};
}

DenseOperator operator*(const DenseOperator& a, const DenseOperator& b) {
  if (a.sites_ != b.sites_) throw UsageError("operator size mismatch");
  return {a.sites_, a.m_ * b.m_};
}

CompiledOperator::CompiledOperator(const OperatorExpr& expr) : sites_(expr.length()) {
  const auto dim = static_cast<std::size_t>(checked_dim(sites_));
  // Clear the common denominator so the tables hold exact integers; non-dyadic
  // coefficients would otherwise carry a representation error that large,
  // non-normalized states amplify. The division happens once per result.
  mpz_class den = 1;
  for (const auto& [s, c] : expr.terms()) {
    mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.re().get_den_mpz_t());
    mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.im().get_den_mpz_t());
  }
  if (den > mpz_class(1) << 40) den = 1;
  denominator_ = den.get_d();
  const ComplexRational factor{mpq_class(den), mpq_class(0)};
  std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, cplx>>> by_x;
  for (const auto& [s, c] : expr.terms()) {
    // P(x,z)|b> = i^{|x&z|} (-1)^{|z&b|} |b ^ x>
    by_x[s.x].emplace_back(s.z, (c * factor).to_complex() * i_power(std::popcount(s.x & s.z)));
  }
  groups_.reserve(by_x.size());
  for (auto& [x, zs] : by_x) {
    Group g{x, std::vector<cplx>(dim, cplx{})};
    if (zs.size() > static_cast<std::size_t>(2 * sites_)) {
      for (const auto& [z, c] : zs) g.diagonal[z] += c;
      walsh_hadamard(g.diagonal);
    } else {
      for (std::size_t b = 0; b < dim; ++b) {
        cplx acc{};
        for (const auto& [z, c] : zs) acc += (std::popcount(z & b) & 1) ? -c : c;
        g.diagonal[b] = acc;
      }
    }
    groups_.push_back(std::move(g));
  }
}

void CompiledOperator::apply(std::span<const cplx> in, std::span<cplx> out) const {
  const std::size_t dim = std::size_t{1} << sites_;
  if (in.size() != dim || out.size() != dim) throw UsageError("state dimension mismatch");
  std::fill(out.begin(), out.end(), cplx{});
  for (const auto& g : groups_) {
    const cplx* d = g.diagonal.data();
    for (std::size_t b = 0; b < dim; ++b) out[b ^ g.x] += d[b] * in[b];
  }
  if (denominator_ != 1.0)
    for (auto& x : out) x /= denominator_;
}

StateVector CompiledOperator::apply(const StateVector& v) const {
  if (v.sites() != sites_) throw UsageError("state/operator size mismatch");
  StateVector r(sites_);
  apply(std::span<const cplx>(v.amplitudes().data(), static_cast<std::size_t>(v.dim())),
        std::span<cplx>(r.amplitudes().data(), static_cast<std::size_t>(r.dim())));
  return r;
}

cplx CompiledOperator::matrix_element(const StateVector& u, const StateVector& v) const {
  if (u.sites() != sites_ || v.sites() != sites_) throw UsageError("state/operator size mismatch");
  const std::size_t dim = std::size_t{1} << sites_;
  const cplx* pu = u.amplitudes().data();
  const cplx* pv = v.amplitudes().data();
  cplx acc{};
  for (const auto& g : groups_) {
    const cplx* d = g.diagonal.data();
    for (std::size_t b = 0; b < dim; ++b) acc += std::conj(pu[b ^ g.x]) * d[b] * pv[b];
  }
  return acc / denominator_;
}

DenseOperator to_dense(const OperatorExpr& a, int cap) {
  if (a.length() > cap) {
    throw UsageError("dense materialization capped at L=" + std::to_string(cap) +
                     "; use matrix-free application");
  }
  DenseOperator m(a.length());
  const auto dim = static_cast<std::uint64_t>(m.dim());
  std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, cplx>>> by_x;
  for (const auto& [s, c] : a.terms()) {
    by_x[s.x].emplace_back(s.z, c.to_complex() * i_power(std::popcount(s.x & s.z)));
  }
  for (const auto& [x, zs] : by_x) {
    for (std::uint64_t b = 0; b < dim; ++b) {
      cplx acc{};
      for (const auto& [z, c] : zs) acc += (std::popcount(z & b) & 1) ? -c : c;
      m.matrix()(static_cast<Eigen::Index>(b ^ x), static_cast<Eigen::Index>(b)) += acc;
    }
  }
  return m;
}

StateVector apply(const OperatorExpr& a, const StateVector& v) { return CompiledOperator(a).apply(v); }

cplx inner(const StateVector& u, const StateVector& v) {
  if (u.sites() != v.sites()) throw UsageError("state size mismatch");
  return u.amplitudes().dot(v.amplitudes());
}

}  // namespace epchain
