#include "epchain/jordan.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>

#include "epchain/chain.hpp"
#include "epchain/error.hpp"

namespace epchain {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

void require_square(const MatrixXcd& h) {
  if (h.rows() != h.cols() || h.rows() == 0) throw UsageError("matrix must be square and non-empty");
}

void require_open_delta(double delta) {
  if (!(delta > 0.0 && delta < 2.0)) throw UsageError("delta must lie in (0, 2)");
}

double delta_ratio(double delta) { return delta / (2.0 - delta); }

// Orthonormal basis of the span of the vectorized operators.
MatrixXcd span_basis(const std::vector<MatrixXcd>& ops, double tol) {
  if (ops.empty()) return {};
  const Eigen::Index n = ops.front().size();
  MatrixXcd m(n, static_cast<Eigen::Index>(ops.size()));
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (ops[k].size() != n) throw UsageError("operators differ in dimension");
    m.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const VectorXcd>(ops[k].data(), n);
  }
  Eigen::JacobiSVD<MatrixXcd> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > tol * s[0]) ++rank;
  return svd.matrixU().leftCols(rank);
}

double relative_diff(const MatrixXcd& a, const MatrixXcd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace

double chain_residual(const MatrixXcd& h, const JordanChain& c) {
  require_square(h);
  const MatrixXcd hd = h.adjoint();
  double worst = 0.0;
  for (int n = 0; n < c.order(); ++n) {
    VectorXcd r = hd * c.vectors[n] - c.E * c.vectors[n];
    if (n > 0) r -= c.vectors[n - 1];
    worst = std::max(worst, r.norm() / c.vectors[n].norm());
  }
  return worst;
}

double chain_min_singular(const JordanChain& c) {
  if (c.vectors.empty()) return 0.0;
  MatrixXcd m(c.vectors.front().size(), c.order());
  for (int n = 0; n < c.order(); ++n) m.col(n) = c.vectors[n];
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  return svd.singularValues().tail(1)[0];
}

JordanChain heisenberg_chain(int L, double J, double g) {
  if (L < 1 || L > kMaxStateSites) throw UsageError("L out of range");
  if (g == 0.0) throw UsageError("chain needs g != 0");
  const SpinChainParams p{L, J, g, 0.0};
  const CompiledOperator hd(build_h_nhs(p).adjoint());
  OperatorExpr raise(L);
  for (int i = 1; i <= L; ++i) {
    raise += OperatorExpr::site(L, i, LocalOp::of(SiteOp::Plus).scaled(mpq_class(1, 2)));
  }
  const CompiledOperator up(raise);

  JordanChain c;
  StateVector v = polarized_state(L);
  const StateVector hv = hd.apply(v);
  c.E = hv[static_cast<Eigen::Index>(polarized_index(L))].real();
  if ((hv.amplitudes() - c.E * v.amplitudes()).norm() > 1e-12 * std::max(1.0, std::abs(c.E))) {
    throw NumericalError("polarized state is not an eigenvector of H^dagger");
  }
  // c_n = 2^{1-n} (L+1-n)! / (L! (n-1)!) g^{1-n}, built incrementally.
  double coeff = 1.0;
  for (int n = 1; n <= L + 1; ++n) {
    if (n > 1) {
      v = up.apply(v);
      coeff *= 1.0 / (2.0 * (L + 2 - n) * (n - 1) * g);
    }
    c.vectors.push_back(coeff * v.amplitudes());
  }
  return c;
}

JordanChain numeric_jordan_chain(const MatrixXcd& h, double E, double tol) {
  require_square(h);
  const Eigen::Index d = h.rows();
  const MatrixXcd a = h.adjoint() - E * MatrixXcd::Identity(d, d);
  Eigen::JacobiSVD<MatrixXcd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double thresh = tol * std::max(s[0], 1.0);
  if (s[d - 1] > thresh) throw NumericalError("E is not an eigenvalue of H^dagger at this tolerance");

  JordanChain c;
  c.E = E;
  VectorXcd v1 = svd.matrixV().col(d - 1);
  Eigen::Index big = 0;
  v1.cwiseAbs().maxCoeff(&big);
  v1 *= std::conj(v1[big]) / std::abs(v1[big]);
  c.vectors.push_back(v1);

  while (c.order() < d) {
    const VectorXcd& b = c.vectors.back();
    VectorXcd x = VectorXcd::Zero(d);
    for (Eigen::Index k = 0; k < d && s[k] > thresh; ++k) {
      x += svd.matrixV().col(k) * (svd.matrixU().col(k).dot(b) / s[k]);
    }
    if ((a * x - b).norm() > tol * b.norm()) break;
    c.vectors.push_back(std::move(x));
  }
  return c;
}

std::string provenance_name(ComProvenance p) {
  switch (p) {
    case ComProvenance::ClosedForm: return "closed-form";
    case ComProvenance::ChainConstructed: return "chain-constructed";
    case ComProvenance::BruteForce: return "brute-force";
  }
  return "unknown";
}

ComBasis coms_from_chain(const JordanChain& c) {
  ComBasis out;
  out.provenance = ComProvenance::ChainConstructed;
  for (int n = 1; n <= c.order(); ++n) {
    const Eigen::Index d = c.vectors.front().size();
    MatrixXcd m = MatrixXcd::Zero(d, d);
    for (int j = 1; j <= n; ++j) m += c.vectors[j - 1] * c.vectors[n - j].adjoint();
    out.operators.push_back(std::move(m));
  }
  return out;
}

ComBasis com_space_bruteforce(const MatrixXcd& h, double tol) {
  require_square(h);
  const Eigen::Index d = h.rows();
  if (d > kBruteForceMaxDim) {
    throw UsageError("brute-force COM space limited to dimension " + std::to_string(kBruteForceMaxDim));
  }
  // Column-major vec: vec(H^dagger X - X H) = (I (x) H^dagger - H^T (x) I) vec(X).
  const MatrixXcd hd = h.adjoint();
  MatrixXcd k = MatrixXcd::Zero(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j) k.block(j * d, j * d, d, d) = hd;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const cplx t = h(j, i);  // (H^T)(i, j)
      if (t == cplx{}) continue;
      for (Eigen::Index r = 0; r < d; ++r) k(i * d + r, j * d + r) -= t;
    }
  }
  Eigen::BDCSVD<MatrixXcd> svd(k, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  ComBasis out;
  out.provenance = ComProvenance::BruteForce;
  for (Eigen::Index c = 0; c < d * d; ++c) {
    if (s[c] > tol * s[0]) continue;
    VectorXcd v = svd.matrixV().col(c);
    out.operators.emplace_back(Eigen::Map<const MatrixXcd>(v.data(), d, d));
  }
  return out;
}

double com_residual(const MatrixXcd& h, const MatrixXcd& c) {
  const double n = c.norm();
  return n == 0.0 ? 0.0 : (h.adjoint() * c - c * h).norm() / n;
}

double containment_angle(const std::vector<MatrixXcd>& sub, const std::vector<MatrixXcd>& space,
                         double tol) {
  const MatrixXcd qs = span_basis(sub, tol);
  const MatrixXcd qv = span_basis(space, tol);
  if (qs.cols() == 0) return 0.0;
  if (qv.cols() == 0) return std::numbers::pi / 2;
  const MatrixXcd rest = qs - qv * (qv.adjoint() * qs);
  Eigen::JacobiSVD<MatrixXcd> svd(rest);
  return std::asin(std::min(1.0, svd.singularValues()[0]));
}

double max_principal_angle(const std::vector<MatrixXcd>& a, const std::vector<MatrixXcd>& b,
                           double tol) {
  if (span_basis(a, tol).cols() != span_basis(b, tol).cols()) return std::numbers::pi / 2;
  return std::max(containment_angle(a, b, tol), containment_angle(b, a, tol));
}

SpinMatrices spin_matrices(int N) {
  if (N < 1) throw UsageError("spin block size must be >= 1");
  const double s = 0.5 * (N - 1);
  MatrixXcd plus = MatrixXcd::Zero(N, N), z = MatrixXcd::Zero(N, N);
  for (int a = 0; a < N; ++a) {
    const double m = s - a;
    z(a, a) = m;
    if (a > 0) plus(a - 1, a) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  const MatrixXcd minus = plus.adjoint();
  return {(plus + minus) / 2.0, (plus - minus) / cplx(0, 2), z};
}

Eigen::MatrixXcd deformed_block(const BlockSpec& b) {
  const auto s = spin_matrices(b.N);
  return b.E * MatrixXcd::Identity(b.N, b.N) + s.x + cplx(0, 1.0 - b.delta) * s.y;
}

Eigen::MatrixXcd auxiliary_block(const BlockSpec& b) {
  if (!(b.delta >= 0.0 && b.delta <= 2.0)) throw UsageError("auxiliary block needs 0 <= delta <= 2");
  const auto s = spin_matrices(b.N);
  return b.E * MatrixXcd::Identity(b.N, b.N) + std::sqrt(b.delta * (2.0 - b.delta)) * s.x;
}

Eigen::MatrixXcd block_similarity(const BlockSpec& b) {
  require_open_delta(b.delta);
  const double d = delta_ratio(b.delta);
  const double s = 0.5 * (b.N - 1);
  MatrixXcd m = MatrixXcd::Zero(b.N, b.N);
  for (int a = 0; a < b.N; ++a) m(a, a) = std::pow(d, 0.5 * (s - a));
  return m;
}

BlockCorrespondence block_com_correspondence(const BlockSpec& b, int n) {
  if (n < 1 || n > b.N) throw UsageError("COM index out of range");
  require_open_delta(b.delta);
  const int N = b.N;
  const double d = delta_ratio(b.delta);

  // Anti-diagonal a + b = 2N - n + 1 (1-based), seeded at the lower corner.
  MatrixXcd cp = MatrixXcd::Zero(N, N);
  int row = N, col = N - n + 1;
  double value = 1.0;
  while (true) {
    cp(row - 1, col - 1) = value;
    if (col == N) break;
    value *= std::sqrt(static_cast<double>(col) * (N - col)) /
             std::sqrt(static_cast<double>(row - 1) * (N + 1 - row));
    --row;
    ++col;
  }

  BlockCorrespondence r;
  const MatrixXcd s = block_similarity(b);
  r.c_aux = std::pow(d, 0.5 * (N - n)) * cp;
  r.c_ep = s.adjoint() * r.c_aux * s;
  r.boundedness = r.c_ep.cwiseAbs().maxCoeff();

  const MatrixXcd h0 = deformed_block({N, b.E, 0.0});
  const auto coms = coms_from_chain(numeric_jordan_chain(h0, b.E));
  if (static_cast<int>(coms.operators.size()) < n) throw NumericalError("chain shorter than block");
  const MatrixXcd& cn = coms.operators[n - 1];
  const cplx overlap = (cn.adjoint() * r.c_ep).trace();
  r.scale = overlap / cn.squaredNorm();
  r.chain_residual = (r.c_ep - r.scale * cn).norm() / r.c_ep.norm();
  r.scaling_residual = relative_diff(s.adjoint() * cn * s, std::pow(d, 0.5 * (n - N)) * cn);
  return r;
}

double CorrespondenceReport::max_residual() const {
  double worst = 0.0;
  for (const auto& row : rows) {
    worst = std::max({worst, row.eigen_residual, std::abs(row.eigenvalue / row.eigenvalue_expected - 1.0),
                      row.scaling_residual, row.commutator_residual});
  }
  return worst;
}

CorrespondenceReport heisenberg_correspondence_check(int L, double delta, double J) {
  require_open_delta(delta);
  const double d = delta_ratio(delta);
  const Eigen::VectorXd sdiag = similarity_diagonal(L, delta);
  const JordanChain chain = heisenberg_chain(L, J, 1.0);
  const auto coms = coms_from_chain(chain);
  const MatrixXcd hxxx = to_dense(build_h_xxx({L, J, 1.0, 0.0})).matrix();
  const double hnorm = hxxx.norm();
  const auto sd = sdiag.cast<cplx>().asDiagonal();

  CorrespondenceReport rep{L, delta, {}};
  for (int n = 1; n <= chain.order(); ++n) {
    CorrespondenceRow row{};
    row.n = n;
    const VectorXcd& v = chain.vectors[n - 1];
    const VectorXcd sv = sd * v;
    const cplx lambda = v.dot(sv) / v.squaredNorm();
    row.eigenvalue = lambda.real();
    row.eigen_residual = (sv - lambda * v).norm() / sv.norm();
    row.eigenvalue_expected = std::pow(d, 0.5 * ((n - 1) - 0.5 * L));

    const MatrixXcd& cn = coms.operators[n - 1];
    row.scaling_residual = relative_diff(sd * cn * sd, std::pow(d, 0.5 * (n - 1 - L)) * cn);
    const MatrixXcd ca = std::pow(d, 0.5 * (L - n + 1)) * cn;
    const MatrixXcd comm = ca * hxxx - hxxx * ca;
    const double denom = ca.norm() * hnorm;
    row.commutator_residual = denom == 0.0 ? comm.norm() : comm.norm() / denom;
    rep.rows.push_back(row);
  }
  return rep;
}

ObstructionReport divergence_obstruction_check(int L, const std::vector<double>& deltas) {
  if (deltas.size() < 2) throw UsageError("need at least two delta values");
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0.0 && deltas[k] < 1.0)) throw UsageError("delta values must lie in (0, 1)");
    if (k > 0 && !(deltas[k] < deltas[k - 1])) throw UsageError("delta sequence must decrease");
  }
  const OperatorExpr sz = build_total_sz(L);
  ObstructionReport rep{};
  rep.auxiliary_com_exact = conservation_residual(build_h_xxx({L, 1.0, 1.0, 0.0}), sz).size() == 0;
  rep.ep_residual_nonzero = conservation_residual(build_h_nhs({L, 1.0, 1.0, 0.0}), sz).size() != 0;

  // S^dagger sz S is diagonal: entry b = sz_b * S_bb^2.
  const Eigen::Index dim = Eigen::Index{1} << L;
  auto diagonal = [&](double delta) {
    const Eigen::VectorXd s = similarity_diagonal(L, delta);
    Eigen::VectorXd out(dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
      const int downs = std::popcount(static_cast<std::uint64_t>(b));
      out[b] = 0.5 * (L - 2 * downs) * s[b] * s[b];
    }
    return out;
  };
  std::vector<Eigen::VectorXd> diags;
  for (double delta : deltas) {
    diags.push_back(diagonal(delta));
    const Eigen::VectorXd& m = diags.back();
    double hi = 0.0, lo = INFINITY;
    for (Eigen::Index b = 0; b < dim; ++b) {
      const double a = std::abs(m[b]);
      if (a == 0.0) continue;
      hi = std::max(hi, a);
      lo = std::min(lo, a);
    }
    rep.ratios.push_back(hi / lo);
  }
  const double lr = std::log(delta_ratio(deltas.back()) / delta_ratio(deltas.front()));
  std::set<long long> seen;
  for (Eigen::Index b = 0; b < dim; ++b) {
    if (diags.front()[b] == 0.0) continue;
    const double e = std::log(std::abs(diags.back()[b] / diags.front()[b])) / lr;
    if (seen.insert(std::llround(e * 1e6)).second) rep.exponents.push_back(e);
  }
  std::sort(rep.exponents.begin(), rep.exponents.end());
  bool increasing = true;
  for (std::size_t k = 1; k < rep.ratios.size(); ++k) increasing &= rep.ratios[k] > rep.ratios[k - 1];
  rep.diverges = increasing && rep.exponents.size() >= 2;
  return rep;
}

}  // namespace epchain
