#include "epchain/chain.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <vector>

#include "epchain/error.hpp"

namespace epchain {

namespace {

LocalOp down() { return LocalOp::of(SiteOp::ProjDown); }

LocalOp ladder(int sign) { return LocalOp::of(sign > 0 ? SiteOp::Plus : SiteOp::Minus); }

ComplexRational exact(double v) { return ComplexRational::from_double(v); }

void check_sites(int L) {
  if (L < 1 || L > OperatorExpr::kMaxSites) throw UsageError("L must be >= 1");
}

OperatorExpr field(int L, Pauli p, const ComplexRational& c) {
  OperatorExpr r(L);
  for (int j = 1; j <= L; ++j) r += OperatorExpr::site(L, j, LocalOp::pauli(p).scaled(c));
  return r;
}

}  // namespace

void SpinChainParams::validate() const {
  check_sites(L);
  if (!std::isfinite(J) || !std::isfinite(g) || !std::isfinite(delta)) {
    throw UsageError("chain parameters must be finite");
  }
}

OperatorExpr build_h_xxx(const SpinChainParams& p) {
  p.validate();
  OperatorExpr h(p.L);
  const ComplexRational J = exact(p.J);
  for (int j = 1; j < p.L; ++j) {
    for (Pauli a : {Pauli::X, Pauli::Y, Pauli::Z}) {
      std::vector<LocalOp> f(p.L, LocalOp::of(SiteOp::I));
      f[j - 1] = LocalOp::pauli(a);
      f[j] = LocalOp::pauli(a);
      h += OperatorExpr::tensor(f).scaled(J);
    }
  }
  return h;
}

OperatorExpr build_h_nhs(const SpinChainParams& p) {
  OperatorExpr h = build_h_xxx(p);
  const ComplexRational g = exact(p.g);
  h += field(p.L, Pauli::X, g);
  h += field(p.L, Pauli::Y, ComplexRational::i() * g * exact(1.0 - p.delta));
  return h;
}

OperatorExpr build_h_ahs(const SpinChainParams& p) {
  if (!(p.delta >= 0.0 && p.delta <= 2.0)) {
    throw UsageError("auxiliary Hermitian chain needs 0 <= delta <= 2");
  }
  OperatorExpr h = build_h_xxx(p);
  h += field(p.L, Pauli::X, exact(std::sqrt(p.delta * (2.0 - p.delta))));
  return h;
}

Eigen::VectorXd similarity_diagonal(int L, double delta) {
  check_sites(L);
  if (!(delta > 0.0 && delta < 2.0)) throw UsageError("similarity transform needs 0 < delta < 2");
  const double d = delta / (2.0 - delta);
  const double up = std::pow(d, 0.25), dn = std::pow(d, -0.25);
  const Eigen::Index dim = Eigen::Index{1} << L;
  Eigen::VectorXd s(dim);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const int downs = std::popcount(static_cast<std::uint64_t>(b));
    s[b] = std::pow(up, L - downs) * std::pow(dn, downs);
  }
  return s;
}

OperatorExpr build_similarity(const SpinChainParams& p) {
  p.validate();
  if (!(p.delta > 0.0 && p.delta < 2.0)) {
    throw UsageError("similarity transform needs 0 < delta < 2");
  }
  const double d = p.delta / (2.0 - p.delta);
  const double up = std::pow(d, 0.25), dn = std::pow(d, -0.25);
  LocalOp s;
  s.coeff[0] = exact(0.5 * (up + dn));
  s.coeff[3] = exact(0.5 * (up - dn));
  std::vector<LocalOp> f(p.L, s);
  return OperatorExpr::tensor(f);
}

OperatorExpr build_c1(int L) {
  check_sites(L);
  std::vector<LocalOp> f(L, down());
  return OperatorExpr::tensor(f);
}

OperatorExpr build_mx(int i, int L) {
  check_sites(L);
  if (i < 1 || i > L) throw UsageError("m^x site index out of range");
  std::vector<LocalOp> f(L, down());
  f[i - 1] = LocalOp::pauli(Pauli::X).scaled(mpq_class(1, 2));
  return OperatorExpr::tensor(f);
}

OperatorExpr build_c2(int L, C2Convention c2) {
  OperatorExpr r(L);
  for (int i = 1; i <= L; ++i) r += build_mx(i, L);
  if (c2 == C2Convention::Averaged) r = r.scaled(mpq_class(1, L));
  return r;
}

OperatorExpr build_defect_pair(int i, int j, int sign_i, int sign_j, int L) {
  check_sites(L);
  if (i < 1 || i > L || j < 1 || j > L) throw UsageError("pair site index out of range");
  std::vector<LocalOp> f(L, down());
  const mpq_class half(1, 2);
  if (i == j) {
    if (sign_i == sign_j) return OperatorExpr(L);
    f[i - 1] = (ladder(sign_i) * ladder(sign_j)).scaled(half);
  } else {
    f[i - 1] = ladder(sign_i).scaled(half);
    f[j - 1] = ladder(sign_j).scaled(half);
  }
  return OperatorExpr::tensor(f);
}

OperatorExpr build_c3(int L) {
  check_sites(L);
  OperatorExpr r(L);
  const mpq_class pref(1, 8 * L * L);
  for (int s : {+1, -1}) {
    for (int i = 1; i <= L; ++i) {
      for (int j = 1; j <= L; ++j) {
        // Same-sign pairs vanish on the diagonal, which is all there is at L = 1.
        if (i != j) {
          r += build_defect_pair(i, j, s, s, L).scaled(mpq_class(pref * mpq_class(L, L - 1)));
        }
        r += build_defect_pair(i, j, s, -s, L).scaled(pref);
      }
    }
  }
  r -= build_c1(L).scaled(mpq_class(1, 4 * L));
  return r;
}

OperatorExpr build_com_closed(int n, int L, C2Convention c2) {
  switch (n) {
    case 1: return build_c1(L);
    case 2: return build_c2(L, c2);
    case 3: return build_c3(L);
    default: throw UsageError("closed-form COMs exist for n in {1, 2, 3}");
  }
}

OperatorExpr build_current(int i, int L, double J) {
  check_sites(L);
  if (i < 0 || i > L) throw UsageError("current index out of range");
  if (i == 0 || i == L) return OperatorExpr(L);
  std::vector<LocalOp> right(L, down()), left(L, down());
  right[i] = LocalOp::pauli(Pauli::Y);
  left[i - 1] = LocalOp::pauli(Pauli::Y);
  return (OperatorExpr::tensor(right) - OperatorExpr::tensor(left)).scaled(exact(J));
}

OperatorExpr build_total_sz(int L) {
  check_sites(L);
  return field(L, Pauli::Z, mpq_class(1, 2));
}

StateVector uniform_state(int L) {
  StateVector v(L);
  v.amplitudes().setConstant(std::pow(2.0, -0.5 * L));
  return v;
}

StateVector polarized_state(int L) { return StateVector::basis(L, polarized_index(L)); }

StateVector defect_state(int L, const DefectSpec& d) {
  if (d.site < 1 || d.site > L) throw UsageError("defect site out of range");
  StateVector v(L);
  const std::uint64_t all_down = polarized_index(L);
  const std::uint64_t flipped = all_down ^ (std::uint64_t{1} << (L - d.site));
  v.amplitudes()[static_cast<Eigen::Index>(all_down)] = std::polar(std::cos(d.theta), d.phi);
  v.amplitudes()[static_cast<Eigen::Index>(flipped)] = std::sin(d.theta);
  return v;
}

StateVector gaussian_defect_state(int L, double center, double width) {
  if (!(width > 0.0)) throw UsageError("gaussian width must be positive");
  std::vector<double> w(L);
  double norm2 = 0.0;
  for (int i = 1; i <= L; ++i) {
    w[i - 1] = std::exp(-(i - center) * (i - center) / (2.0 * width * width));
    norm2 += w[i - 1] * w[i - 1];
  }
  const double scale = 1.0 / std::sqrt(norm2);
  const double half = 1.0 / std::sqrt(2.0);
  StateVector v = polarized_state(L);
  v.amplitudes() *= half;
  for (int i = 1; i <= L; ++i) {
    v.amplitudes() += half * scale * w[i - 1] * defect_state(L, {i, M_PI / 2, 0.0}).amplitudes();
  }
  // |D_i(pi/2, 0)> keeps a cos(pi/2) ~ 6e-17 weight on |P>; drop it.
  v.amplitudes()[static_cast<Eigen::Index>(polarized_index(L))] = half;
  return v;
}

StateVector build_state(int L, const StateRequest& req) {
  if (req.kind == "uniform") return uniform_state(L);
  if (req.kind == "polarized") return polarized_state(L);
  if (req.kind == "defect") return defect_state(L, req.defect);
  if (req.kind == "gaussian_defect") return gaussian_defect_state(L, req.center, req.width);
  throw UsageError("unknown initial state kind '" + req.kind + "'");
}

OperatorExpr observable_by_name(const std::string& name, int L, double J) {
  if (name == "C1") return build_c1(L);
  if (name == "C2") return build_c2(L, C2Convention::Averaged);
  if (name == "C2sum") return build_c2(L, C2Convention::Summed);
  if (name == "C3") return build_c3(L);
  if (name == "Sz") return build_total_sz(L);
  if (name == "norm") return OperatorExpr::identity(L);
  auto index = [&](std::size_t skip) {
    try {
      std::size_t used = 0;
      const int i = std::stoi(name.substr(skip), &used);
      if (used == name.size() - skip) return i;
    } catch (const std::exception&) {
    }
    throw UsageError("unknown observable '" + name + "'");
  };
  if (name.rfind("mx", 0) == 0) return build_mx(index(2), L);
  if (name.rfind("j", 0) == 0) return build_current(index(1), L, J);
  throw UsageError("unknown observable '" + name + "'");
}

}  // namespace epchain
