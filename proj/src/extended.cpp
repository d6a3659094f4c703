#include <algorithm>
#include <bit>
#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "epchain/dynamics.hpp"
#include "epchain/error.hpp"

namespace epchain {

namespace {

namespace bmp = boost::multiprecision;
using Real = bmp::cpp_bin_float_50;
using Cx = bmp::cpp_complex_50;

Real to_real(const mpq_class& q) {
  if (sgn(q) == 0) return Real(0);
  return Real(q.get_num().get_str()) / Real(q.get_den().get_str());
}

Cx i_power(int k, const Cx& c) {
  switch (k & 3) {
    case 0: return c;
    case 1: return Cx(-c.imag(), c.real());
    case 2: return -c;
    default: return Cx(c.imag(), -c.real());
  }
}

// Same layout as CompiledOperator: one flip pattern x with a diagonal per group.
class ExtendedOperator {
 public:
  explicit ExtendedOperator(const OperatorExpr& expr) : dim_(std::size_t{1} << expr.length()) {
    for (const auto& [s, c] : expr.terms()) {
      const Cx v = i_power(std::popcount(s.x & s.z), Cx(to_real(c.re()), to_real(c.im())));
      auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) { return g.x == s.x; });
      if (it == groups_.end()) {
        groups_.push_back({s.x, std::vector<Cx>(dim_, Cx(0))});
        it = std::prev(groups_.end());
      }
      for (std::size_t b = 0; b < dim_; ++b) {
        if (std::popcount(s.z & b) & 1) it->diagonal[b] -= v;
        else it->diagonal[b] += v;
      }
    }
  }

  void apply(const std::vector<Cx>& in, std::vector<Cx>& out) const {
    std::fill(out.begin(), out.end(), Cx(0));
    for (const auto& g : groups_)
      for (std::size_t b = 0; b < dim_; ++b) out[b ^ g.x] += g.diagonal[b] * in[b];
  }

  Cx expectation(const std::vector<Cx>& v) const {
    Cx acc(0);
    for (const auto& g : groups_)
      for (std::size_t b = 0; b < dim_; ++b) acc += conj(v[b ^ g.x]) * g.diagonal[b] * v[b];
    return acc;
  }

  // Induced 1-norm (largest column sum).
  double norm1() const {
    double best = 0.0;
    for (std::size_t b = 0; b < dim_; ++b) {
      double s = 0.0;
      for (const auto& g : groups_) s += static_cast<double>(abs(g.diagonal[b]));
      best = std::max(best, s);
    }
    return best;
  }

 private:
  struct Group {
    std::uint64_t x;
    std::vector<Cx> diagonal;
  };
  std::size_t dim_;
  std::vector<Group> groups_;
};

Real max_abs(const std::vector<Cx>& v) {
  Real m(0);
  for (const auto& a : v) m = std::max(m, Real(abs(a)));
  return m;
}

}  // namespace

std::vector<TimeSeries> expectation_series_extended(const OperatorExpr& h, const StateVector& psi0,
                                                    const std::vector<NamedObservable>& observables,
                                                    const std::vector<double>& times, bool normalized) {
  if (h.length() != psi0.sites()) throw UsageError("Hamiltonian and state lengths differ");
  if (h.length() > kDefaultDenseCap) throw UsageError("extended precision is capped at L=" + std::to_string(kDefaultDenseCap));
  if (times.empty() || times.front() < 0.0) throw UsageError("times must be non-negative");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw UsageError("times must be strictly increasing");

  const ExtendedOperator op(h);
  std::vector<ExtendedOperator> obs;
  std::vector<TimeSeries> out;
  for (const auto& [name, o] : observables) {
    if (o.length() != h.length()) throw UsageError("observable and state lengths differ");
    obs.emplace_back(o);
    out.push_back({name, times, {}});
  }

  const std::size_t dim = static_cast<std::size_t>(psi0.dim());
  std::vector<Cx> psi(dim), term(dim), next(dim);
  for (std::size_t b = 0; b < dim; ++b) psi[b] = Cx(psi0.amplitudes()[static_cast<Eigen::Index>(b)].real(),
                                                    psi0.amplitudes()[static_cast<Eigen::Index>(b)].imag());
  const double hnorm = std::max(op.norm1(), 1e-300);
  const Real eps("1e-55");

  // psi <- exp(-i H tau) psi, Taylor series on substeps with |H| tau <= 1.
  auto advance = [&](double tau) {
    const int sub = std::max(1, static_cast<int>(std::ceil(tau * hnorm)));
    const Real s = Real(tau) / sub;
    for (int m = 0; m < sub; ++m) {
      term = psi;
      for (int k = 1; k < 200; ++k) {
        op.apply(term, next);
        const Real f = s / k;
        for (std::size_t b = 0; b < dim; ++b) term[b] = Cx(next[b].imag() * f, -next[b].real() * f);
        for (std::size_t b = 0; b < dim; ++b) psi[b] += term[b];
        if (max_abs(term) <= eps * max_abs(psi)) break;
      }
    }
  };

  double t = 0.0;
  for (double target : times) {
    if (target > t) advance(target - t);
    t = target;
    Real n2(0);
    for (const auto& a : psi) n2 += norm(a);
    if (!isfinite(n2)) throw NumericalError("state became non-finite at t = " + std::to_string(t));
    for (std::size_t j = 0; j < obs.size(); ++j) {
      Cx v = obs[j].expectation(psi);
      if (normalized) v /= n2;
      out[j].values.emplace_back(static_cast<double>(v.real()), static_cast<double>(v.imag()));
    }
  }
  return out;
}

}  // namespace epchain
