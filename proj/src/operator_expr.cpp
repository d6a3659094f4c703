#include "epchain/operator_expr.hpp"

#include <bit>
#include <unordered_map>

#include "epchain/error.hpp"

namespace epchain {

namespace {

int popcount(std::uint64_t v) { return std::popcount(v); }

// c * i^k without a full complex multiply.
ComplexRational times_i_power(const ComplexRational& c, int k) {
  switch (k & 3) {
    case 0: return c;
    case 1: return {-c.im(), c.re()};
    case 2: return {-c.re(), -c.im()};
    default: return {c.im(), -c.re()};
  }
}

// P(x, z) = i^{|x&z|} X^x Z^z, hence
// P1 P2 = i^{|x1 z1| + |x2 z2| - |x3 z3| + 2|z1 x2|} P3.
int product_phase(const PauliString& a, const PauliString& b, const PauliString& c) {
  return popcount(a.x & a.z) + popcount(b.x & b.z) - popcount(c.x & c.z) +
         2 * popcount(a.z & b.x);
}

struct PauliStringHash {
  std::size_t operator()(const PauliString& s) const noexcept {
    return std::hash<std::uint64_t>{}(s.x * 0x9E3779B97F4A7C15ULL ^ s.z);
  }
};

void check_length(int length) {
  if (length < 1 || length > OperatorExpr::kMaxSites) {
    throw UsageError("operator length must be in 1.." + std::to_string(OperatorExpr::kMaxSites));
  }
}

std::uint64_t site_bit(int length, int site) { return std::uint64_t{1} << (length - site); }

}  // namespace

char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

Pauli pauli_from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw UsageError(std::string("invalid Pauli letter '") + c + "'");
  }
}

PauliProduct pauli_product(Pauli a, Pauli b) {
  auto sym = [](Pauli p) {
    int v = static_cast<int>(p);
    return PauliString{static_cast<std::uint64_t>(v == 1 || v == 2),
                       static_cast<std::uint64_t>(v == 2 || v == 3)};
  };
  PauliString sa = sym(a), sb = sym(b);
  PauliString sc{sa.x ^ sb.x, sa.z ^ sb.z};
  return {times_i_power(1, product_phase(sa, sb, sc)), sc.at(1, 1)};
}

LocalOp LocalOp::pauli(Pauli p) {
  LocalOp op;
  op.coeff[static_cast<int>(p)] = 1;
  return op;
}

LocalOp LocalOp::of(SiteOp op) {
  LocalOp r;
  const mpq_class half(1, 2);
  switch (op) {
    case SiteOp::I: r.coeff[0] = 1; break;
    case SiteOp::X: r.coeff[1] = 1; break;
    case SiteOp::Y: r.coeff[2] = 1; break;
    case SiteOp::Z: r.coeff[3] = 1; break;
    case SiteOp::Plus: r.coeff[1] = 1; r.coeff[2] = ComplexRational::i(); break;
    case SiteOp::Minus: r.coeff[1] = 1; r.coeff[2] = -ComplexRational::i(); break;
    case SiteOp::ProjDown: r.coeff[0] = half; r.coeff[3] = ComplexRational(-half); break;
    case SiteOp::ProjUp: r.coeff[0] = half; r.coeff[3] = half; break;
  }
  return r;
}

LocalOp LocalOp::scaled(const ComplexRational& s) const {
  LocalOp r = *this;
  for (auto& c : r.coeff) c *= s;
  return r;
}

LocalOp operator*(const LocalOp& a, const LocalOp& b) {
  LocalOp r;
  for (int i = 0; i < 4; ++i) {
    if (a.coeff[i].is_zero()) continue;
    for (int j = 0; j < 4; ++j) {
      if (b.coeff[j].is_zero()) continue;
      auto [phase, letter] = pauli_product(static_cast<Pauli>(i), static_cast<Pauli>(j));
      r.coeff[static_cast<int>(letter)] += phase * a.coeff[i] * b.coeff[j];
    }
  }
  return r;
}

LocalOp operator+(const LocalOp& a, const LocalOp& b) {
  LocalOp r = a;
  for (int i = 0; i < 4; ++i) r.coeff[i] += b.coeff[i];
  return r;
}

Pauli PauliString::at(int length, int site) const {
  const std::uint64_t bit = site_bit(length, site);
  const bool hx = x & bit, hz = z & bit;
  if (hx && hz) return Pauli::Y;
  if (hx) return Pauli::X;
  if (hz) return Pauli::Z;
  return Pauli::I;
}

std::string PauliString::to_string(int length) const {
  std::string s(length, 'I');
  for (int i = 1; i <= length; ++i) s[i - 1] = pauli_char(at(length, i));
  return s;
}

PauliString PauliString::parse(const std::string& letters) {
  const int length = static_cast<int>(letters.size());
  check_length(length);
  PauliString s;
  for (int i = 1; i <= length; ++i) {
    const Pauli p = pauli_from_char(letters[i - 1]);
    const std::uint64_t bit = site_bit(length, i);
    if (p == Pauli::X || p == Pauli::Y) s.x |= bit;
    if (p == Pauli::Z || p == Pauli::Y) s.z |= bit;
  }
  return s;
}

OperatorExpr::OperatorExpr(int length) : length_(length) { check_length(length); }

OperatorExpr OperatorExpr::identity(int length, const ComplexRational& scale) {
  OperatorExpr r(length);
  r.add_term({}, scale);
  return r;
}

OperatorExpr OperatorExpr::site(int length, int i, SiteOp op) {
  return site(length, i, LocalOp::of(op));
}

OperatorExpr OperatorExpr::site(int length, int i, const LocalOp& op) {
  check_length(length);
  if (i < 1 || i > length) throw UsageError("site index out of range");
  std::vector<LocalOp> factors(length, LocalOp::of(SiteOp::I));
  factors[i - 1] = op;
  return tensor(factors);
}

OperatorExpr OperatorExpr::tensor(std::span<const LocalOp> factors) {
  const int length = static_cast<int>(factors.size());
  OperatorExpr r(length);
  std::vector<std::pair<PauliString, ComplexRational>> partial{{PauliString{}, 1}};
  for (int site = 1; site <= length; ++site) {
    const std::uint64_t bit = site_bit(length, site);
    std::vector<std::pair<PauliString, ComplexRational>> next;
    next.reserve(partial.size() * 2);
    for (const auto& [s, c] : partial) {
      for (int p = 0; p < 4; ++p) {
        const auto& f = factors[site - 1].coeff[p];
        if (f.is_zero()) continue;
        PauliString t = s;
        if (p == 1 || p == 2) t.x |= bit;
        if (p == 2 || p == 3) t.z |= bit;
        next.emplace_back(t, c * f);
      }
    }
    partial = std::move(next);
  }
  for (auto& [s, c] : partial) r.add_term(s, c);
  return r;
}

bool OperatorExpr::is_hermitian() const {
  for (const auto& [s, c] : terms_) {
    if (!c.is_real()) return false;
  }
  return true;
}

ComplexRational OperatorExpr::coefficient(const PauliString& s) const {
  auto it = terms_.find(s);
  return it == terms_.end() ? ComplexRational{} : it->second;
}

void OperatorExpr::add_term(const PauliString& s, const ComplexRational& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(s, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

OperatorExpr OperatorExpr::adjoint() const {
  // Pauli strings are Hermitian, so only coefficients conjugate.
  OperatorExpr r(length_);
  for (const auto& [s, c] : terms_) r.terms_.emplace_hint(r.terms_.end(), s, c.conj());
  return r;
}

OperatorExpr OperatorExpr::scaled(const ComplexRational& s) const {
  OperatorExpr r(length_);
  if (s.is_zero()) return r;
  for (const auto& [p, c] : terms_) r.terms_.emplace_hint(r.terms_.end(), p, c * s);
  return r;
}

OperatorExpr& OperatorExpr::operator+=(const OperatorExpr& o) {
  if (o.length_ != length_) throw UsageError("operator length mismatch");
  for (const auto& [s, c] : o.terms_) add_term(s, c);
  return *this;
}

OperatorExpr& OperatorExpr::operator-=(const OperatorExpr& o) {
  if (o.length_ != length_) throw UsageError("operator length mismatch");
  for (const auto& [s, c] : o.terms_) add_term(s, -c);
  return *this;
}

OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b) {
  if (a.length_ != b.length_) throw UsageError("operator length mismatch");
  std::unordered_map<PauliString, ComplexRational, PauliStringHash> acc;
  acc.reserve(a.size() * b.size() / 2 + 1);
  for (const auto& [sa, ca] : a.terms_) {
    for (const auto& [sb, cb] : b.terms_) {
      const PauliString sc{sa.x ^ sb.x, sa.z ^ sb.z};
      acc[sc] += times_i_power(ca * cb, product_phase(sa, sb, sc));
    }
  }
  OperatorExpr r(a.length_);
  for (auto& [s, c] : acc) {
    if (!c.is_zero()) r.terms_.emplace(s, std::move(c));
  }
  return r;
}

OperatorExpr multiply(const OperatorExpr& a, const OperatorExpr& b) { return a * b; }

OperatorExpr adjoint(const OperatorExpr& a) { return a.adjoint(); }

OperatorExpr conservation_residual(const OperatorExpr& h, const OperatorExpr& o) {
  if (h.length() != o.length()) throw UsageError("operator length mismatch");
  return h.adjoint() * o - o * h;
}

nlohmann::json to_json(const OperatorExpr& a) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [s, c] : a.terms()) {
    terms.push_back({{"string", s.to_string(a.length())},
                     {"re", rational_string(c.re())},
                     {"im", rational_string(c.im())}});
  }
  return {{"L", a.length()}, {"terms", std::move(terms)}};
}

OperatorExpr operator_from_json(const nlohmann::json& j) {
  try {
    const int length = j.at("L").get<int>();
    OperatorExpr r(length);
    for (const auto& t : j.at("terms")) {
      const auto letters = t.at("string").get<std::string>();
      if (static_cast<int>(letters.size()) != length) {
        throw UsageError("term string length differs from L");
      }
      r.add_term(PauliString::parse(letters),
                 {parse_rational(t.at("re").get<std::string>()),
                  parse_rational(t.at("im").get<std::string>())});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed operator JSON: ") + e.what());
  }
}

}  // namespace epchain
