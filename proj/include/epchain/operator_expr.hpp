#pragma once

// Exact symbolic algebra over Pauli strings.
//
// Site convention: sites are numbered 1..L; site i lives at bit (L - i) of a
// basis index, so site 1 is the most significant bit. |up> is bit 0 and
// |down> is bit 1, i.e. Z|up> = +|up>.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "epchain/rational.hpp"

namespace epchain {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

// Plus = X + iY, Minus = X - iY (so Plus|down> = 2|up>), ProjDown = |down><down|.
enum class SiteOp : std::uint8_t { I, X, Y, Z, Plus, Minus, ProjDown, ProjUp };

char pauli_char(Pauli p);
Pauli pauli_from_char(char c);

struct PauliProduct {
  ComplexRational phase;  // one of {1, i, -1, -i}
  Pauli letter;
};

// a * b = phase * letter.
PauliProduct pauli_product(Pauli a, Pauli b);

// Single-site operator as a combination of {I, X, Y, Z}.
struct LocalOp {
  std::array<ComplexRational, 4> coeff{};

  static LocalOp of(SiteOp op);
  static LocalOp pauli(Pauli p);
  LocalOp scaled(const ComplexRational& s) const;
  friend LocalOp operator*(const LocalOp& a, const LocalOp& b);
  friend LocalOp operator+(const LocalOp& a, const LocalOp& b);
};

// Pauli string in symplectic form: bit k of x/z marks an X/Z factor on the
// site stored at bit k. Y is x & z.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  friend auto operator<=>(const PauliString&, const PauliString&) = default;

  Pauli at(int length, int site) const;
  std::string to_string(int length) const;
  static PauliString parse(const std::string& letters);
};

class OperatorExpr {
 public:
  using TermMap = std::map<PauliString, ComplexRational>;
  static constexpr int kMaxSites = 62;

  explicit OperatorExpr(int length);

  static OperatorExpr identity(int length, const ComplexRational& scale = 1);
  // Single-site operator on site i (1-based), identity elsewhere.
  static OperatorExpr site(int length, int i, SiteOp op);
  static OperatorExpr site(int length, int i, const LocalOp& op);
  // Product of one local factor per site, factors[0] on site 1.
  static OperatorExpr tensor(std::span<const LocalOp> factors);

  int length() const { return length_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_hermitian() const;
  ComplexRational coefficient(const PauliString& s) const;

  void add_term(const PauliString& s, const ComplexRational& c);

  OperatorExpr adjoint() const;
  OperatorExpr scaled(const ComplexRational& s) const;

  OperatorExpr& operator+=(const OperatorExpr& o);
  OperatorExpr& operator-=(const OperatorExpr& o);
  friend OperatorExpr operator+(OperatorExpr a, const OperatorExpr& b) { return a += b; }
  friend OperatorExpr operator-(OperatorExpr a, const OperatorExpr& b) { return a -= b; }
  friend OperatorExpr operator*(const OperatorExpr& a, const OperatorExpr& b);
  friend OperatorExpr operator*(const ComplexRational& s, const OperatorExpr& a) {
    return a.scaled(s);
  }
  friend bool operator==(const OperatorExpr& a, const OperatorExpr& b) {
    return a.length_ == b.length_ && a.terms_ == b.terms_;
  }

 private:
  int length_;
  TermMap terms_;
};

OperatorExpr multiply(const OperatorExpr& a, const OperatorExpr& b);
OperatorExpr adjoint(const OperatorExpr& a);

// H^dagger O - O H; zero exactly when <psi(t)|O|psi(t)> is conserved under H.
OperatorExpr conservation_residual(const OperatorExpr& h, const OperatorExpr& o);

// {"L": int, "terms": [{"string": "IXZY", "re": "p/q", "im": "p/q"}]}
nlohmann::json to_json(const OperatorExpr& a);
OperatorExpr operator_from_json(const nlohmann::json& j);

}  // namespace epchain
