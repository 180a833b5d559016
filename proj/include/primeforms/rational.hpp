#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>

namespace primeforms {

/// Exact rational number with 64-bit numerator and denominator.
///
/// Always stored in lowest terms with a positive denominator. Intermediate
/// products are formed in 128 bits; a result that does not fit back into
/// 64 bits raises budget_error rather than wrapping.
class Rational {
public:
  constexpr Rational() = default;
  Rational(int64_t num);  // NOLINT(google-explicit-constructor)
  Rational(int64_t num, int64_t den);

  [[nodiscard]] int64_t num() const { return num_; }
  [[nodiscard]] int64_t den() const { return den_; }
  [[nodiscard]] bool is_zero() const { return num_ == 0; }
  [[nodiscard]] bool is_integer() const { return den_ == 1; }
  [[nodiscard]] double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// "num/den", always with the slash (integers print as "n/1").
  [[nodiscard]] std::string str() const;
  /// Parses "num/den" or a bare integer.
  static Rational parse(const std::string& text);

  Rational operator-() const;
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }

private:
  static Rational from_wide(__int128 num, __int128 den);

  int64_t num_ = 0;
  int64_t den_ = 1;
};

/// Integer power of a rational, exponent >= 0.
Rational pow(Rational base, unsigned exp);

}  // namespace primeforms
