#pragma once

#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>

#include "parfilter/errors.hpp"

namespace parfilter {

/// Exact rational over checked 64-bit integers. Any overflow throws
/// OverflowError instead of wrapping.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT: implicit by design
  Rational(long long n, long long d) : num_(n), den_(d) {
    if (den_ == 0) throw Error("rational: zero denominator");
    reduce();
  }

  long long num() const { return num_; }
  long long den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  Rational operator+(const Rational& o) const {
    long long g = std::gcd(den_, o.den_);
    long long lhs = checked_mul(num_, o.den_ / g);
    long long rhs = checked_mul(o.num_, den_ / g);
    return Rational(checked_add(lhs, rhs), checked_mul(den_, o.den_ / g));
  }
  Rational operator-() const { return Rational(checked_neg(num_), den_); }
  Rational operator-(const Rational& o) const { return *this + (-o); }
  Rational operator*(const Rational& o) const {
    long long g1 = std::gcd(std::abs(num_), o.den_);
    long long g2 = std::gcd(std::abs(o.num_), den_);
    return Rational(checked_mul(num_ / g1, o.num_ / g2),
                    checked_mul(den_ / g2, o.den_ / g1));
  }
  Rational operator/(const Rational& o) const {
    if (o.num_ == 0) throw Error("rational: division by zero");
    return *this * Rational(o.den_, o.num_);
  }
  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  static Rational parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(s));
    return Rational(std::stoll(s.substr(0, slash)),
                    std::stoll(s.substr(slash + 1)));
  }

 private:
  void reduce() {
    if (den_ < 0) {
      num_ = checked_neg(num_);
      den_ = checked_neg(den_);
    }
    long long g = std::gcd(std::abs(num_), den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  static long long checked_add(long long a, long long b) {
    long long r;
    if (__builtin_add_overflow(a, b, &r))
      throw OverflowError("exact arithmetic overflow (add)");
    return r;
  }
  static long long checked_mul(long long a, long long b) {
    long long r;
    if (__builtin_mul_overflow(a, b, &r))
      throw OverflowError("exact arithmetic overflow (mul)");
    return r;
  }
  static long long checked_neg(long long a) {
    if (a == std::numeric_limits<long long>::min())
      throw OverflowError("exact arithmetic overflow (neg)");
    return -a;
  }

  long long num_;
  long long den_;  // > 0
};

}  // namespace parfilter
