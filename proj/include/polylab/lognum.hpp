#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <vector>

namespace polylab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(e^a + e^b) for a, b in [-inf, inf). Hot path of every log-space DP.
inline double log_add_exp(double a, double b) noexcept {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

/// Signed log-domain scalar: value = sign * exp(logmag).
///
/// Zero is canonical: sign == 0 exactly when logmag == -inf. Partition
/// functions over empty path families are represented by this zero, so
/// they propagate through sums and products like any other value.
class LogNum {
 public:
  constexpr LogNum() noexcept = default;

  static constexpr LogNum zero() noexcept { return {}; }
  static LogNum one() noexcept { return from_log(0.0); }

  /// Positive value from its natural log; -inf gives zero.
  static LogNum from_log(double logmag, int sign = 1) noexcept {
    LogNum r;
    if (sign == 0 || logmag == kNegInf) return r;
    r.sign_ = sign > 0 ? 1 : -1;
    r.logmag_ = logmag;
    return r;
  }

  static LogNum from_double(double x) noexcept {
    if (x == 0.0) return {};
    return from_log(std::log(std::fabs(x)), x > 0 ? 1 : -1);
  }

  int sign() const noexcept { return sign_; }
  double logmag() const noexcept { return logmag_; }
  bool is_zero() const noexcept { return sign_ == 0; }
  double to_double() const noexcept {
    return sign_ == 0 ? 0.0 : sign_ * std::exp(logmag_);
  }

  LogNum operator-() const noexcept {
    LogNum r = *this;
    r.sign_ = -r.sign_;
    return r;
  }

  LogNum& operator*=(LogNum o) noexcept { return *this = *this * o; }
  LogNum& operator/=(LogNum o) { return *this = *this / o; }
  LogNum& operator+=(LogNum o) noexcept { return *this = *this + o; }
  LogNum& operator-=(LogNum o) noexcept { return *this = *this + (-o); }

  friend LogNum operator*(LogNum a, LogNum b) noexcept {
    if (a.sign_ == 0 || b.sign_ == 0) return {};
    return from_log(a.logmag_ + b.logmag_, a.sign_ * b.sign_);
  }
  friend LogNum operator/(LogNum a, LogNum b) {
    if (b.sign_ == 0) throw std::domain_error("LogNum division by zero");
    if (a.sign_ == 0) return {};
    return from_log(a.logmag_ - b.logmag_, a.sign_ * b.sign_);
  }
  friend LogNum operator+(LogNum a, LogNum b) noexcept;
  friend LogNum operator-(LogNum a, LogNum b) noexcept { return a + (-b); }

  friend bool operator==(LogNum a, LogNum b) noexcept {
    return a.sign_ == b.sign_ && (a.sign_ == 0 || a.logmag_ == b.logmag_);
  }
  /// Ordering by real value.
  friend bool operator<(LogNum a, LogNum b) noexcept {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_;
    if (a.sign_ == 0) return false;
    return a.sign_ > 0 ? a.logmag_ < b.logmag_ : a.logmag_ > b.logmag_;
  }

 private:
  int sign_ = 0;
  double logmag_ = kNegInf;
};

/// Max-factored signed addition; exact cancellation yields canonical zero.
LogNum log_add(LogNum a, LogNum b) noexcept;

std::ostream& operator<<(std::ostream& os, LogNum x);

/// Dense row-major square matrix.
template <class T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

template <class S>
struct BasicDetResult {
  S value{};
  /// Set when some rescaled pivot fell below the threshold: the returned
  /// value has lost (nearly) all significant digits to cancellation.
  bool degenerate = false;
  /// Smallest |pivot| of the row-max-normalized elimination.
  double min_pivot = 1.0;
  /// First-order running bound on |relative error| of `value`, from input
  /// rounding and elimination; infinite when the value is exactly zero.
  double rel_error = 0.0;
};

using DetResult = BasicDetResult<LogNum>;

inline constexpr double kDefaultPivotThreshold = 1e-13;

/// Determinant of a LogNum matrix: each row is divided by its largest
/// magnitude, the rescaled matrix is reduced by partially pivoted
/// elimination in long double, and the row factors are added back in log.
DetResult signed_log_det(const SquareMatrix<LogNum>& m,
                         double pivot_threshold = kDefaultPivotThreshold);

}  // namespace polylab
