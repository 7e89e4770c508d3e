#pragma once

// Scalar policies for the partition-function kernels.
//
// Kernels are written once against ScalarTraits<S> and instantiated for
//   LogNum        signed log-domain double; the production path,
//   ExtendedReal  50-digit binary float; used where LGV determinants cancel
//                 catastrophically (adversarial weights, tightly packed
//                 path families) and by the identity checkers,
//   DeepReal      150-digit binary float; the identity checkers' last tier.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <limits>
#include <string>

#include "polylab/lognum.hpp"

namespace polylab {

template <unsigned Digits>
using BinFloat = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<Digits>>;

using ExtendedReal = BinFloat<50>;
/// Last resort for determinants whose cancellation exhausts ExtendedReal.
using DeepReal = BinFloat<150>;

/// `adaptive` runs in LogNum and repeats a computation in ExtendedReal when
/// some pivot shows that cancellation ate into the double mantissa.
enum class Precision { standard, extended, adaptive };

const char* to_string(Precision p);
Precision precision_from_string(const std::string& s);

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<LogNum> {
  static constexpr double kPivotThreshold = kDefaultPivotThreshold;
  static LogNum zero() { return LogNum::zero(); }
  static LogNum one() { return LogNum::one(); }
  static LogNum from_lognum(LogNum x) { return x; }
  static LogNum to_lognum(const LogNum& x) { return x; }
  static double log_ratio(const LogNum& x, const LogNum& y) { return x.logmag() - y.logmag(); }
  static bool is_zero(const LogNum& x) { return x.is_zero(); }
  static BasicDetResult<LogNum> det(const SquareMatrix<LogNum>& m,
                                    double threshold = kPivotThreshold) {
    return signed_log_det(m, threshold);
  }
};

template <unsigned Digits>
struct ScalarTraits<BinFloat<Digits>> {
  using T = BinFloat<Digits>;
  static constexpr double kPivotThreshold = 1e-40;
  static T zero() { return T(0); }
  static T one() { return T(1); }
  static T from_lognum(LogNum x) {
    if (x.is_zero()) return T(0);
    T v = boost::multiprecision::exp(T(x.logmag()));
    return x.sign() > 0 ? v : T(-v);
  }
  static LogNum to_lognum(const T& x) {
    if (x == 0) return LogNum::zero();
    int exp2 = 0;
    const T mant = boost::multiprecision::frexp(boost::multiprecision::abs(x), &exp2);
    return LogNum::from_log(std::log(static_cast<double>(mant)) + exp2 * 0.69314718055994530942, x > 0 ? 1 : -1);
  }
  /// log(x / y) for positive x, y, accurate to double precision.
  static double log_ratio(const T& x, const T& y) {
    int ex = 0, ey = 0;
    const T mx = boost::multiprecision::frexp(x, &ex), my = boost::multiprecision::frexp(y, &ey);
    return std::log(static_cast<double>(mx / my)) + (ex - ey) * 0.69314718055994530942;
  }
  static bool is_zero(const T& x) { return x == 0; }
  static BasicDetResult<T> det(const SquareMatrix<T>& m, double threshold = kPivotThreshold);
};

template <unsigned Digits>
BasicDetResult<BinFloat<Digits>> ScalarTraits<BinFloat<Digits>>::det(const SquareMatrix<T>& m, double threshold) {
  const std::size_t n = m.size();
  if (n == 0) throw std::invalid_argument("determinant of empty matrix");
  BasicDetResult<T> out;
  // Error bounds are tracked in double relative to the row-normalized
  // entries; inputs are allowed a few dozen ulps from upstream sums.
  const double work = static_cast<double>(std::numeric_limits<T>::epsilon());
  const double input = work * 64;
  std::vector<T> a(n * n);
  std::vector<double> mag(n * n), e(n * n);
  long scale_exp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    T row_max = 0;
    for (std::size_t j = 0; j < n; ++j) row_max = std::max(row_max, T(abs(m(i, j))));
    if (row_max == 0) {
      out.value = 0;
      out.min_pivot = 0.0;
      out.rel_error = std::numeric_limits<double>::infinity();
      return out;
    }
    // Scaling by a power of two is exact and avoids a division.
    int e2 = 0;
    boost::multiprecision::frexp(row_max, &e2);
    scale_exp += e2;
    for (std::size_t j = 0; j < n; ++j) {
      a[i * n + j] = boost::multiprecision::ldexp(m(i, j), -e2);
      mag[i * n + j] = std::fabs(static_cast<double>(a[i * n + j]));
      e[i * n + j] = mag[i * n + j] * input;
    }
  }
  T prod = 1;
  double rel = work * n;
  double min_pivot = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (mag[i * n + k] > mag[piv * n + k]) piv = i;
    const T p = a[piv * n + k];
    min_pivot = std::min(min_pivot, mag[piv * n + k]);
    if (p == 0) {
      out.value = 0;
      out.degenerate = true;
      out.min_pivot = 0.0;
      out.rel_error = std::numeric_limits<double>::infinity();
      return out;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[k * n + j], a[piv * n + j]);
        std::swap(mag[k * n + j], mag[piv * n + j]);
        std::swap(e[k * n + j], e[piv * n + j]);
      }
      prod = -prod;
    }
    prod *= p;
    const double ap = mag[k * n + k], ep = e[k * n + k];
    rel += ep / ap;
    const T inv = 1 / p;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a[i * n + k] == 0) continue;
      const T f = a[i * n + k] * inv;
      const double af = std::fabs(static_cast<double>(f));
      const double ef = (e[i * n + k] + af * ep) / ap;
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i * n + j] -= f * a[k * n + j];
        mag[i * n + j] = std::fabs(static_cast<double>(a[i * n + j]));
        e[i * n + j] += ef * mag[k * n + j] + af * e[k * n + j] + work * mag[i * n + j];
      }
      a[i * n + k] = 0;
      mag[i * n + k] = 0.0;
    }
  }
  out.value = boost::multiprecision::ldexp(prod, static_cast<int>(scale_exp));
  out.min_pivot = min_pivot;
  out.rel_error = rel;
  out.degenerate = min_pivot < threshold;
  return out;
}

}  // namespace polylab
