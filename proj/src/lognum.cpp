#include "polylab/lognum.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace polylab {

LogNum operator+(LogNum a, LogNum b) noexcept {
  if (a.sign_ == 0) return b;
  if (b.sign_ == 0) return a;
  if (a.logmag_ < b.logmag_) std::swap(a, b);
  const double d = b.logmag_ - a.logmag_;
  if (a.sign_ == b.sign_) {
    return LogNum::from_log(a.logmag_ + std::log1p(std::exp(d)), a.sign_);
  }
  if (d == 0.0) return {};
  return LogNum::from_log(a.logmag_ + std::log1p(-std::exp(d)), a.sign_);
}

LogNum log_add(LogNum a, LogNum b) noexcept { return a + b; }

std::ostream& operator<<(std::ostream& os, LogNum x) {
  const char s = x.sign() > 0 ? '+' : (x.sign() < 0 ? '-' : '0');
  return os << '(' << s << ", " << x.logmag() << ')';
}

DetResult signed_log_det(const SquareMatrix<LogNum>& m, double pivot_threshold) {
  const std::size_t n = m.size();
  if (n == 0) throw std::invalid_argument("signed_log_det: empty matrix");

  DetResult out;
  constexpr long double kWork = 0x1p-63L;
  std::vector<long double> a(n * n), e(n * n, 0.0L);
  double log_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_max = kNegInf;
    for (std::size_t j = 0; j < n; ++j) row_max = std::max(row_max, m(i, j).logmag());
    if (row_max == kNegInf) {
      out.value = LogNum::zero();
      out.min_pivot = 0.0;
      out.rel_error = std::numeric_limits<double>::infinity();
      return out;
    }
    log_scale += row_max;
    for (std::size_t j = 0; j < n; ++j) {
      const LogNum& x = m(i, j);
      a[i * n + j] = x.is_zero() ? 0.0L
                                 : x.sign() * std::exp(static_cast<long double>(x.logmag() - row_max));
      // logmag is a double, so the value carries its absolute rounding.
      if (!x.is_zero()) e[i * n + j] = std::fabs(a[i * n + j]) * 0x1p-52L * (std::fabs(x.logmag()) + 16.0L);
    }
  }

  int sign = 1;
  long double log_abs = 0.0L;
  long double rel = n * kWork;
  double min_pivot = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(a[i * n + k]) > std::fabs(a[piv * n + k])) piv = i;
    }
    const long double p = a[piv * n + k];
    min_pivot = std::min(min_pivot, static_cast<double>(std::fabs(p)));
    if (p == 0.0L) {
      out.value = LogNum::zero();
      out.degenerate = true;
      out.min_pivot = 0.0;
      out.rel_error = std::numeric_limits<double>::infinity();
      return out;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[k * n + j], a[piv * n + j]);
        std::swap(e[k * n + j], e[piv * n + j]);
      }
      sign = -sign;
    }
    if (p < 0) sign = -sign;
    log_abs += std::log(std::fabs(p));
    const long double ap = std::fabs(p), ep = e[k * n + k];
    rel += ep / ap;
    for (std::size_t i = k + 1; i < n; ++i) {
      const long double f = a[i * n + k] / p;
      if (f == 0.0L) continue;
      const long double ef = (e[i * n + k] + std::fabs(f) * ep) / ap;
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i * n + j] -= f * a[k * n + j];
        e[i * n + j] += ef * std::fabs(a[k * n + j]) + std::fabs(f) * e[k * n + j] + kWork * std::fabs(a[i * n + j]);
      }
      a[i * n + k] = 0.0L;
    }
  }
  out.value = LogNum::from_log(log_scale + static_cast<double>(log_abs), sign);
  out.min_pivot = min_pivot;
  out.rel_error = static_cast<double>(rel);
  out.degenerate = min_pivot < pivot_threshold;
  return out;
}

}  // namespace polylab
