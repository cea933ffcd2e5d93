#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace mdma::test {

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline std::complex<double> mean(const std::vector<std::complex<double>>& v) {
  std::complex<double> s{0.0, 0.0};
  for (const auto& x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

// E|z - mean|^2
inline double variance(const std::vector<std::complex<double>>& v) {
  const auto m = mean(v);
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double stddev(const std::vector<double>& v) { return std::sqrt(variance(v)); }

// |E[(a - ma) conj(b - mb)]| / (sa sb)
inline double correlation(const std::vector<std::complex<double>>& a, const std::vector<std::complex<double>>& b) {
  const auto ma = mean(a);
  const auto mb = mean(b);
  std::complex<double> c{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma) * std::conj(b[i] - mb);
  c /= static_cast<double>(a.size() - 1);
  return std::abs(c) / std::sqrt(variance(a) * variance(b));
}

inline double db(double x) { return 10.0 * std::log10(x); }

// least-squares slope of y on x
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x);
  const double my = mean(y);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

}  // namespace mdma::test
