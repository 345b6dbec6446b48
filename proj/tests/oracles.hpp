#pragma once

// Self-contained reference computations for the tests, written independently
// of the library under test.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double trapezoid(const std::function<double(double)>& f, double a,
                        double b, int panels) {
  double h = (b - a) / panels;
  double acc = 0.5 * (f(a) + f(b));
  for (int i = 1; i < panels; ++i) acc += f(a + i * h);
  return acc * h;
}

namespace detail {
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb, double whole,
                      double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-12) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

inline double loglog_slope(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = static_cast<int>(xs.size());
  for (int i = 0; i < n; ++i) {
    double x = std::log(xs[i]);
    double y = std::log(ys[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
