#include "errw/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace errw {

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b, double fa,
             double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(fa, flm, fm, a, m);
  double right = simpson(fm, frm, fb, m, b);
  double delta = left + right - whole;
  if (depth <= 0) throw std::runtime_error("adaptive_simpson: max depth exceeded");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (!(b > a)) throw std::invalid_argument("adaptive_simpson: need b > a");
  // seed with a few panels so symmetric integrands do not fool the estimate
  const int panels = 8;
  double total = 0;
  double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    double x0 = a + k * h, x1 = x0 + h;
    double f0 = f(x0), fm = f(0.5 * (x0 + x1)), f1 = f(x1);
    total += adapt(f, x0, x1, f0, fm, f1, simpson(f0, fm, f1, x0, x1), tol / panels,
                   max_depth);
  }
  return total;
}

double adaptive_simpson_2d(const std::function<double(double, double)>& f, double ax,
                           double bx, double ay, double by, double tol) {
  auto outer = [&](double x) {
    return adaptive_simpson([&](double y) { return f(x, y); }, ay, by, tol * 0.02);
  };
  return adaptive_simpson(outer, ax, bx, tol);
}

double integrate_half_line(const std::function<double(double)>& f, double tol, double t_lo,
                           double t_hi) {
  auto g = [&](double t) {
    double w = std::exp(t);
    double v = f(w) * w;
    return std::isfinite(v) ? v : 0.0;
  };
  return adaptive_simpson(g, t_lo, t_hi, tol);
}

}  // namespace errw
