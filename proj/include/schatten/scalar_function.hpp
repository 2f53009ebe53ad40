#pragma once

#include <vector>

#include "schatten/errors.hpp"

namespace schatten {

// Piecewise-polynomial scalar function closed under differentiation:
//
//   f(x) = P(x) + sum_i w_i K_m(x - c_i),    K_m(x) = sgn(x) x^(m-1).
//
// K_m is C^(m-2) at the origin and its m-th distributional derivative is
// 2 (m-1)! delta_0, so K_2 = |x|, K_3 = x|x|, K_4 = |x|^3. All the scalar
// functions fed to divided differences and trace derivatives live in this
// family; differentiating drops the kernel order by one and keeps the knots.
class ScalarFunction {
 public:
  static ScalarFunction monomial(int m);
  static ScalarFunction abs_value();      // |x|
  static ScalarFunction signed_square();  // x|x|
  static ScalarFunction abs_cubed();      // |x|^3

  // Cubic polynomial part plus |x - c|^3 kernels (kernel order 4).
  static ScalarFunction cubic_spline(std::vector<double> poly,
                                     std::vector<double> knots,
                                     std::vector<double> weights);
  // Quadratic polynomial part plus (x - c)|x - c| kernels (kernel order 3).
  static ScalarFunction quadratic_spline(std::vector<double> poly,
                                         std::vector<double> knots,
                                         std::vector<double> weights);
  // General kernel order >= 2 with polynomial part of degree < order.
  static ScalarFunction spline(int order, std::vector<double> poly,
                               std::vector<double> knots,
                               std::vector<double> weights);

  double operator()(double x) const;

  // Derivative of any order. Exact away from knots; at a knot defined only
  // up to the smoothness order, beyond which it throws SmoothnessViolation.
  double derivative(double x, int order) const;

  // f' in closed form. Kernel order drops by one (|x| differentiates to the
  // sign kernel, which is still representable).
  ScalarFunction derivative_function() const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& poly() const { return poly_; }
  int kernel_order() const { return kernel_order_; }
  bool has_kernel() const { return kernel_order_ > 0 && !knots_.empty(); }

  // Largest r such that f is C^r at its knots (-1 for the sign kernel).
  int knot_smoothness() const { return kernel_order_ - 2; }

 private:
  ScalarFunction() = default;

  std::vector<double> poly_;     // ascending coefficients, may be empty
  std::vector<double> knots_;    // strictly increasing
  std::vector<double> weights_;  // one per knot
  int kernel_order_ = 0;         // 0 when there is no kernel part
};

}  // namespace schatten
