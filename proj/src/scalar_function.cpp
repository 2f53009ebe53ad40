#include "schatten/scalar_function.hpp"

#include <cmath>
#include <utility>

namespace schatten {

namespace {

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// j-th derivative of K_m(x) = sgn(x) x^(m-1) = sgn(x)^m |x|^(m-1). Away from
// zero this is sgn(x)^(m-j) (m-1)!/(m-1-j)! |x|^(m-1-j); at zero it is 0 for
// j <= m-2.
double kernel_deriv(int m, double x, int j) {
  if (j > m - 1) return 0.0;
  if (x == 0.0) return 0.0;  // caller guarantees j <= m - 2 here
  double c = 1.0;
  for (int i = 0; i < j; ++i) c *= static_cast<double>(m - 1 - i);
  double mag = c * std::pow(std::abs(x), static_cast<double>(m - 1 - j));
  return ((m - j) % 2 != 0 ? sgn(x) : 1.0) * mag;
}

void validate_spline(int order, const std::vector<double>& poly,
                     const std::vector<double>& knots,
                     const std::vector<double>& weights) {
  if (order < 2) throw std::invalid_argument("ScalarFunction: kernel order must be >= 2");
  if (knots.size() != weights.size())
    throw std::invalid_argument("ScalarFunction: one weight per knot required");
  for (size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      throw std::invalid_argument("ScalarFunction: knots must be strictly increasing");
  if (static_cast<int>(poly.size()) > order)
    throw std::invalid_argument("ScalarFunction: polynomial degree must be below kernel order");
}

}  // namespace

ScalarFunction ScalarFunction::monomial(int m) {
  if (m < 0) throw std::invalid_argument("ScalarFunction::monomial: negative degree");
  ScalarFunction f;
  f.poly_.assign(static_cast<size_t>(m) + 1, 0.0);
  f.poly_.back() = 1.0;
  return f;
}

ScalarFunction ScalarFunction::abs_value() { return spline(2, {}, {0.0}, {1.0}); }
ScalarFunction ScalarFunction::signed_square() { return spline(3, {}, {0.0}, {1.0}); }
ScalarFunction ScalarFunction::abs_cubed() { return spline(4, {}, {0.0}, {1.0}); }

ScalarFunction ScalarFunction::cubic_spline(std::vector<double> poly,
                                            std::vector<double> knots,
                                            std::vector<double> weights) {
  return spline(4, std::move(poly), std::move(knots), std::move(weights));
}

ScalarFunction ScalarFunction::quadratic_spline(std::vector<double> poly,
                                                std::vector<double> knots,
                                                std::vector<double> weights) {
  return spline(3, std::move(poly), std::move(knots), std::move(weights));
}

ScalarFunction ScalarFunction::spline(int order, std::vector<double> poly,
                                      std::vector<double> knots,
                                      std::vector<double> weights) {
  validate_spline(order, poly, knots, weights);
  ScalarFunction f;
  f.poly_ = std::move(poly);
  f.knots_ = std::move(knots);
  f.weights_ = std::move(weights);
  f.kernel_order_ = f.knots_.empty() ? 0 : order;
  return f;
}

double ScalarFunction::operator()(double x) const {
  double value = 0.0;
  for (size_t i = poly_.size(); i-- > 0;) value = value * x + poly_[i];
  for (size_t i = 0; i < knots_.size(); ++i) {
    double u = x - knots_[i];
    value += weights_[i] * kernel_deriv(kernel_order_, u, 0);
  }
  return value;
}

double ScalarFunction::derivative(double x, int order) const {
  if (order < 0) throw std::invalid_argument("ScalarFunction::derivative: negative order");
  if (order == 0) return (*this)(x);
  double value = 0.0;
  for (size_t i = static_cast<size_t>(order); i < poly_.size(); ++i) {
    double c = poly_[i];
    for (int j = 0; j < order; ++j) c *= static_cast<double>(i - static_cast<size_t>(j));
    value += c * std::pow(x, static_cast<double>(i) - order);
  }
  for (size_t i = 0; i < knots_.size(); ++i) {
    double u = x - knots_[i];
    if (u == 0.0 && order > knot_smoothness())
      throw SmoothnessViolation("ScalarFunction::derivative: order exceeds smoothness at knot");
    value += weights_[i] * kernel_deriv(kernel_order_, u, order);
  }
  return value;
}

ScalarFunction ScalarFunction::derivative_function() const {
  ScalarFunction d;
  if (poly_.size() > 1) {
    d.poly_.resize(poly_.size() - 1);
    for (size_t i = 1; i < poly_.size(); ++i)
      d.poly_[i - 1] = poly_[i] * static_cast<double>(i);
  }
  if (has_kernel()) {
    if (kernel_order_ < 2)
      throw SmoothnessViolation("ScalarFunction::derivative_function: sign kernel has no derivative");
    d.knots_ = knots_;
    d.weights_ = weights_;
    for (double& w : d.weights_) w *= static_cast<double>(kernel_order_ - 1);
    d.kernel_order_ = kernel_order_ - 1;
  }
  return d;
}

}  // namespace schatten
