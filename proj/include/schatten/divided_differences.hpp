#pragma once

#include <array>
#include <vector>

#include "schatten/scalar_function.hpp"

namespace schatten {

inline constexpr size_t kMaxNodes = 8;

// Nodes closer than this are merged into one confluent cluster.
double confluence_tolerance(const std::vector<double>& nodes);

// Divided difference of f over the nodes. Distinct nodes follow the
// standard recursion; clusters within the confluence tolerance switch to
// derivative entries f^(j)(x)/j! in a Hermite-Genocchi style table. A
// cluster that covers a knot with insufficient smoothness throws
// SmoothnessViolation; non-finite results throw Overflow.
double divided_difference(const ScalarFunction& f, std::vector<double> nodes);

// Closed form for the fourth-order divided difference of x|x| over four
// nonzero nodes. The sign pattern must match the node signs; it selects
// among the all-negative, mixed, and all-positive branches.
double dd_signed_square_closed(const std::array<double, 4>& nodes,
                               const std::array<int, 4>& signs);

// Closed form for the third-order divided difference of |x| over three
// nonzero nodes.
double dd_abs_closed(const std::array<double, 3>& nodes);

// Divided difference of x^m: the complete homogeneous symmetric polynomial
// of degree m - (len - 1) in the nodes, zero when m < len - 1.
double dd_monomial(const std::vector<double>& nodes, int m);

}  // namespace schatten
