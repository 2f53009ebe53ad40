#include "schatten/divided_differences.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace schatten {

double confluence_tolerance(const std::vector<double>& nodes) {
  double maxabs = 0.0;
  for (double x : nodes) maxabs = std::max(maxabs, std::abs(x));
  return 1e-7 * (1.0 + maxabs);
}

namespace {

struct Cluster {
  double rep;  // mean of members, used as the confluent node
  double lo;
  double hi;
  size_t size;
};

std::vector<Cluster> cluster_nodes(const std::vector<double>& sorted, double tau) {
  std::vector<Cluster> clusters;
  size_t start = 0;
  for (size_t i = 1; i <= sorted.size(); ++i) {
    if (i == sorted.size() || sorted[i] - sorted[i - 1] > tau) {
      double sum = std::accumulate(sorted.begin() + static_cast<long>(start),
                                   sorted.begin() + static_cast<long>(i), 0.0);
      clusters.push_back({sum / static_cast<double>(i - start), sorted[start],
                          sorted[i - 1], i - start});
      start = i;
    }
  }
  return clusters;
}

}  // namespace

double divided_difference(const ScalarFunction& f, std::vector<double> nodes) {
  if (nodes.empty() || nodes.size() > kMaxNodes)
    throw std::invalid_argument("divided_difference: need 1 to 8 nodes");
  for (double x : nodes)
    if (!std::isfinite(x))
      throw std::invalid_argument("divided_difference: non-finite node");
  std::sort(nodes.begin(), nodes.end());
  const double tau = confluence_tolerance(nodes);
  const auto clusters = cluster_nodes(nodes, tau);

  // A cluster of size m needs derivatives up to order m-1 at its
  // representative. That is only legitimate when no knot of f falls inside
  // the cluster span beyond what the kernel smoothness allows.
  for (const auto& c : clusters) {
    for (double knot : f.knots()) {
      if (knot >= c.lo && knot <= c.hi &&
          static_cast<int>(c.size) - 1 > f.knot_smoothness())
        throw SmoothnessViolation(
            "divided_difference: confluent cluster covers a knot with "
            "insufficient smoothness");
    }
  }

  std::vector<double> z;
  z.reserve(nodes.size());
  for (const auto& c : clusters) z.insert(z.end(), c.size, c.rep);

  const size_t n = z.size();
  std::vector<double> col(n);
  for (size_t i = 0; i < n; ++i) col[i] = f(z[i]);
  double factorial = 1.0;
  for (size_t j = 1; j < n; ++j) {
    factorial *= static_cast<double>(j);
    for (size_t i = 0; i + j < n; ++i) {
      if (z[i + j] == z[i])
        col[i] = f.derivative(z[i], static_cast<int>(j)) / factorial;
      else
        col[i] = (col[i + 1] - col[i]) / (z[i + j] - z[i]);
    }
    col.resize(n - j);
  }
  if (!std::isfinite(col[0]))
    throw Overflow("divided_difference: non-finite result");
  return col[0];
}

namespace {

int exact_sign(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

}  // namespace

double dd_signed_square_closed(const std::array<double, 4>& nodes,
                               const std::array<int, 4>& signs) {
  std::vector<double> neg, pos;
  for (size_t i = 0; i < 4; ++i) {
    int s = exact_sign(nodes[i]);
    if (s == 0 || s != signs[i])
      throw SignMismatch("dd_signed_square_closed: sign pattern does not match nodes");
    (s < 0 ? neg : pos).push_back(nodes[i]);
  }
  double value = 0.0;
  switch (pos.size()) {
    case 0:
    case 4:
      value = 0.0;  // x|x| restricted to one sign is quadratic
      break;
    case 1: {
      double b = pos[0];
      value = 2.0 * b * b / ((b - neg[0]) * (b - neg[1]) * (b - neg[2]));
      break;
    }
    case 3: {
      double a = neg[0];
      value = 2.0 * a * a / ((pos[0] - a) * (pos[1] - a) * (pos[2] - a));
      break;
    }
    case 2: {
      double a1 = neg[0], a2 = neg[1], b1 = pos[0], b2 = pos[1];
      value = (2.0 * (b1 + b2) * a1 * a2 - 2.0 * (a1 + a2) * b1 * b2) /
              ((b1 - a1) * (b1 - a2) * (b2 - a1) * (b2 - a2));
      break;
    }
  }
  if (!std::isfinite(value))
    throw Overflow("dd_signed_square_closed: non-finite result");
  return value;
}

double dd_abs_closed(const std::array<double, 3>& nodes) {
  std::vector<double> neg, pos;
  for (double x : nodes) {
    int s = exact_sign(x);
    if (s == 0) throw SignMismatch("dd_abs_closed: zero node");
    (s < 0 ? neg : pos).push_back(x);
  }
  double value = 0.0;
  if (pos.size() == 1)
    value = 2.0 * pos[0] / ((pos[0] - neg[0]) * (pos[0] - neg[1]));
  else if (neg.size() == 1)
    value = -2.0 * neg[0] / ((pos[0] - neg[0]) * (pos[1] - neg[0]));
  if (!std::isfinite(value)) throw Overflow("dd_abs_closed: non-finite result");
  return value;
}

double dd_monomial(const std::vector<double>& nodes, int m) {
  if (nodes.empty() || nodes.size() > kMaxNodes)
    throw std::invalid_argument("dd_monomial: need 1 to 8 nodes");
  if (m < 0) throw std::invalid_argument("dd_monomial: negative degree");
  const int k = static_cast<int>(nodes.size()) - 1;
  if (m < k) return 0.0;
  const int degree = m - k;
  // Complete homogeneous symmetric polynomial via the one-variable-at-a-time
  // recurrence h_d(x1..xj) = h_d(x1..x(j-1)) + xj h_(d-1)(x1..xj).
  std::vector<double> h(static_cast<size_t>(degree) + 1, 0.0);
  h[0] = 1.0;
  for (double x : nodes)
    for (int d = 1; d <= degree; ++d) h[static_cast<size_t>(d)] += x * h[static_cast<size_t>(d) - 1];
  if (!std::isfinite(h.back())) throw Overflow("dd_monomial: non-finite result");
  return h.back();
}

}  // namespace schatten
