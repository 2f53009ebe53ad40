#include "schatten/nnls.hpp"

#include <vector>

#include "schatten/errors.hpp"

namespace schatten {

namespace {

// Least squares restricted to the passive columns.
Eigen::VectorXd solve_passive(const Eigen::MatrixXd& e, const Eigen::VectorXd& f,
                              const std::vector<Eigen::Index>& passive) {
  Eigen::MatrixXd ep(e.rows(), static_cast<Eigen::Index>(passive.size()));
  for (size_t k = 0; k < passive.size(); ++k) ep.col(static_cast<Eigen::Index>(k)) = e.col(passive[k]);
  return ep.colPivHouseholderQr().solve(f);
}

}  // namespace

Eigen::VectorXd nnls(const Eigen::MatrixXd& e, const Eigen::VectorXd& f) {
  const Eigen::Index n = e.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> passive;
  std::vector<bool> in_passive(static_cast<size_t>(n), false);
  Eigen::VectorXd w = e.transpose() * (f - e * x);
  const double tol = 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff());
  const int max_outer = static_cast<int>(3 * n) + 30;
  for (int outer = 0; outer < max_outer; ++outer) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!in_passive[static_cast<size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    if (best < 0) break;
    passive.push_back(best);
    in_passive[static_cast<size_t>(best)] = true;
    for (int inner = 0; inner < max_outer; ++inner) {
      const Eigen::VectorXd z = solve_passive(e, f, passive);
      bool all_positive = true;
      double alpha = 1.0;
      for (size_t k = 0; k < passive.size(); ++k) {
        const double zk = z[static_cast<Eigen::Index>(k)];
        if (zk <= 0.0) {
          all_positive = false;
          const double xk = x[passive[k]];
          alpha = std::min(alpha, xk / (xk - zk));
        }
      }
      if (all_positive) {
        for (size_t k = 0; k < passive.size(); ++k)
          x[passive[k]] = z[static_cast<Eigen::Index>(k)];
        break;
      }
      for (size_t k = 0; k < passive.size(); ++k) {
        const double zk = z[static_cast<Eigen::Index>(k)];
        x[passive[k]] += alpha * (zk - x[passive[k]]);
      }
      std::vector<Eigen::Index> kept;
      for (Eigen::Index j : passive) {
        if (x[j] > 0.0) {
          kept.push_back(j);
        } else {
          x[j] = 0.0;
          in_passive[static_cast<size_t>(j)] = false;
        }
      }
      passive = kept;
      if (passive.empty()) break;
    }
    w = e.transpose() * (f - e * x);
  }
  return x;
}

}  // namespace schatten
