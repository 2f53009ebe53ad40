#include "schatten/rng.hpp"

#include <cmath>

namespace schatten {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 floored away from zero so the log stays finite.
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

HermitianMatrix random_hermitian(Eigen::Index n, Rng& rng) {
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rng.normal_complex();
  Matrix h = (m + m.adjoint()) / 2.0;
  return HermitianMatrix(h);
}

HermitianMatrix random_psd(Eigen::Index n, Rng& rng) {
  Matrix c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) = rng.normal_complex();
  Matrix p = c.adjoint() * c / static_cast<double>(n);
  return HermitianMatrix(p);
}

Matrix random_complex(Eigen::Index n, Rng& rng) {
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rng.normal_complex();
  return m;
}

HermitianMatrix random_diagonal(Eigen::Index n, Rng& rng) {
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = 4.0 * rng.uniform() - 2.0;
  return HermitianMatrix(m);
}

}  // namespace schatten
