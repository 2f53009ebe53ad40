#include "schatten/matrix_core.hpp"

#include <algorithm>
#include <cmath>

namespace schatten {

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  return asym <= tol * scale;
}

HermitianMatrix::HermitianMatrix(const Matrix& m) {
  if (m.rows() != m.cols())
    throw DimensionMismatch("HermitianMatrix: matrix must be square");
  if (m.rows() < 1 || m.rows() > kMaxDim)
    throw DimensionMismatch("HermitianMatrix: dimension out of range [1, 64]");
  if (!m.allFinite())
    throw std::invalid_argument("HermitianMatrix: non-finite entries");
  if (!is_hermitian(m))
    throw NotHermitian("HermitianMatrix: asymmetry exceeds tolerance");
  m_ = (m + m.adjoint()) / 2.0;
  m_.diagonal() = m_.diagonal().real().cast<Complex>();
}

HermitianMatrix hermitian_from_parts(const RealMatrix& re, const RealMatrix& im) {
  if (re.rows() != im.rows() || re.cols() != im.cols())
    throw DimensionMismatch("hermitian_from_parts: part shapes differ");
  Matrix m = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
  return HermitianMatrix(m);
}

EigenDecomposition eigh(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.mat());
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("eigh: eigendecomposition did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

std::vector<double> singular_values(const Matrix& a) {
  Matrix gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("singular_values: eigendecomposition failed");
  std::vector<double> sv(static_cast<size_t>(a.cols()));
  for (Eigen::Index i = 0; i < a.cols(); ++i)
    sv[static_cast<size_t>(i)] = std::sqrt(std::max(0.0, solver.eigenvalues()[i]));
  return sv;
}

double schatten_norm(const Matrix& a, double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw InvalidP("schatten_norm: p must be a finite real >= 1");
  if (a.rows() != a.cols())
    throw DimensionMismatch("schatten_norm: matrix must be square");
  double total = 0.0;
  for (double s : singular_values(a)) total += std::pow(s, p);
  return total == 0.0 ? 0.0 : std::pow(total, 1.0 / p);
}

HermitianMatrix dilate(const Matrix& a) {
  if (a.rows() != a.cols())
    throw DimensionMismatch("dilate: matrix must be square");
  Eigen::Index n = a.rows();
  Matrix d = Matrix::Zero(2 * n, 2 * n);
  const double scale = std::pow(2.0, -1.0 / 3.0);
  d.topRightCorner(n, n) = scale * a;
  d.bottomLeftCorner(n, n) = scale * a.adjoint();
  return HermitianMatrix(d);
}

}  // namespace schatten
