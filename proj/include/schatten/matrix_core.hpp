#pragma once

#include <complex>

#include <Eigen/Dense>

#include "schatten/errors.hpp"

namespace schatten {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Eigen::Index kMaxDim = 64;

// Relative asymmetry up to which a matrix is accepted as Hermitian and
// symmetrized, measured against the largest entry magnitude.
inline constexpr double kHermitianTol = 1e-8;

// Hermitian matrix validated at construction: inputs Hermitian within
// kHermitianTol * max|entry| are symmetrized via (M + M*)/2, anything
// farther off is rejected with NotHermitian.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const Matrix& m);
  const Matrix& mat() const { return m_; }
  Eigen::Index n() const { return m_.rows(); }

 private:
  Matrix m_;
};

// Builds a HermitianMatrix from separate real and imaginary parts.
HermitianMatrix hermitian_from_parts(const RealMatrix& re, const RealMatrix& im);

struct EigenDecomposition {
  RealVector eigenvalues;  // ascending
  Matrix eigenvectors;     // unitary, column i pairs with eigenvalues[i]
};

EigenDecomposition eigh(const HermitianMatrix& a);

// Schatten p-norm (sum of p-th powers of singular values)^(1/p), p >= 1.
// Singular values come from the eigendecomposition of A* A, clamped at zero.
double schatten_norm(const Matrix& a, double p);

std::vector<double> singular_values(const Matrix& a);

// Hermitian dilation 2^(-1/3) [[0, A], [A*, 0]]. Each singular value of A
// appears twice, scaled by 2^(-1/3), so the Schatten-3 norm is preserved.
HermitianMatrix dilate(const Matrix& a);

bool is_hermitian(const Matrix& m, double tol = kHermitianTol);

}  // namespace schatten
