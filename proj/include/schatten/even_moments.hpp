#pragma once

#include "schatten/embedding.hpp"
#include "schatten/matrix_core.hpp"

namespace schatten {

// Trigonometric moments of the circle measure representing an even-p plane:
// mk = int exp(2ik theta) dmu(theta) with mu supported on [0, pi) so that
// int |cos(phi - theta)|^p dmu(theta) = ||cos(phi) A + sin(phi) B||_p^p.
struct MomentTriple {
  double m0 = 0.0;
  Complex m1{0.0, 0.0};
  Complex m2{0.0, 0.0};
};

struct ToeplitzReport {
  Eigen::Matrix3cd matrix;
  double min_eigenvalue = 0.0;
  bool psd = false;
};

struct P2Result {
  double m0 = 0.0;
  Complex m1{0.0, 0.0};
  bool feasible = false;
  CircleMeasure measure;
};

// p = 2 moments with the exact two-atom representing measure obtained by
// diagonalizing the quadratic form (x, y) -> ||xA + yB||_2^2. The feasible
// flag asserts |m1| <= m0, which always holds by Cauchy-Schwarz for the
// trace inner product.
P2Result p2_moments(const HermitianMatrix& a, const HermitianMatrix& b);

// p = 4 moments from exact trace arithmetic:
//   m0 = tr A^4 + 2/3 (2 tr A^2B^2 + tr ABAB) + tr B^4
//   m1 = tr A^4 - tr B^4 + 2i (tr A^3B + tr AB^3)
//   m2 = tr A^4 + tr B^4 - 2 (2 tr A^2B^2 + tr ABAB) + 4i (tr A^3B - tr AB^3)
MomentTriple p4_moments(const HermitianMatrix& a, const HermitianMatrix& b);

// 3x3 Hermitian Toeplitz matrix [[m0,m1,m2],[m1*,m0,m1],[m2*,m1*,m0]] and its
// smallest eigenvalue; psd allows slack -1e-10 * m0.
ToeplitzReport toeplitz_check(const MomentTriple& m);

// Nonnegative measure with at most 3 atoms on [0, pi) reproducing the three
// moments to 1e-9 * m0. Positive definite moment matrices get the exact
// three-point quadrature supported on the unit-circle zeros of the
// paraorthogonal polynomial z Phi2(z) - Phi2*(z); singular ones concentrate
// on the zeros of the kernel polynomial of the moment matrix.
CircleMeasure recover_trig_measure(const MomentTriple& m);

// Max over `directions` equally spaced angles phi of the relative gap between
// the measure moment sum(mass |cos(phi - theta)|^4) and ||cos(phi) A +
// sin(phi) B||_4^4.
double p4_verify(const HermitianMatrix& a, const HermitianMatrix& b, const CircleMeasure& nu,
                 int directions);

struct SosResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double commutator_term = 0.0;
};

// Both sides of the degree-2 trigonometric positivity identity behind the
// S_4 embedding: lhs is the five-line trace combination in theta1, theta2;
// rhs is tr(M* M) for M = (e^{i theta1}-1)(e^{i theta2}-1) A^2
// - i (e^{i(theta1+theta2)}-1)(AB+BA) - (e^{i theta1}+1)(e^{i theta2}+1) B^2
// plus |e^{i theta1}-e^{i theta2}|^2 / 3 * ||AB-BA||_2^2, reported separately
// as commutator_term. lhs = rhs identically and rhs >= 0.
SosResult sos_identity_eval(const HermitianMatrix& a, const HermitianMatrix& b, double theta1,
                            double theta2);

struct Rational {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Rational operator+(Rational x, Rational y);
Rational operator-(Rational x, Rational y);
Rational operator*(Rational x, Rational y);
Rational operator/(Rational x, Rational y);
bool operator==(Rational x, Rational y);

struct Refute3dResult {
  Rational mu_p;    // mu(t3^p)
  Rational mu_mid;  // mu(t3^{p-2} (1 - t3^2))
  Rational mu_low;  // mu(t3^{p-4} (1 - t3^2)^2)
  Rational combo;   // mu((2 t3^2 - 1)^2 t3^{p-4})
};

// Moments forced on any representing measure of the 3-space spanned by
// diag-like symmetric 2x2 matrices with eigenvalues x3 +- |(x1, x2)|, for
// even p >= 4: matching the r-expansion of (1+r)^p + (1-r)^p against the
// angular average of |r w + t3|^p gives mu(t3^{p-k} (1-t3^2)^{k/2}) = 2 / W_k
// with the Wallis coefficient W_k = binom(k, k/2) / 2^k. The combination
// mu((2 t3^2 - 1)^2 t3^{p-4}) evaluates to -2/3 < 0 although the integrand is
// nonnegative, so no such measure exists. Exact rational arithmetic.
Refute3dResult refute_3d_moments(int p);

// Numerical counterpart: nonnegative least squares fit of the three forced
// moments by a discrete measure on a Fibonacci grid of S^2. Returns the
// residual, which stays above (2/3)/sqrt(6) ~ 0.27 for any grid because the
// target violates the halfspace mu((2t3^2-1)^2 t3^{p-4}) >= 0.
double refute_3d_grid_residual(int p, int grid_points);

}  // namespace schatten
