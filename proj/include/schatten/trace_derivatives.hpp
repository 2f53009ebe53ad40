#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "schatten/divided_differences.hpp"
#include "schatten/matrix_core.hpp"

namespace schatten {

// F^(k)(0) / k! for F(t) = tr f(A + tB), computed in the eigenbasis of A as
//
//   (1/k) sum over index tuples of [lambda_i1, ..., lambda_ik]_{f'} times
//   the cyclic product B_{i1 i2} B_{i2 i3} ... B_{ik i1}.
//
// Divided differences are cached per eigenvalue multiset. If a confluent
// eigenvalue cluster covers a knot of f' with insufficient smoothness, the
// spectrum is jittered once by 1e-7 |A|_F diag(1..n) in the eigenbasis; a
// cluster the jitter fails to resolve surfaces as SmoothnessViolation.
double trace_fun_derivative(const ScalarFunction& f, const HermitianMatrix& a,
                            const HermitianMatrix& b, int k);

// Raw k-th derivative F^(k)(0) by central finite differences on the minimal
// symmetric stencil, Richardson extrapolated once (so k! times
// trace_fun_derivative up to the FD error). h = 0 selects the default step
// 1e-2 (1 + |A|_F / |B|_F). When f has knots and t = 0 lies within 10h of a
// kink crossing of the spectrum, throws SingularityTooClose.
double fd_oracle(const ScalarFunction& f, const HermitianMatrix& a,
                 const HermitianMatrix& b, int k, double h = 0.0);

// Exact-pattern sums of the k = 4 expansion for f' proportional to x|x|,
// grouped by the sign pattern of the eigenvalue tuple. Each field holds the
// sum over tuples whose signs match that pattern exactly; cyclic rotations
// of a pattern carry equal sums, whence the 1/4/4/2/4/1 weights in total.
struct PatternSums4 {
  double s_mmmm = 0.0;  // ----
  double s_pmmm = 0.0;  // +---
  double s_ppmm = 0.0;  // ++--
  double s_pmpm = 0.0;  // +-+-
  double s_mppp = 0.0;  // -+++
  double s_pppp = 0.0;  // ++++
  double total = 0.0;   // sum over all n^4 tuples
  double scale = 0.0;   // sum of |term|, the natural comparison scale
  bool jittered = false;
};

// Requires A nonsingular (eigenvalues at least 1e-9 |A|_F from zero) with a
// spectrum that is distinct after at most one jitter.
PatternSums4 pattern_sums4(const HermitianMatrix& a, const HermitianMatrix& b);

struct SosPart {
  double weight;  // nonnegative factor
  double square;  // squared magnitude or PSD quadratic form value
};

struct SosCertificate {
  std::string kind;  // block_patterns | alternating_patterns | third_derivative
  double value = 0.0;
  double scale = 0.0;
  bool jittered = false;
  std::vector<SosPart> parts;  // value = sum of weight * square
};

// Sum-of-squares certificates for the k = 4 pattern sums: the first covers
// the block patterns (+---, ++--, -+++ up to rotation) and equals their
// summed representatives; the second covers the alternating pattern and
// equals s_pmpm.
std::pair<SosCertificate, SosCertificate> sos_form_values(const HermitianMatrix& a,
                                                          const HermitianMatrix& b);

// k = 3 analogue for f' proportional to |x|, valid for positive
// semidefinite B: returns the two mixed-pattern representatives
// s_mpp + s_pmm as a sum of weighted squares (weights 2|lambda_i| eta_k
// with eta the eigenvalues of B).
SosCertificate pattern_sums3(const HermitianMatrix& a, const HermitianMatrix& b);

struct OddPowerTerms {
  std::vector<double> terms;  // each >= 0 by construction
  double value = 0.0;         // (tr|A+tB|^p)^(p+1) at t = 0
};

// Closed form for the (p+1)-st derivative of t -> tr|A+tB|^p at 0 for 2x2 A
// with eigenvalues straddling zero and odd p in {3, 5, 7}. Every term of
// the expansion is nonnegative.
OddPowerTerms two_by_two_odd_p_terms(const HermitianMatrix& a,
                                     const HermitianMatrix& b, int p);
double two_by_two_odd_p(const HermitianMatrix& a, const HermitianMatrix& b, int p);

struct GridSpec {
  double t_min;
  double t_max;
  int points;
};

struct PositivityScan {
  double min_value = 0.0;
  double argmin_t = 0.0;
  int evaluated = 0;
  int skipped = 0;  // grid points within 10h of a kink crossing
};

// Minimum observed FD derivative of the given order of t -> tr f(A + tB)
// over the grid, skipping points within 10h of a spectral kink crossing.
// order 3 requires B positive semidefinite; kernel weights must be >= 0.
PositivityScan spline_positivity_check(const ScalarFunction& f,
                                       const HermitianMatrix& a,
                                       const HermitianMatrix& b,
                                       const GridSpec& grid, int order,
                                       double h = 0.0);

struct ConjectureProbeReport {
  int k = 0;
  int trials = 0;
  int evaluated = 0;
  int skipped = 0;
  bool has_min = false;
  double min_value = 0.0;  // normalized k-th FD derivative
  int argmin_trial = -1;
  double argmin_t = 0.0;
  Matrix argmin_a;
  Matrix argmin_b;
  std::vector<double> argmin_knots;
  std::vector<double> argmin_weights;
};

// Randomized search for negative k-th derivatives of tr f(A + tB) over
// random instances with f a nonnegative combination of order-k kernels
// (B drawn positive semidefinite for odd k). Reports the minimum found;
// purely exploratory, asserts nothing.
ConjectureProbeReport conjecture_probe(int k, int trials, std::uint64_t seed);

}  // namespace schatten
