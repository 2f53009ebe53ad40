// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Every battery is seeded, so reruns are bit-for-bit identical.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "schatten/embedding.hpp"
#include "schatten/errors.hpp"
#include "schatten/even_moments.hpp"
#include "schatten/matrix_core.hpp"
#include "schatten/rng.hpp"
#include "schatten/scalar_function.hpp"
#include "schatten/trace_derivatives.hpp"

namespace {

using namespace schatten;

int failures = 0;

void report(int idx, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", idx, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

HermitianMatrix symmetrized(const Matrix& m) {
  return HermitianMatrix(0.5 * (m + Matrix(m.adjoint())));
}

// 2x2 Hermitian with prescribed eigenvalues in a random frame.
HermitianMatrix straddling_2x2(double lo, double hi, Rng& rng) {
  const Matrix u = eigh(random_hermitian(2, rng)).eigenvectors;
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = lo;
  d(1, 1) = hi;
  return symmetrized(u * d * u.adjoint());
}

HermitianMatrix invertible_hermitian(Eigen::Index n, Rng& rng, double floor) {
  for (;;) {
    const HermitianMatrix a = random_hermitian(n, rng);
    const auto ed = eigh(a);
    if (ed.eigenvalues.cwiseAbs().minCoeff() >= floor * a.mat().norm()) return a;
  }
}

HermitianMatrix indefinite_invertible(Eigen::Index n, Rng& rng) {
  for (;;) {
    const HermitianMatrix b = random_hermitian(n, rng);
    const auto ed = eigh(b);
    const double lo = ed.eigenvalues.minCoeff();
    const double hi = ed.eigenvalues.maxCoeff();
    if (lo < 0.0 && hi > 0.0 &&
        ed.eigenvalues.cwiseAbs().minCoeff() >= 0.15 * std::max(-lo, hi))
      return b;
  }
}

ScalarFunction random_kernel_spline(int order, Rng& rng, double* wsum) {
  const int count = 1 + static_cast<int>(rng.uniform() * 3.0);
  std::vector<double> knots, weights;
  for (bool separated = false; !separated;) {
    knots.clear();
    for (int i = 0; i < count; ++i) knots.push_back(-1.0 + 2.0 * rng.uniform());
    std::sort(knots.begin(), knots.end());
    separated = true;
    for (int i = 1; i < count; ++i) separated = separated && knots[i] - knots[i - 1] >= 1e-6;
  }
  *wsum = 0.0;
  for (int i = 0; i < count; ++i) {
    weights.push_back(0.1 + 0.9 * rng.uniform());
    *wsum += weights.back();
  }
  return ScalarFunction::spline(order, {}, knots, weights);
}

// Median of the FD oracle over three unrelated step sizes; ok only when the
// spread stays inside the budget, so a fluke agreement cannot slip through.
struct Fd3 {
  bool ok = false;
  double value = 0.0;
};

Fd3 stable_fd3(const ScalarFunction& f, const HermitianMatrix& a, const HermitianMatrix& b,
               int k, double budget, double h0 = 0.0) {
  const double bnorm = b.mat().norm();
  if (bnorm == 0.0) return {true, 0.0};
  const double h = h0 > 0.0 ? h0 : 1e-2 * (1.0 + a.mat().norm() / bnorm);
  double v[3];
  try {
    v[0] = fd_oracle(f, a, b, k, h);
    v[1] = fd_oracle(f, a, b, k, 0.71 * h);
    v[2] = fd_oracle(f, a, b, k, 0.53 * h);
  } catch (const SingularityTooClose&) {
    return {};
  }
  std::sort(v, v + 3);
  if (v[2] - v[0] > budget) return {};
  return {true, v[1]};
}

// The oracle's residual is O(h^4), so a second Richardson level across
// consecutive step pairs cancels it. Three extrapolants from four steps must
// all agree within the budget: a surviving h^6 tail spreads them apart
// geometrically, and a shared-evaluation error moves neighbours in opposite
// directions, so agreement is a real signal rather than a shared artifact.
Fd3 richardson_fd2(const ScalarFunction& f, const HermitianMatrix& a,
                   const HermitianMatrix& b, int k, double budget, double h0) {
  constexpr double r = 0.84;
  const double t = std::pow(r, 4);
  double w[4];
  double e[3];
  try {
    double h = h0;
    for (int i = 0; i < 4; ++i, h *= r) w[i] = fd_oracle(f, a, b, k, h);
  } catch (const SingularityTooClose&) {
    return {};
  }
  for (int i = 0; i < 3; ++i) e[i] = (w[i + 1] - t * w[i]) / (1.0 - t);
  std::sort(e, e + 3);
  if (e[2] - e[0] > budget) return {};
  return {true, e[1]};
}

// 1. Isometric embedding of random planes, plus exactness on commuting
// diagonal pairs, within the stated wall-clock budget.
void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Rng rng(100000 + static_cast<std::uint64_t>(trial));
    const Eigen::Index n = 2 + trial % 3;
    const HermitianMatrix a = random_hermitian(n, rng);
    const HermitianMatrix b = random_hermitian(n, rng);
    const CircleMeasure nu = circle_measure(a, b);
    worst = std::max(worst, verify_isometry(nu, a, b, 180));
  }
  double worst_diag = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(110000 + static_cast<std::uint64_t>(trial));
    const Eigen::Index n = 2 + trial % 3;
    const HermitianMatrix a = random_diagonal(n, rng);
    const HermitianMatrix b = random_diagonal(n, rng);
    const CircleMeasure nu = circle_measure(a, b);
    worst_diag = std::max(worst_diag, verify_isometry(nu, a, b, 180));
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = worst <= 1e-4 && worst_diag <= 1e-10 && elapsed <= 300.0;
  report(1, pass,
         "embedding isometry: 500 random pairs max error " + num(worst) +
             " (tol 1e-4), 50 commuting diagonal pairs max error " + num(worst_diag) +
             " (tol 1e-10), " + num(elapsed) + " s");
}

// 2. Closed-form trace derivatives against the finite-difference oracle.
void criterion_2() {
  struct Fn {
    const char* name;
    ScalarFunction f;
    bool kinked;
  };
  const std::vector<Fn> fns = {{"x^3", ScalarFunction::monomial(3), false},
                               {"x^4", ScalarFunction::monomial(4), false},
                               {"|x|^3", ScalarFunction::abs_cubed(), true}};
  const double factorial[5] = {1.0, 1.0, 2.0, 6.0, 24.0};
  double worst = 0.0;
  std::string exhausted;
  std::uint64_t index = 0;
  for (const Fn& fn : fns) {
    for (int k = 1; k <= 4; ++k) {
      for (int trial = 0; trial < 500; ++trial, ++index) {
        const Eigen::Index n = 2 + trial % 5;
        double closed = 0.0;
        double fd = 0.0;
        double floor = 0.0;
        bool done = false;
        for (int attempt = 0; attempt < 80 && !done; ++attempt) {
          Rng rng(200000 + index + static_cast<std::uint64_t>(attempt) * 0x9e3779b9ULL);
          const HermitianMatrix a = random_hermitian(n, rng);
          const HermitianMatrix b = random_hermitian(n, rng);
          closed = factorial[k] * trace_fun_derivative(fn.f, a, b, k);
          floor = 1e-3 * static_cast<double>(n) * std::pow(1.0 + b.mat().norm(), k);
          if (fn.kinked) {
            const Fd3 probe =
                stable_fd3(fn.f, a, b, k, 5e-7 * std::max(std::abs(closed), floor));
            if (!probe.ok) continue;
            fd = probe.value;
          } else {
            fd = fd_oracle(fn.f, a, b, k, 2.0);
          }
          done = true;
        }
        if (!done) {
          exhausted = std::string(fn.name) + " k=" + std::to_string(k) + " trial " +
                      std::to_string(trial);
          break;
        }
        const double denom = std::max({std::abs(closed), std::abs(fd), floor});
        worst = std::max(worst, std::abs(closed - fd) / denom);
      }
      if (!exhausted.empty()) break;
    }
    if (!exhausted.empty()) break;
  }
  const bool pass = worst <= 1e-6 && exhausted.empty();
  report(2, pass,
         "trace derivatives vs FD oracle: 500 instances per (k, f), k in 1..4, "
         "max relative error " + num(worst) + " (tol 1e-6)" +
         (exhausted.empty() ? "" : ", no stable instance for " + exhausted));
}

// 3. Fourth-derivative positivity decomposition and the grouped pattern sums.
void criterion_3() {
  double min_form = 0.0;
  double max_identity = 0.0;
  double max_same_sign = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    Rng rng(300000 + static_cast<std::uint64_t>(trial));
    const Eigen::Index n = 2 + trial % 3;
    const HermitianMatrix a = invertible_hermitian(n, rng, 1e-6);
    const HermitianMatrix b = random_hermitian(n, rng);
    const PatternSums4 ps = pattern_sums4(a, b);
    const auto forms = sos_form_values(a, b);
    const double scale = std::max(ps.scale, 1e-300);
    const double weighted = ps.s_mmmm + 4.0 * (ps.s_pmmm + ps.s_ppmm + ps.s_mppp) +
                            2.0 * ps.s_pmpm + ps.s_pppp;
    max_identity = std::max(max_identity, std::abs(weighted - ps.total) / scale);
    max_same_sign = std::max(
        max_same_sign, std::max(std::abs(ps.s_mmmm), std::abs(ps.s_pppp)) / scale);
    min_form = std::min({min_form, forms.first.value / std::max(forms.first.scale, 1e-300),
                         forms.second.value / std::max(forms.second.scale, 1e-300)});
  }
  const bool pass = min_form >= -1e-10 && max_identity <= 1e-9 && max_same_sign <= 1e-12;
  report(3, pass,
         "positivity decomposition: 2000 instances, min form value " + num(min_form) +
             " (tol -1e-10), group identity error " + num(max_identity) +
             " (tol 1e-9), same-sign residue " + num(max_same_sign) + " (tol 1e-12)");
}

// 4. Third-derivative positivity: pattern sums with B PSD and the order-3
// spline grid scan.
void criterion_4() {
  double min_sum = 0.0;
  for (int trial = 0; trial < 2000; ++trial) {
    Rng rng(400000 + static_cast<std::uint64_t>(trial));
    const Eigen::Index n = 2 + trial % 3;
    const HermitianMatrix a = random_hermitian(n, rng);
    const HermitianMatrix b = random_psd(n, rng);
    const SosCertificate cert = pattern_sums3(a, b);
    min_sum = std::min(min_sum, cert.value / std::max(cert.scale, 1e-300));
  }
  double min_scan = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(410000 + static_cast<std::uint64_t>(trial));
    const Eigen::Index n = 2 + trial % 2;
    const HermitianMatrix a = random_hermitian(n, rng);
    const HermitianMatrix b = random_psd(n, rng);
    double wsum = 0.0;
    const ScalarFunction f = random_kernel_spline(3, rng, &wsum);
    const PositivityScan scan =
        spline_positivity_check(f, a, b, GridSpec{-1.5, 1.5, 50}, 3);
    const double scale = wsum * 2.0 * std::pow(1.0 + b.mat().norm(), 3) *
                         static_cast<double>(n);
    min_scan = std::min(min_scan, scan.min_value / scale);
  }
  const bool pass = min_sum >= -1e-10 && min_scan >= -1e-6;
  report(4, pass,
         "third-derivative positivity: 2000 PSD-direction pattern sums, min " +
             num(min_sum) + " (tol -1e-10); 200 order-3 spline scans, min " +
             num(min_scan) + " (tol -1e-6)");
}

// 5. Fourth-derivative spline scan over random kernel combinations.
void criterion_5() {
  double min_scan = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(500000 + static_cast<std::uint64_t>(trial));
    const Eigen::Index n = 2 + trial % 2;
    const HermitianMatrix a = random_hermitian(n, rng);
    const HermitianMatrix b = random_hermitian(n, rng);
    double wsum = 0.0;
    const ScalarFunction f = random_kernel_spline(4, rng, &wsum);
    const PositivityScan scan =
        spline_positivity_check(f, a, b, GridSpec{-1.5, 1.5, 50}, 4);
    const double scale = wsum * 6.0 * std::pow(1.0 + b.mat().norm(), 4) *
                         static_cast<double>(n);
    min_scan = std::min(min_scan, scan.min_value / scale);
  }
  report(5, min_scan >= -1e-6,
         "fourth-derivative spline scan: 200 instances, 50 grid points each, min " +
             num(min_scan) + " (tol -1e-6)");
}

// 6. Three-point inequality at p = 3 and p = 3/2, and agreement between the
// direct and the step-function evaluation.
void criterion_6() {
  double min_slack = 0.0;
  for (double p : {3.0, 1.5}) {
    for (int trial = 0; trial < 10000; ++trial) {
      Rng rng(600000 + static_cast<std::uint64_t>(trial) +
              (p == 3.0 ? 0u : 0x40000000u));
      const Matrix a = random_complex(4, rng);
      const Matrix b = random_complex(4, rng);
      const double slack = hanner_check(a, b, p);
      const double scale = std::pow(schatten_norm(a, p) + schatten_norm(b, p), p);
      min_slack = std::min(min_slack, slack / std::max(scale, 1e-300));
    }
  }
  double max_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(620000 + static_cast<std::uint64_t>(trial));
    const Matrix a = random_complex(3, rng);
    const Matrix b = random_complex(3, rng);
    const double direct = hanner_check(a, b, 3.0, HannerMode::direct);
    const double via = hanner_check(a, b, 3.0, HannerMode::via_embedding);
    const double scale = std::pow(schatten_norm(a, 3.0) + schatten_norm(b, 3.0), 3.0);
    max_gap = std::max(max_gap, std::abs(direct - via) / std::max(scale, 1e-300));
  }
  const bool pass = min_slack >= -1e-9 && max_gap <= 1e-6;
  report(6, pass,
         "three-point inequality: 10^4 pairs at p=3 and p=3/2, min relative slack " +
             num(min_slack) + " (tol -1e-9); direct vs step-function gap " +
             num(max_gap) + " on 100 instances (tol 1e-6)");
}

// 7. Even-p moment criteria: Toeplitz PSD, measure recovery, the positivity
// identity, and p = 2 feasibility.
void criterion_7() {
  double min_eig = 0.0;
  double max_verify = 0.0;
  double max_sos = 0.0;
  bool feasible = true;
  bool rhs_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    Rng rng(700000 + static_cast<std::uint64_t>(trial));
    const Eigen::Index n = 2 + trial % 3;
    const HermitianMatrix a = random_hermitian(n, rng);
    const HermitianMatrix b = random_hermitian(n, rng);
    const MomentTriple m = p4_moments(a, b);
    const ToeplitzReport toep = toeplitz_check(m);
    min_eig = std::min(min_eig, toep.min_eigenvalue / (m.m0 + 1e-300));
    const CircleMeasure nu = recover_trig_measure(m);
    max_verify = std::max(max_verify, p4_verify(a, b, nu, 90));
    const double theta1 = 2.0 * std::numbers::pi * rng.uniform();
    const double theta2 = 2.0 * std::numbers::pi * rng.uniform();
    const SosResult sos = sos_identity_eval(a, b, theta1, theta2);
    max_sos = std::max(max_sos,
                       std::abs(sos.lhs - sos.rhs) / (16.0 * m.m0 + sos.rhs + 1e-300));
    rhs_ok = rhs_ok && sos.rhs >= 0.0;
    feasible = feasible && p2_moments(a, b).feasible;
  }
  const bool pass =
      min_eig >= -1e-9 && max_verify <= 1e-8 && max_sos <= 1e-10 && rhs_ok && feasible;
  report(7, pass,
         "even-p criteria: 1000 pairs, Toeplitz min eigenvalue " + num(min_eig) +
             " (tol -1e-9), recovery error " + num(max_verify) +
             " (tol 1e-8), identity gap " + num(max_sos) +
             " (tol 1e-10), rhs nonnegative and p=2 feasible " +
             (rhs_ok && feasible ? "everywhere" : "VIOLATED"));
}

// 8. Exact rational obstruction for the symmetric 3-space.
void criterion_8() {
  const Refute3dResult r = refute_3d_moments(4);
  const bool exact = r.mu_p == Rational{2, 1} && r.mu_mid == Rational{4, 1} &&
                     r.mu_low == Rational{16, 3} && r.combo == Rational{-2, 3};
  const double fp_gap = std::abs(r.combo.value() + 2.0 / 3.0);
  const double residual = refute_3d_grid_residual(4, 2000);
  const bool pass = exact && fp_gap <= 1e-12 && residual >= 0.01;
  report(8, pass,
         std::string("3-space obstruction: forced moments ") +
             (exact ? "(2, 4, 16/3), combination -2/3 exactly" : "WRONG") +
             ", fp gap " + num(fp_gap) + " (tol 1e-12), grid residual " + num(residual) +
             " (floor 0.01)");
}

// 9. 2x2 closed form for odd p against the FD oracle, all summands
// nonnegative.
void criterion_9() {
  double worst = 0.0;
  bool terms_ok = true;
  int evaluated = 0;
  for (int trial = 0; trial < 200; ++trial) {
    for (int p : {3, 5, 7}) {
      bool done = false;
      for (int attempt = 0; attempt < 120 && !done; ++attempt) {
        Rng rng(900000 + static_cast<std::uint64_t>(trial) * 8 +
                static_cast<std::uint64_t>(p) +
                static_cast<std::uint64_t>(attempt) * 0x9e3779b9ULL);
        const double lo = -(0.4 + 1.6 * rng.uniform());
        const double hi = 0.4 + 1.6 * rng.uniform();
        const HermitianMatrix a = straddling_2x2(lo, hi, rng);
        const HermitianMatrix b = random_hermitian(2, rng);
        const OddPowerTerms terms = two_by_two_odd_p_terms(a, b, p);
        for (double term : terms.terms) terms_ok = terms_ok && term >= 0.0;
        const ScalarFunction f = ScalarFunction::spline(p + 1, {}, {0.0}, {1.0});
        // FD roundoff grows like h^-(p+1) while truncation grows like h^4, so
        // enlarge the step past the oracle's conservative default (staying
        // inside its kink guard) and scan a few multipliers for an estimate
        // whose extrapolants agree.
        const double h_def = 1e-2 * (1.0 + a.mat().norm() / b.mat().norm());
        double kink = std::numeric_limits<double>::infinity();
        for (double c : singular_points(a, b)) kink = std::min(kink, std::abs(c));
        const double h_cap = 0.05 * kink;
        if (h_cap < h_def) continue;
        const double budget = 2e-6 * std::abs(terms.value) + 1e-12;
        Fd3 probe;
        double prev = 0.0;
        for (double mult : {2.8, 4.0, 2.0, 5.6}) {
          const double h0 = std::min(mult * h_def, h_cap);
          if (h0 == prev) continue;
          prev = h0;
          probe = richardson_fd2(f, a, b, p + 1, budget, h0);
          if (probe.ok) break;
        }
        if (!probe.ok) continue;
        done = true;
        ++evaluated;
        worst = std::max(
            worst, std::abs(terms.value - probe.value) /
                       std::max({std::abs(terms.value), std::abs(probe.value), 1e-12}));
      }
      if (!done) terms_ok = false;
    }
  }
  const bool pass = worst <= 1e-5 && terms_ok && evaluated == 600;
  report(9, pass,
         "2x2 odd powers: 200 instances at p in {3,5,7}, max relative FD gap " +
             num(worst) + " (tol 1e-5), all summands nonnegative, " +
             std::to_string(evaluated) + "/600 evaluated");
}

// 10. Far-field decay of the fourth-derivative density: fitted log-log slope
// at |t| in [10, 100] times the outermost singular point.
void criterion_10() {
  double worst_slope = -1e9;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(1000000 + static_cast<std::uint64_t>(trial));
    const Eigen::Index n = 2 + trial % 2;
    const HermitianMatrix a = random_hermitian(n, rng);
    const HermitianMatrix b = indefinite_invertible(n, rng);
    double outer = 1.0;
    for (double c : singular_points(a, b)) outer = std::max(outer, std::abs(c));
    for (double sign : {1.0, -1.0}) {
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      int count = 0;
      for (int j = 0; j < 12; ++j) {
        const double t = sign * outer * 10.0 * std::pow(10.0, j / 11.0);
        const double d = smooth_density(a, b, t);
        if (d <= 0.0) continue;
        const double x = std::log(std::abs(t));
        const double y = std::log(d);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
      }
      if (count < 10) {
        worst_slope = 0.0;
        continue;
      }
      const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
      worst_slope = std::max(worst_slope, slope);
    }
  }
  report(10, worst_slope <= -4.5,
         "density decay: 50 invertible indefinite directions, worst log-log slope " +
             num(worst_slope) + " over |t| in [10, 100] x outermost kink (ceiling -4.5)");
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
  for (size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i) + 1, false, std::string("unexpected exception: ") + e.what());
    }
  }
  if (failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", failures);
  return 1;
}
