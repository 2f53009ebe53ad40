#include "schatten/trace_derivatives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <Eigen/Dense>

#include "schatten/rng.hpp"

namespace schatten {

namespace {

using CLD = std::complex<long double>;
using MatrixLD = Eigen::Matrix<CLD, Eigen::Dynamic, Eigen::Dynamic>;

constexpr double kZeroEigTol = 1e-9;
constexpr double kJitterScale = 1e-7;

struct Span {
  double lo, hi;
};

// Gap clustering of an ascending list, same rule as the divided-difference
// table uses on its nodes.
std::vector<Span> spectrum_clusters(const RealVector& lambda) {
  std::vector<double> v(lambda.data(), lambda.data() + lambda.size());
  const double tau = confluence_tolerance(v);
  std::vector<Span> spans;
  size_t start = 0;
  for (size_t i = 1; i <= v.size(); ++i) {
    if (i == v.size() || v[i] - v[i - 1] > tau) {
      spans.push_back({v[start], v[i - 1]});
      start = i;
    }
  }
  return spans;
}

// True when some tuple of k eigenvalues would force the divided-difference
// table to differentiate f' at a knot beyond its smoothness: a tuple can
// stack up to k nodes inside any one cluster, so any cluster whose span
// covers a knot is fatal once k - 1 exceeds the knot smoothness.
bool cluster_covers_knot(const RealVector& lambda, const ScalarFunction& fp, int k) {
  if (!fp.has_kernel() || k - 1 <= fp.knot_smoothness()) return false;
  for (const Span& s : spectrum_clusters(lambda))
    for (double c : fp.knots())
      if (c >= s.lo && c <= s.hi) return true;
  return false;
}

// Divided differences of f over eigenvalue multisets, cached on the sorted
// index tuple.
class DdCache {
 public:
  DdCache(const ScalarFunction& f, const RealVector& lambda) : f_(f), lambda_(lambda) {}

  double get(const int* idx, int k) {
    int s[8];
    std::copy(idx, idx + k, s);
    std::sort(s, s + k);
    std::uint64_t key = 0;
    for (int i = 0; i < k; ++i) key = key << 8 | static_cast<std::uint64_t>(s[i]);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<double> nodes(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) nodes[static_cast<size_t>(i)] = lambda_(s[i]);
    double v = divided_difference(f_, nodes);
    cache_.emplace(key, v);
    return v;
  }

 private:
  const ScalarFunction& f_;
  const RealVector& lambda_;
  std::unordered_map<std::uint64_t, double> cache_;
};

long double eval_scalar_ld(const ScalarFunction& f, long double x) {
  long double v = 0.0L;
  const auto& poly = f.poly();
  for (size_t i = poly.size(); i-- > 0;) v = v * x + static_cast<long double>(poly[i]);
  const int m = f.kernel_order();
  const auto& knots = f.knots();
  const auto& w = f.weights();
  for (size_t i = 0; i < knots.size(); ++i) {
    long double u = x - static_cast<long double>(knots[i]);
    if (u == 0.0L) continue;
    long double mag = powl(fabsl(u), static_cast<long double>(m - 1));
    if (m % 2 != 0 && u < 0.0L) mag = -mag;
    v += static_cast<long double>(w[i]) * mag;
  }
  return v;
}

// tr f(A + tB) in extended precision. 2x2 goes through the closed-form
// eigenvalues; larger sizes refine the double eigenvalues with one
// long-double Rayleigh quotient each, which is what keeps the high-order
// finite differences below the noise floor. The abscissa stays long double
// so that evaluation points match the stencil offsets exactly.
long double trace_f_ld(const ScalarFunction& f, const Matrix& a, const Matrix& b,
                       long double t) {
  const long double tl = t;
  if (a.rows() == 2) {
    long double a00 = static_cast<long double>(a(0, 0).real()) + tl * b(0, 0).real();
    long double a11 = static_cast<long double>(a(1, 1).real()) + tl * b(1, 1).real();
    long double cre = static_cast<long double>(a(0, 1).real()) + tl * b(0, 1).real();
    long double cim = static_cast<long double>(a(0, 1).imag()) + tl * b(0, 1).imag();
    long double mid = (a00 + a11) / 2.0L;
    long double dif = (a00 - a11) / 2.0L;
    long double r = sqrtl(dif * dif + cre * cre + cim * cim);
    return eval_scalar_ld(f, mid + r) + eval_scalar_ld(f, mid - r);
  }
  const Eigen::Index n = a.rows();
  MatrixLD ml(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      ml(i, j) = CLD(static_cast<long double>(a(i, j).real()) + tl * b(i, j).real(),
                     static_cast<long double>(a(i, j).imag()) + tl * b(i, j).imag());
  Matrix md(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      md(i, j) = Complex(static_cast<double>(ml(i, j).real()),
                         static_cast<double>(ml(i, j).imag()));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(md);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("trace evaluation: eigendecomposition failed");
  long double total = 0.0L;
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Matrix<CLD, Eigen::Dynamic, 1> v =
        solver.eigenvectors().col(j).cast<CLD>();
    CLD num = (v.adjoint() * (ml * v))(0, 0);
    CLD den = (v.adjoint() * v)(0, 0);
    total += eval_scalar_ld(f, num.real() / den.real());
  }
  return total;
}

// Fornberg weights for the m-th derivative at 0 on the given grid.
std::vector<long double> fornberg_weights(const std::vector<long double>& x, int m) {
  const size_t np = x.size();
  std::vector<std::vector<long double>> c(np, std::vector<long double>(static_cast<size_t>(m) + 1, 0.0L));
  c[0][0] = 1.0L;
  long double c1 = 1.0L;
  long double c4 = x[0];
  for (size_t i = 1; i < np; ++i) {
    int mn = static_cast<int>(std::min(i, static_cast<size_t>(m)));
    long double c2 = 1.0L;
    long double c5 = c4;
    c4 = x[i];
    for (size_t j = 0; j < i; ++j) {
      long double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int s = mn; s >= 1; --s)
          c[i][static_cast<size_t>(s)] =
              c1 * (s * c[i - 1][static_cast<size_t>(s) - 1] - c5 * c[i - 1][static_cast<size_t>(s)]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int s = mn; s >= 1; --s)
        c[j][static_cast<size_t>(s)] =
            (c4 * c[j][static_cast<size_t>(s)] - s * c[j][static_cast<size_t>(s) - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<long double> w(np);
  for (size_t i = 0; i < np; ++i) w[i] = c[i][static_cast<size_t>(m)];
  return w;
}

int stencil_radius(int k) { return k % 2 == 0 ? k / 2 + 1 : (k + 1) / 2; }

// Symmetric k + 2 node stencil: integer offsets with the center dropped for
// even k (Fornberg weights still annihilate every lower-degree monomial).
std::vector<long double> stencil_offsets(int k) {
  const int m = stencil_radius(k);
  std::vector<long double> offsets;
  for (int j = -m; j <= m; ++j) {
    if (k % 2 == 0 && j == 0) continue;
    offsets.push_back(static_cast<long double>(j));
  }
  return offsets;
}

// Central FD derivative of order k of t -> tr f(A + tB) at t0, Richardson
// extrapolated once (the symmetric stencil has an h^2 error term).
double fd_derivative_at(const ScalarFunction& f, const Matrix& a, const Matrix& b,
                        int k, double h, double t0) {
  const auto offsets = stencil_offsets(k);
  const auto w = fornberg_weights(offsets, k);
  auto diff = [&](double step) {
    long double acc = 0.0L;
    for (size_t i = 0; i < offsets.size(); ++i) {
      if (w[i] == 0.0L) continue;
      acc += w[i] * trace_f_ld(f, a, b,
                               static_cast<long double>(t0) +
                                   offsets[i] * static_cast<long double>(step));
    }
    return acc / powl(static_cast<long double>(step), static_cast<long double>(k));
  };
  long double coarse = diff(h);
  long double fine = diff(h / 2);
  return static_cast<double>((4.0L * fine - coarse) / 3.0L);
}

// Real t where some eigenvalue of A + tB crosses the knot c, i.e. roots of
// det(A + tB - cI): the near-real eigenvalues of -B^{-1}(A - cI). Returns
// false when B is too close to singular to decide.
bool kink_crossings(const Matrix& a, const Matrix& b, const std::vector<double>& knots,
                    std::vector<double>* out) {
  Eigen::SelfAdjointEigenSolver<Matrix> bs(b);
  if (bs.info() != Eigen::Success) return false;
  const double bmax = bs.eigenvalues().cwiseAbs().maxCoeff();
  if (bmax == 0.0 || bs.eigenvalues().cwiseAbs().minCoeff() < 1e-10 * bmax) return false;
  const Eigen::Index n = a.rows();
  Matrix binv = bs.eigenvectors() *
                bs.eigenvalues().cwiseInverse().cast<Complex>().asDiagonal() *
                bs.eigenvectors().adjoint();
  for (double c : knots) {
    Matrix pencil = -binv * (a - c * Matrix::Identity(n, n));
    Eigen::ComplexEigenSolver<Matrix> ces(pencil);
    if (ces.info() != Eigen::Success) return false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Complex mu = ces.eigenvalues()(i);
      if (std::abs(mu.imag()) <= 1e-8 * (1.0 + std::abs(mu)))
        out->push_back(mu.real());
    }
  }
  std::sort(out->begin(), out->end());
  return true;
}

// Fallback admissibility test when B is near singular: an eigenvalue moves
// at most |B| per unit t, so a kink is at least 10h away whenever every
// eigenvalue is 10h |B| clear of every knot.
bool clear_of_kinks_at(const ScalarFunction& f, const Matrix& a, const Matrix& b,
                       double t, double radius) {
  Eigen::SelfAdjointEigenSolver<Matrix> s(a + t * b);
  if (s.info() != Eigen::Success) return false;
  for (double c : f.knots())
    if ((s.eigenvalues().array() - c).abs().minCoeff() < radius) return false;
  return true;
}

struct Spectrum {
  RealVector lambda;
  Matrix b_tilde;
  int n1 = 0;
  bool jittered = false;
};

// Shared validation for the k = 4 pattern decompositions: nonzero
// eigenvalues, then a spectrum made pairwise distinct by at most one jitter.
Spectrum prepare_spectrum4(const HermitianMatrix& a, const HermitianMatrix& b,
                           const char* who) {
  if (a.n() != b.n()) throw DimensionMismatch(std::string(who) + ": size mismatch");
  const auto ed = eigh(a);
  const double anorm = a.mat().norm();
  RealVector lambda = ed.eigenvalues;
  const double zero_tol = kZeroEigTol * anorm;
  if (anorm == 0.0 || lambda.cwiseAbs().minCoeff() < zero_tol)
    throw ZeroEigenvalue(std::string(who) + ": eigenvalue too close to zero");
  std::vector<double> lv(lambda.data(), lambda.data() + lambda.size());
  const double tau = confluence_tolerance(lv);
  auto min_gap = [](const RealVector& l) {
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < l.size(); ++i) g = std::min(g, l(i) - l(i - 1));
    return g;
  };
  Spectrum sp;
  sp.lambda = lambda;
  if (lambda.size() > 1 && min_gap(lambda) <= tau) {
    const double eps = kJitterScale * anorm;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      sp.lambda(i) = lambda(i) + eps * static_cast<double>(i + 1);
    sp.jittered = true;
    if (min_gap(sp.lambda) <= tau || sp.lambda.cwiseAbs().minCoeff() < zero_tol)
      throw DegenerateSpectrum(std::string(who) + ": jitter failed to separate the spectrum");
  }
  sp.b_tilde = ed.eigenvectors.adjoint() * b.mat() * ed.eigenvectors;
  sp.n1 = 0;
  for (Eigen::Index i = 0; i < sp.lambda.size(); ++i)
    if (sp.lambda(i) < 0.0) ++sp.n1;
  return sp;
}

}  // namespace

double trace_fun_derivative(const ScalarFunction& f, const HermitianMatrix& a,
                            const HermitianMatrix& b, int k) {
  if (k < 1 || k > 8)
    throw std::invalid_argument("trace_fun_derivative: k must be in [1, 8]");
  if (a.n() != b.n()) throw DimensionMismatch("trace_fun_derivative: size mismatch");
  const auto ed = eigh(a);
  const ScalarFunction fp = f.derivative_function();
  RealVector lambda = ed.eigenvalues;
  if (cluster_covers_knot(lambda, fp, k)) {
    const double eps = kJitterScale * a.mat().norm();
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      lambda(i) += eps * static_cast<double>(i + 1);
  }
  const Matrix bt = ed.eigenvectors.adjoint() * b.mat() * ed.eigenvectors;
  const int n = static_cast<int>(a.n());
  DdCache cache(fp, lambda);
  int idx[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  Complex sum = 0.0;
  while (true) {
    Complex prod = bt(idx[k - 1], idx[0]);
    for (int j = 0; j + 1 < k; ++j) prod *= bt(idx[j], idx[j + 1]);
    if (prod != 0.0) sum += cache.get(idx, k) * prod;
    int pos = k - 1;
    while (pos >= 0 && ++idx[pos] == n) {
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return sum.real() / static_cast<double>(k);
}

double fd_oracle(const ScalarFunction& f, const HermitianMatrix& a,
                 const HermitianMatrix& b, int k, double h) {
  if (k < 1 || k > 8) throw std::invalid_argument("fd_oracle: k must be in [1, 8]");
  if (a.n() != b.n()) throw DimensionMismatch("fd_oracle: size mismatch");
  const double bnorm = b.mat().norm();
  if (bnorm == 0.0) return 0.0;
  if (h <= 0.0) h = 1e-2 * (1.0 + a.mat().norm() / bnorm);
  if (f.has_kernel()) {
    std::vector<double> crossings;
    if (kink_crossings(a.mat(), b.mat(), f.knots(), &crossings)) {
      for (double t : crossings)
        if (std::abs(t) < 10.0 * h)
          throw SingularityTooClose("fd_oracle: kink crossing within 10h of 0");
    } else {
      const int m = stencil_radius(k);
      for (int j = -m; j <= m; ++j)
        for (double step : {h, h / 2.0})
          if (!clear_of_kinks_at(f, a.mat(), b.mat(), j * step, 1e-12 * (1.0 + bnorm)))
            throw SingularityTooClose("fd_oracle: eigenvalue at a kink");
    }
  }
  return fd_derivative_at(f, a.mat(), b.mat(), k, h, 0.0);
}

PatternSums4 pattern_sums4(const HermitianMatrix& a, const HermitianMatrix& b) {
  const Spectrum sp = prepare_spectrum4(a, b, "pattern_sums4");
  const int n = static_cast<int>(sp.lambda.size());
  // Distinct nonzero nodes: the closed form applies, and it returns exact
  // zeros on same-sign tuples where the recursion would leave roundoff.
  std::unordered_map<std::uint64_t, double> cache;
  auto dd = [&](const int* idx) {
    int s[4];
    std::copy(idx, idx + 4, s);
    std::sort(s, s + 4);
    std::uint64_t key = 0;
    for (int i = 0; i < 4; ++i) key = key << 8 | static_cast<std::uint64_t>(s[i]);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::array<double, 4> nodes;
    std::array<int, 4> signs;
    for (int i = 0; i < 4; ++i) {
      nodes[static_cast<size_t>(i)] = sp.lambda(s[i]);
      signs[static_cast<size_t>(i)] = sp.lambda(s[i]) > 0.0 ? 1 : -1;
    }
    double v = dd_signed_square_closed(nodes, signs);
    cache.emplace(key, v);
    return v;
  };
  Complex buckets[16] = {};
  double scale = 0.0;
  int idx[4] = {0, 0, 0, 0};
  while (true) {
    Complex prod = sp.b_tilde(idx[0], idx[1]) * sp.b_tilde(idx[1], idx[2]) *
                   sp.b_tilde(idx[2], idx[3]) * sp.b_tilde(idx[3], idx[0]);
    if (prod != 0.0) {
      Complex term = dd(idx) * prod;
      int bits = 0;
      for (int j = 0; j < 4; ++j)
        if (sp.lambda(idx[j]) > 0.0) bits |= 1 << j;
      buckets[bits] += term;
      scale += std::abs(term);
    }
    int pos = 3;
    while (pos >= 0 && ++idx[pos] == n) {
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  PatternSums4 out;
  out.s_mmmm = buckets[0b0000].real();
  out.s_pmmm = buckets[0b0001].real();
  out.s_ppmm = buckets[0b0011].real();
  out.s_pmpm = buckets[0b0101].real();
  out.s_mppp = buckets[0b1110].real();
  out.s_pppp = buckets[0b1111].real();
  for (const Complex& v : buckets) out.total += v.real();
  out.scale = scale;
  out.jittered = sp.jittered;
  return out;
}

std::pair<SosCertificate, SosCertificate> sos_form_values(const HermitianMatrix& a,
                                                          const HermitianMatrix& b) {
  const Spectrum sp = prepare_spectrum4(a, b, "sos_form_values");
  const RealVector& l = sp.lambda;
  const Matrix& bt = sp.b_tilde;
  const int n = static_cast<int>(l.size());
  const int n1 = sp.n1;

  SosCertificate f1;
  f1.kind = "block_patterns";
  f1.jittered = sp.jittered;
  for (int i = n1; i < n; ++i)
    for (int j = 0; j < n1; ++j) {
      Complex inner = 0.0;
      for (int m = 0; m < n1; ++m)
        inner += l(i) * bt(i, m) * bt(m, j) / (l(i) - l(m));
      for (int m = n1; m < n; ++m)
        inner += l(j) * bt(i, m) * bt(m, j) / (l(j) - l(m));
      const double w = 2.0 / (l(i) - l(j));
      const double sq = std::norm(inner);
      f1.parts.push_back({w, sq});
      f1.value += w * sq;
      f1.scale += std::abs(w * sq);
    }

  // The alternating pattern: weighted squares over same-sign index pairs
  // with the middle index on the opposite side. The factor 2 is the frozen
  // calibration constant tying these squares to the exact-pattern sum.
  SosCertificate f2;
  f2.kind = "alternating_patterns";
  f2.jittered = sp.jittered;
  auto alternating_block = [&](int lo, int hi, int olo, int ohi) {
    for (int i1 = lo; i1 < hi; ++i1)
      for (int i2 = lo; i2 < hi; ++i2) {
        Complex inner = 0.0;
        for (int m = olo; m < ohi; ++m)
          inner += l(m) * bt(i1, m) * bt(m, i2) / ((l(i1) - l(m)) * (l(i2) - l(m)));
        const double w = 2.0 * std::abs(l(i1) + l(i2));
        const double sq = std::norm(inner);
        f2.parts.push_back({w, sq});
        f2.value += w * sq;
        f2.scale += std::abs(w * sq);
      }
  };
  alternating_block(0, n1, n1, n);  // negative pairs, positive middle
  alternating_block(n1, n, 0, n1);  // positive pairs, negative middle
  return {f1, f2};
}

SosCertificate pattern_sums3(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.n() != b.n()) throw DimensionMismatch("pattern_sums3: size mismatch");
  const auto bd = eigh(b);
  const double bnorm = b.mat().norm();
  if (bd.eigenvalues.minCoeff() < -1e-10 * bnorm)
    throw NotPsd("pattern_sums3: B must be positive semidefinite");
  const auto ed = eigh(a);
  const double anorm = a.mat().norm();
  if (anorm == 0.0 || ed.eigenvalues.cwiseAbs().minCoeff() < kZeroEigTol * anorm)
    throw ZeroEigenvalue("pattern_sums3: eigenvalue too close to zero");
  const RealVector& l = ed.eigenvalues;
  const Eigen::Index n = l.size();
  Eigen::Index n1 = 0;
  while (n1 < n && l(n1) < 0.0) ++n1;
  const Matrix bt = ed.eigenvectors.adjoint() * b.mat() * ed.eigenvectors;

  SosCertificate cert;
  cert.kind = "third_derivative";
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(n);
    const Eigen::Index lo = i < n1 ? n1 : 0;
    const Eigen::Index hi = i < n1 ? n : n1;
    for (Eigen::Index j = lo; j < hi; ++j) w(j) = bt(j, i) / (l(j) - l(i));
    const Eigen::VectorXcd x = ed.eigenvectors * w;
    const double wi = 2.0 * std::abs(l(i));
    for (Eigen::Index k = 0; k < n; ++k) {
      const double eta = std::max(0.0, bd.eigenvalues(k));
      const double sq = std::norm(bd.eigenvectors.col(k).dot(x));
      const double weight = wi * eta;
      if (weight * sq == 0.0) continue;
      cert.parts.push_back({weight, sq});
      cert.value += weight * sq;
      cert.scale += std::abs(weight * sq);
    }
  }
  return cert;
}

OddPowerTerms two_by_two_odd_p_terms(const HermitianMatrix& a,
                                     const HermitianMatrix& b, int p) {
  if (a.n() != 2 || b.n() != 2)
    throw DimensionMismatch("two_by_two_odd_p: matrices must be 2x2");
  if (p != 3 && p != 5 && p != 7)
    throw InvalidP("two_by_two_odd_p: p must be 3, 5, or 7");
  const auto ed = eigh(a);
  const double l1 = ed.eigenvalues(0);
  const double l2 = ed.eigenvalues(1);
  if (!(l1 < 0.0 && l2 > 0.0))
    throw SignCondition("two_by_two_odd_p: eigenvalues must straddle zero");
  const Matrix bt = ed.eigenvectors.adjoint() * b.mat() * ed.eigenvectors;
  const double gap = l2 - l1;
  const double x = (bt(0, 0).real() * l2 - bt(1, 1).real() * l1) / gap;
  const double y = -l1 * l2 / (gap * gap);
  const double b12sq = std::norm(bt(0, 1));
  static const double fact[9] = {1, 1, 2, 6, 24, 120, 720, 5040, 40320};

  OddPowerTerms out;
  for (int i = 0; 2 * i <= p - 1; ++i) {
    const int j = p - 1 - 2 * i;
    const double coeff = fact[p - 1] / (fact[j] * fact[i] * fact[i + 1]);
    const double display =
        coeff * std::pow(x, j) * std::pow(b12sq, i + 1) * std::pow(y, i);
    // Frozen calibration: the raw (p+1)-st derivative is 2p (p+1)! / gap
    // times the display sum.
    out.terms.push_back(2.0 * p * fact[p + 1] / gap * display);
    out.value += out.terms.back();
  }
  return out;
}

double two_by_two_odd_p(const HermitianMatrix& a, const HermitianMatrix& b, int p) {
  return two_by_two_odd_p_terms(a, b, p).value;
}

PositivityScan spline_positivity_check(const ScalarFunction& f,
                                       const HermitianMatrix& a,
                                       const HermitianMatrix& b,
                                       const GridSpec& grid, int order, double h) {
  if (order != 3 && order != 4)
    throw std::invalid_argument("spline_positivity_check: order must be 3 or 4");
  if (a.n() != b.n()) throw DimensionMismatch("spline_positivity_check: size mismatch");
  if (grid.points < 1 || !(grid.t_max >= grid.t_min))
    throw std::invalid_argument("spline_positivity_check: bad grid");
  if (f.has_kernel()) {
    if (f.kernel_order() != order)
      throw std::invalid_argument(
          "spline_positivity_check: kernel order must match the derivative order");
    for (double w : f.weights())
      if (w < 0.0)
        throw std::invalid_argument("spline_positivity_check: kernel weights must be >= 0");
  }
  if (order == 3) {
    const auto bd = eigh(b);
    if (bd.eigenvalues.minCoeff() < -1e-10 * b.mat().norm())
      throw NotPsd("spline_positivity_check: order 3 requires positive semidefinite B");
  }
  const double bnorm = b.mat().norm();
  PositivityScan scan;
  if (bnorm == 0.0) {
    scan.evaluated = grid.points;
    scan.argmin_t = grid.t_min;
    return scan;  // constant in t, every derivative vanishes
  }
  if (h <= 0.0) h = 1e-2 * (1.0 + a.mat().norm() / bnorm);
  std::vector<double> crossings;
  const bool have_crossings =
      !f.has_kernel() || kink_crossings(a.mat(), b.mat(), f.knots(), &crossings);

  scan.min_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.points; ++i) {
    const double t = grid.points == 1
                         ? grid.t_min
                         : grid.t_min + (grid.t_max - grid.t_min) * i / (grid.points - 1);
    bool ok = true;
    if (f.has_kernel()) {
      if (have_crossings) {
        for (double s : crossings)
          if (std::abs(t - s) < 10.0 * h) {
            ok = false;
            break;
          }
      } else {
        ok = clear_of_kinks_at(f, a.mat(), b.mat(), t, 10.0 * h * bnorm);
      }
    }
    if (!ok) {
      ++scan.skipped;
      continue;
    }
    const double val = fd_derivative_at(f, a.mat(), b.mat(), order, h, t);
    if (val < scan.min_value) {
      scan.min_value = val;
      scan.argmin_t = t;
    }
    ++scan.evaluated;
  }
  if (scan.evaluated == 0)
    throw std::invalid_argument("spline_positivity_check: no admissible grid points");
  return scan;
}

ConjectureProbeReport conjecture_probe(int k, int trials, std::uint64_t seed) {
  if (k < 2 || k > 7) throw std::invalid_argument("conjecture_probe: k must be in [2, 7]");
  if (trials < 0) throw std::invalid_argument("conjecture_probe: negative trial count");
  ConjectureProbeReport rep;
  rep.k = k;
  rep.trials = trials;
  rep.min_value = std::numeric_limits<double>::infinity();
  double fk = 1.0;
  for (int i = 2; i < k; ++i) fk *= i;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(seed + static_cast<std::uint64_t>(trial));
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.raw() % 2);
    const HermitianMatrix a = random_hermitian(n, rng);
    const HermitianMatrix b = k % 2 == 1 ? random_psd(n, rng) : random_hermitian(n, rng);
    const size_t nk = 1 + rng.raw() % 3;
    std::vector<double> knots;
    while (knots.size() < nk) {
      const double c = 2.0 * rng.uniform() - 1.0;
      bool clash = false;
      for (double e : knots)
        if (std::abs(e - c) < 1e-2) clash = true;
      if (!clash) knots.push_back(c);
    }
    std::sort(knots.begin(), knots.end());
    std::vector<double> weights;
    for (size_t i = 0; i < nk; ++i) weights.push_back(0.1 + 0.9 * rng.uniform());
    const ScalarFunction f = ScalarFunction::spline(k, {}, knots, weights);

    const double bnorm = b.mat().norm();
    const double h = 1e-2 * (1.0 + a.mat().norm() / bnorm);
    std::vector<double> crossings;
    const bool have_crossings = kink_crossings(a.mat(), b.mat(), knots, &crossings);
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    const double scale =
        wsum * fk * std::pow(1.0 + bnorm, k) * static_cast<double>(n);
    for (int gi = 0; gi < 21; ++gi) {
      const double t = -1.5 + 3.0 * gi / 20.0;
      bool ok = true;
      if (have_crossings) {
        for (double s : crossings)
          if (std::abs(t - s) < 10.0 * h) {
            ok = false;
            break;
          }
      } else {
        ok = clear_of_kinks_at(f, a.mat(), b.mat(), t, 10.0 * h * bnorm);
      }
      if (!ok) {
        ++rep.skipped;
        continue;
      }
      const double val = fd_derivative_at(f, a.mat(), b.mat(), k, h, t) / scale;
      ++rep.evaluated;
      if (val < rep.min_value) {
        rep.min_value = val;
        rep.has_min = true;
        rep.argmin_trial = trial;
        rep.argmin_t = t;
        rep.argmin_a = a.mat();
        rep.argmin_b = b.mat();
        rep.argmin_knots = knots;
        rep.argmin_weights = weights;
      }
    }
  }
  if (!rep.has_min) rep.min_value = 0.0;
  return rep;
}

}  // namespace schatten
