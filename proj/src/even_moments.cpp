#include "schatten/even_moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "schatten/errors.hpp"
#include "schatten/nnls.hpp"

namespace schatten {

namespace {

constexpr double kPi = std::numbers::pi;

void check_pair(const HermitianMatrix& a, const HermitianMatrix& b, const char* who) {
  if (a.n() != b.n())
    throw DimensionMismatch(std::string(who) + ": A and B must have equal dimension");
}

struct TraceData {
  double t40, t31, t22, t2121, t13, t04;
};

TraceData quartic_traces(const HermitianMatrix& a, const HermitianMatrix& b) {
  const Matrix a2 = a.mat() * a.mat();
  const Matrix b2 = b.mat() * b.mat();
  const Matrix ab = a.mat() * b.mat();
  TraceData t{};
  t.t40 = (a2 * a2).trace().real();
  t.t31 = (a2 * ab).trace().real();
  t.t22 = (a2 * b2).trace().real();
  t.t2121 = (ab * ab).trace().real();
  t.t13 = (ab * b2).trace().real();
  t.t04 = (b2 * b2).trace().real();
  return t;
}

double fold_half_turn(double theta) {
  theta = std::fmod(theta, kPi);
  if (theta < 0.0) theta += kPi;
  // adding pi to a tiny negative angle rounds back to pi itself
  if (theta >= kPi) theta = 0.0;
  return theta;
}

// Residual of the five real moment equations for atoms (theta_i, mass_i).
Eigen::VectorXd moment_residual(const std::vector<double>& theta, const std::vector<double>& mass,
                                const Eigen::VectorXd& f) {
  Eigen::VectorXd r = -f;
  for (size_t i = 0; i < theta.size(); ++i) {
    const double w = mass[i];
    r[0] += w;
    r[1] += w * std::cos(2.0 * theta[i]);
    r[2] += w * std::sin(2.0 * theta[i]);
    r[3] += w * std::cos(4.0 * theta[i]);
    r[4] += w * std::sin(4.0 * theta[i]);
  }
  return r;
}

// Roots of a complex polynomial (ascending coefficients, nonzero leading
// term) via the companion matrix.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeff) {
  const Eigen::Index deg = static_cast<Eigen::Index>(coeff.size()) - 1;
  Matrix companion = Matrix::Zero(deg, deg);
  for (Eigen::Index i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < deg; ++i)
    companion(i, deg - 1) = -coeff[static_cast<size_t>(i)] / coeff[static_cast<size_t>(deg)];
  const Eigen::ComplexEigenSolver<Matrix> es(companion);
  std::vector<Complex> roots;
  for (Eigen::Index i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

// Measure supported on the given circle directions z_i = e^{2 i theta_i}
// with least-squares masses, clamped nonnegative.
struct SupportFit {
  CircleMeasure nu;
  double residual = 0.0;
};

SupportFit fit_support(std::vector<Complex> z, const MomentTriple& m) {
  // merge near-coincident directions so the mass solve stays full rank
  std::vector<Complex> support;
  for (const Complex& zi : z) {
    bool dup = false;
    for (const Complex& zj : support) dup = dup || std::abs(zi - zj) < 1e-7;
    if (!dup) support.push_back(zi);
  }
  const Eigen::Index r = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd e(5, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const Complex& zj = support[static_cast<size_t>(j)];
    e.col(j) << 1.0, zj.real(), zj.imag(), (zj * zj).real(), (zj * zj).imag();
  }
  Eigen::VectorXd f(5);
  f << m.m0, m.m1.real(), m.m1.imag(), m.m2.real(), m.m2.imag();
  const Eigen::VectorXd w = e.colPivHouseholderQr().solve(f);
  SupportFit fit;
  std::vector<double> theta, mass;
  for (Eigen::Index j = 0; j < r; ++j) {
    const double mj = std::max(0.0, w[j]);
    if (mj <= 1e-12 * m.m0) continue;
    theta.push_back(fold_half_turn(0.5 * std::arg(support[static_cast<size_t>(j)])));
    mass.push_back(mj);
  }
  fit.residual = moment_residual(theta, mass, f).norm();
  for (size_t j = 0; j < theta.size(); ++j) fit.nu.atoms.push_back({theta[j], mass[j]});
  std::sort(fit.nu.atoms.begin(), fit.nu.atoms.end(),
            [](const CircleAtom& x, const CircleAtom& y) { return x.theta < y.theta; });
  return fit;
}

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long result = 1;
  for (int j = 1; j <= k; ++j) result = result * (n - k + j) / j;
  return result;
}

Rational make_rational(long long num, long long den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = std::gcd(num < 0 ? -num : num, den);
  return g > 0 ? Rational{num / g, den / g} : Rational{num, den};
}

}  // namespace

Rational operator+(Rational x, Rational y) {
  return make_rational(x.num * y.den + y.num * x.den, x.den * y.den);
}

Rational operator-(Rational x, Rational y) {
  return make_rational(x.num * y.den - y.num * x.den, x.den * y.den);
}

Rational operator*(Rational x, Rational y) { return make_rational(x.num * y.num, x.den * y.den); }

Rational operator/(Rational x, Rational y) {
  if (y.num == 0) throw std::invalid_argument("Rational: division by zero");
  return make_rational(x.num * y.den, x.den * y.num);
}

bool operator==(Rational x, Rational y) {
  const Rational a = make_rational(x.num, x.den);
  const Rational b = make_rational(y.num, y.den);
  return a.num == b.num && a.den == b.den;
}

P2Result p2_moments(const HermitianMatrix& a, const HermitianMatrix& b) {
  check_pair(a, b, "p2_moments");
  const double taa = (a.mat() * a.mat()).trace().real();
  const double tbb = (b.mat() * b.mat()).trace().real();
  const double tab = (a.mat() * b.mat()).trace().real();
  P2Result out;
  out.m0 = taa + tbb;
  out.m1 = Complex(taa - tbb, 2.0 * tab);
  out.feasible = std::abs(out.m1) <= out.m0 + 1e-12 * out.m0;
  Eigen::Matrix2d gram;
  gram << taa, tab, tab, tbb;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(gram);
  for (int i = 0; i < 2; ++i) {
    const double mass = es.eigenvalues()[i];
    if (mass <= 1e-14 * out.m0) continue;
    out.measure.atoms.push_back(
        {fold_half_turn(std::atan2(es.eigenvectors()(1, i), es.eigenvectors()(0, i))), mass});
  }
  std::sort(out.measure.atoms.begin(), out.measure.atoms.end(),
            [](const CircleAtom& x, const CircleAtom& y) { return x.theta < y.theta; });
  return out;
}

MomentTriple p4_moments(const HermitianMatrix& a, const HermitianMatrix& b) {
  check_pair(a, b, "p4_moments");
  const TraceData t = quartic_traces(a, b);
  const double mixed = 2.0 * t.t22 + t.t2121;
  MomentTriple m;
  m.m0 = std::max(0.0, t.t40 + (2.0 / 3.0) * mixed + t.t04);
  m.m1 = Complex(t.t40 - t.t04, 2.0 * (t.t31 + t.t13));
  m.m2 = Complex(t.t40 + t.t04 - 2.0 * mixed, 4.0 * (t.t31 - t.t13));
  return m;
}

ToeplitzReport toeplitz_check(const MomentTriple& m) {
  ToeplitzReport rep;
  const Complex m0(m.m0, 0.0);
  rep.matrix << m0, m.m1, m.m2, std::conj(m.m1), m0, m.m1, std::conj(m.m2), std::conj(m.m1), m0;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(rep.matrix);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.psd = rep.min_eigenvalue >= -1e-10 * m.m0;
  return rep;
}

CircleMeasure recover_trig_measure(const MomentTriple& m) {
  const ToeplitzReport toep = toeplitz_check(m);
  if (!toep.psd)
    throw NotPsd("recover_trig_measure: moment matrix is not positive semidefinite");
  if (!(m.m0 > 0.0)) return {};

  const double c0 = m.m0;
  const Complex c1 = m.m1;
  const Complex c2 = m.m2;

  // Candidate supports in z = e^{2 i theta}, tried in order of pertinence.
  std::vector<std::vector<Complex>> candidates;
  const auto add = [&](std::vector<Complex> roots) {
    for (Complex& z : roots) {
      const double r = std::abs(z);
      if (r > 0.0) z /= r;
    }
    if (!roots.empty()) candidates.push_back(std::move(roots));
  };

  // A singular moment matrix concentrates the measure on the zero set of the
  // kernel polynomial v0 + v1 z + v2 z^2.
  std::vector<Complex> kernel_roots;
  {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(toep.matrix);
    const Eigen::Vector3cd v = es.eigenvectors().col(0);
    const double vn = v.norm();
    if (std::abs(v(2)) > 1e-8 * vn)
      kernel_roots = polynomial_roots({v(0), v(1), v(2)});
    else if (std::abs(v(1)) > 1e-8 * vn)
      kernel_roots = {-v(0) / v(1)};
  }

  // A positive definite moment matrix admits the three-point quadrature at
  // the zeros of the paraorthogonal polynomial z Phi2(z) - Phi2*(z), with
  // Phi2 the monic degree-2 polynomial orthogonal to 1 and z.
  std::vector<Complex> szego_roots;
  {
    Eigen::Matrix2cd lhs;
    lhs << c1, Complex(c0, 0.0), Complex(c0, 0.0), std::conj(c1);
    const Eigen::Vector2cd rhs(-c2, -c1);
    const Eigen::FullPivLU<Eigen::Matrix2cd> lu(lhs);
    if (lu.isInvertible()) {
      const Eigen::Vector2cd pq = lu.solve(rhs);
      szego_roots = polynomial_roots({Complex(-1.0, 0.0), pq(1) - std::conj(pq(0)),
                                      pq(0) - std::conj(pq(1)), Complex(1.0, 0.0)});
    }
  }

  std::vector<Complex> single;
  if (std::abs(c1) >= (1.0 - 1e-9) * c0) single = {c1 / std::abs(c1)};

  if (toep.min_eigenvalue <= 1e-10 * c0) {
    add(single);
    add(kernel_roots);
    add(szego_roots);
  } else {
    add(szego_roots);
    add(kernel_roots);
    add(single);
  }

  for (const auto& roots : candidates) {
    const SupportFit fit = fit_support(roots, m);
    if (fit.residual <= 1e-9 * c0) return fit.nu;
  }
  throw ConvergenceFailure("recover_trig_measure: no candidate support fits the moments");
}

double p4_verify(const HermitianMatrix& a, const HermitianMatrix& b, const CircleMeasure& nu,
                 int directions) {
  if (directions <= 0) throw std::invalid_argument("p4_verify: directions must be > 0");
  check_pair(a, b, "p4_verify");
  const auto quart = [](double v) { return (v * v) * (v * v); };
  const double scale4 =
      quart(schatten_norm(a.mat(), 4)) + quart(schatten_norm(b.mat(), 4)) + 1e-300;
  double worst = 0.0;
  for (int j = 0; j < directions; ++j) {
    const double phi = kPi * j / directions;
    double lhs = 0.0;
    for (const CircleAtom& atom : nu.atoms) lhs += atom.mass * quart(std::cos(phi - atom.theta));
    const double rhs =
        quart(schatten_norm(std::cos(phi) * a.mat() + std::sin(phi) * b.mat(), 4));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(rhs, 1e-12 * scale4));
  }
  return worst;
}

SosResult sos_identity_eval(const HermitianMatrix& a, const HermitianMatrix& b, double theta1,
                            double theta2) {
  check_pair(a, b, "sos_identity_eval");
  const TraceData t = quartic_traces(a, b);
  const double mixed = 2.0 * t.t22 + t.t2121;
  const double c1 = std::cos(theta1);
  const double c2 = std::cos(theta2);
  const double s1 = std::sin(theta1);
  const double s2 = std::sin(theta2);
  SosResult out;
  out.lhs = (2.0 - 2.0 * c1) * (2.0 - 2.0 * c2) * t.t40 -
            8.0 * (s1 + s2 - std::sin(theta1 + theta2)) * t.t31 +
            (8.0 + 4.0 * std::cos(theta1 - theta2) - 12.0 * std::cos(theta1 + theta2)) * mixed /
                3.0 -
            8.0 * (s1 + s2 + std::sin(theta1 + theta2)) * t.t13 +
            (2.0 + 2.0 * c1) * (2.0 + 2.0 * c2) * t.t04;
  const Complex e1 = std::polar(1.0, theta1);
  const Complex e2 = std::polar(1.0, theta2);
  const Complex e12 = std::polar(1.0, theta1 + theta2);
  const Complex one(1.0, 0.0);
  const Complex im(0.0, 1.0);
  const Matrix ab = a.mat() * b.mat();
  const Matrix ba = b.mat() * a.mat();
  const Matrix m = (e1 - one) * (e2 - one) * (a.mat() * a.mat()) - im * (e12 - one) * (ab + ba) -
                   (e1 + one) * (e2 + one) * (b.mat() * b.mat());
  out.commutator_term = std::norm(e1 - e2) / 3.0 * (ab - ba).squaredNorm();
  out.rhs = m.squaredNorm() + out.commutator_term;
  return out;
}

Refute3dResult refute_3d_moments(int p) {
  if (p < 4 || p % 2 != 0)
    throw InvalidP("refute_3d_moments: p must be an even integer >= 4");
  // Coefficient of r^k (k even) in (1+r)^p + (1-r)^p is 2 binom(p, k); in the
  // angular average of the would-be representation it is binom(p, k) W_k
  // mu(t3^{p-k} (1-t3^2)^{k/2}) with W_k = binom(k, k/2) / 2^k. Equate.
  const auto forced = [p](int k) {
    const Rational lhs = make_rational(2 * binomial(p, k), 1);
    const Rational wallis = make_rational(binomial(k, k / 2), 1LL << k);
    return lhs / (make_rational(binomial(p, k), 1) * wallis);
  };
  Refute3dResult out;
  out.mu_p = forced(0);
  out.mu_mid = forced(2);
  out.mu_low = forced(4);
  // t3^{p-2} = t3^{p-2}(1-t3^2) + t3^p and t3^{p-4} expands likewise, so the
  // nonnegative integrand (2 t3^2 - 1)^2 t3^{p-4} = 4 t3^p - 4 t3^{p-2} +
  // t3^{p-4} integrates to:
  const Rational tp2 = out.mu_mid + out.mu_p;
  const Rational tp4 = out.mu_low + make_rational(2, 1) * out.mu_mid + out.mu_p;
  out.combo = make_rational(4, 1) * (out.mu_p - tp2) + tp4;
  return out;
}

double refute_3d_grid_residual(int p, int grid_points) {
  if (p < 4 || p % 2 != 0)
    throw InvalidP("refute_3d_grid_residual: p must be an even integer >= 4");
  if (grid_points < 3)
    throw std::invalid_argument("refute_3d_grid_residual: need at least 3 grid points");
  // Fibonacci sphere; the three forced moments depend only on t3, so the
  // azimuth drops out of the feature map.
  Eigen::MatrixXd e(3, grid_points);
  for (int i = 0; i < grid_points; ++i) {
    const double t3 = 1.0 - 2.0 * (i + 0.5) / grid_points;
    const double s = 1.0 - t3 * t3;
    e.col(i) << std::pow(t3, p), std::pow(t3, p - 2) * s, std::pow(t3, p - 4) * s * s;
  }
  const Refute3dResult forced = refute_3d_moments(p);
  Eigen::VectorXd f(3);
  f << forced.mu_p.value(), forced.mu_mid.value(), forced.mu_low.value();
  const Eigen::VectorXd x = nnls(e, f);
  return (e * x - f).norm();
}

}  // namespace schatten
