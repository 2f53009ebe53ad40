#include "schatten/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "schatten/scalar_function.hpp"
#include "schatten/trace_derivatives.hpp"

namespace schatten {

namespace {

constexpr double kPi = 3.14159265358979323846;

double cube(double x) { return x * x * x; }

void check_pair(const HermitianMatrix& a, const HermitianMatrix& b, const char* who) {
  if (a.n() != b.n())
    throw DimensionMismatch(std::string(who) + ": A and B must have equal dimension");
}

// Density of the 4th distributional derivative of t -> tr|A+tB|^3 away from
// the singular points, clamped at zero.
double density_given(const HermitianMatrix& a, const HermitianMatrix& b, double t,
                     const std::vector<double>& sing) {
  for (double c : sing)
    if (std::abs(t - c) < 1e-6 * (1.0 + std::abs(t)))
      throw TooCloseToSingularPoint("smooth_density: t is within the exclusion radius of " +
                                    std::to_string(c));
  const ScalarFunction f = ScalarFunction::abs_cubed();
  const HermitianMatrix base(a.mat() + t * b.mat());
  const double h = 24.0 * trace_fun_derivative(f, base, b, 4);
  return h > 0.0 ? h : 0.0;
}

// Cubic-moment weight used to steer quadrature refinement: errors enter the
// circle-measure moments with |s|^3-type weights, so panels are accepted
// against (1+|s|)^3 h rather than bare h.
double moment_weighted(double t, double h) { return cube(1.0 + std::abs(t)) * h; }

void refine_panel(const std::function<double(double)>& eval, double x0, double h0, double x1,
                  double h1, double x2, double h2, double tol, int depth,
                  std::vector<DensityNode>& out) {
  const double d = x2 - x0;
  const double s1 =
      d / 6.0 * (moment_weighted(x0, h0) + 4.0 * moment_weighted(x1, h1) + moment_weighted(x2, h2));
  const double xl = 0.5 * (x0 + x1);
  const double xr = 0.5 * (x1 + x2);
  const double hl = eval(xl);
  const double hr = eval(xr);
  const double s2 = d / 12.0 *
                    (moment_weighted(x0, h0) + 4.0 * moment_weighted(xl, hl) +
                     2.0 * moment_weighted(x1, h1) + 4.0 * moment_weighted(xr, hr) +
                     moment_weighted(x2, h2));
  if (depth <= 0 || std::abs(s2 - s1) <= 15.0 * tol || d <= 1e-10 * (1.0 + std::abs(x1))) {
    out.push_back({x0, h0, d / 12.0});
    out.push_back({xl, hl, d / 3.0});
    out.push_back({x1, h1, d / 6.0});
    out.push_back({xr, hr, d / 3.0});
    out.push_back({x2, h2, d / 12.0});
    return;
  }
  refine_panel(eval, x0, h0, xl, hl, x1, h1, 0.5 * tol, depth - 1, out);
  refine_panel(eval, x1, h1, xr, hr, x2, h2, 0.5 * tol, depth - 1, out);
}

void integrate_segment(const std::function<double(double)>& eval, double lo, double hi, double tol,
                       std::vector<DensityNode>& out) {
  if (!(hi > lo)) return;
  const int seed = 8;
  double x0 = lo;
  double h0 = eval(x0);
  for (int i = 0; i < seed; ++i) {
    const double x2 = lo + (hi - lo) * (i + 1) / seed;
    const double x1 = 0.5 * (x0 + x2);
    const double h1 = eval(x1);
    const double h2 = eval(x2);
    refine_panel(eval, x0, h0, x1, h1, x2, h2, tol / seed, 34, out);
    x0 = x2;
    h0 = h2;
  }
}

// Exclusion radius around a singular point, slightly wider than the
// evaluation guard 1e-6 (1+|t|), which exceeds 1e-6 (1+|c|) on the outward
// side of each excluded point.
double exclusion_radius(double c) { return 1.1e-6 * (1.0 + std::abs(c)); }

// Segments of [lo_bound, hi_bound] that stay clear of every singular point
// by the exclusion radius. Points outside the bounds still clip the edge
// segments when their slivers reach in.
std::vector<std::pair<double, double>> clear_segments(const std::vector<double>& sing,
                                                      double lo_bound, double hi_bound) {
  std::vector<std::pair<double, double>> segs;
  double lo = lo_bound;
  for (double c : sing) {
    const double r = exclusion_radius(c);
    const double edge = std::min(c - r, hi_bound);
    if (edge > lo) segs.push_back({lo, edge});
    lo = std::max(lo, c + r);
    if (lo >= hi_bound) break;
  }
  if (hi_bound > lo) segs.push_back({lo, hi_bound});
  return segs;
}

// First-order fill of the exclusion sliver around c clipped to the
// integration window: the density extends continuously to either side of the
// excluded point, so one node per covered half leaves only O(r^2) of the gap
// unaccounted. Halves whose probe point is itself unevaluable (a neighboring
// sliver overlaps) are skipped; the skipped width is returned so the caller
// can fold an estimate into the unresolved-mass bound.
double patch_sliver(const std::function<double(double)>& eval, double c, double lo_bound,
                    double hi_bound, bool left_free, bool right_free,
                    std::vector<DensityNode>& out) {
  const double r = exclusion_radius(c);
  const struct {
    double a, b, probe;
    bool free;
  } sides[2] = {{c - r, c, c - r, left_free}, {c, c + r, c + r, right_free}};
  double skipped = 0.0;
  for (const auto& s : sides) {
    const double a = std::max(s.a, lo_bound);
    const double b = std::min(s.b, hi_bound);
    if (!(b > a)) continue;
    bool ok = s.free;
    double h = 0.0;
    if (ok) {
      try {
        h = eval(s.probe);
      } catch (const TooCloseToSingularPoint&) {
        ok = false;
      }
    }
    if (ok)
      out.push_back({0.5 * (a + b), h, b - a});
    else
      skipped += b - a;
  }
  return skipped;
}

}  // namespace

double LineMeasure::atom_mass() const {
  double m = 0.0;
  for (const LineAtom& a : atoms) m += a.mass;
  return m;
}

double LineMeasure::density_mass() const {
  double m = 0.0;
  for (const DensityNode& d : density) m += d.weight * d.h;
  return m;
}

double LineMeasure::tail_mass() const {
  double m = 0.0;
  for (const DensityNode& d : tail) m += d.weight * d.h * cube(std::abs(d.t));
  return m;
}

double LineMeasure::total_mass() const { return atom_mass() + density_mass() + tail_mass(); }

double CircleMeasure::total_mass() const {
  double m = 0.0;
  for (const CircleAtom& a : atoms) m += a.mass;
  return m;
}

double StepFunctionPair::combo_cube(double alpha, double beta) const {
  double acc = 0.0;
  double lo = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double len = breakpoints[i] - lo;
    lo = breakpoints[i];
    acc += len * std::pow(std::abs(alpha * values[i].first + beta * values[i].second), 3);
  }
  return acc;
}

std::vector<double> singular_points(const HermitianMatrix& a, const HermitianMatrix& b) {
  check_pair(a, b, "singular_points");
  const std::vector<double> svb = singular_values(b.mat());
  const double bmax = svb.back();
  if (!(bmax > 0.0) || svb.front() < 1e-8 * bmax)
    throw SingularB("singular_points: B must be invertible");
  const Matrix pencil = -b.mat().fullPivLu().solve(a.mat());
  Eigen::ComplexEigenSolver<Matrix> ces(pencil);
  if (ces.info() != Eigen::Success)
    throw ConvergenceFailure("singular_points: pencil eigensolver failed");
  const double ascale = a.mat().norm();
  const double bscale = b.mat().norm();
  std::vector<double> roots;
  for (Eigen::Index i = 0; i < ces.eigenvalues().size(); ++i) {
    const Complex mu = ces.eigenvalues()[i];
    if (std::abs(mu.imag()) > 1e-8 * (1.0 + std::abs(mu))) continue;
    double t = mu.real();
    // Newton polish on the smallest eigenvalue of A + tB; its derivative in
    // t is the Rayleigh quotient of B at the matching eigenvector.
    for (int iter = 0; iter < 10; ++iter) {
      const EigenDecomposition ed = eigh(HermitianMatrix(a.mat() + t * b.mat()));
      Eigen::Index j = 0;
      ed.eigenvalues.cwiseAbs().minCoeff(&j);
      const double lam = ed.eigenvalues[j];
      if (std::abs(lam) <= 1e-13 * (1.0 + ascale + std::abs(t) * bscale)) break;
      const double vel =
          (ed.eigenvectors.col(j).adjoint() * b.mat() * ed.eigenvectors.col(j))(0).real();
      if (std::abs(vel) < 1e-12 * bscale) break;
      const double step = lam / vel;
      t -= step;
      if (std::abs(step) <= 1e-14 * (1.0 + std::abs(t))) break;
    }
    roots.push_back(t);
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> merged;
  for (double r : roots)
    if (merged.empty() || r - merged.back() > 1e-9 * (1.0 + std::abs(r))) merged.push_back(r);
  return merged;
}

double atom_weight(const HermitianMatrix& a, const HermitianMatrix& b, double c) {
  check_pair(a, b, "atom_weight");
  const double scale = a.mat().norm() + std::abs(c) * b.mat().norm();
  const EigenDecomposition ed = eigh(HermitianMatrix(a.mat() + c * b.mat()));
  std::vector<Eigen::Index> null_idx;
  for (Eigen::Index i = 0; i < ed.eigenvalues.size(); ++i)
    if (std::abs(ed.eigenvalues[i]) <= 1e-7 * (1.0 + scale)) null_idx.push_back(i);
  if (null_idx.empty())
    throw NullSpaceFailure("atom_weight: A + cB has no null direction at c = " +
                           std::to_string(c));
  Matrix x(a.n(), static_cast<Eigen::Index>(null_idx.size()));
  for (size_t k = 0; k < null_idx.size(); ++k)
    x.col(static_cast<Eigen::Index>(k)) = ed.eigenvectors.col(null_idx[k]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(x.adjoint() * b.mat() * x);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("atom_weight: projected eigensolver failed");
  const double bnorm = b.mat().norm();
  double mass = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double eta = es.eigenvalues()[i];
    if (std::abs(eta) > 1e-9 * bnorm) mass += 12.0 * cube(std::abs(eta));
  }
  return mass;
}

double smooth_density(const HermitianMatrix& a, const HermitianMatrix& b, double t) {
  return density_given(a, b, t, singular_points(a, b));
}

LineMeasure line_measure(const HermitianMatrix& a, const HermitianMatrix& b) {
  const std::vector<double> sing = singular_points(a, b);
  LineMeasure lm;
  for (double c : sing) {
    const double m = atom_weight(a, b, c);
    if (m > 0.0) lm.atoms.push_back({c, m});
  }

  double outer = 0.0;
  for (double c : sing) outer = std::max(outer, std::abs(c));
  const double t_max = std::max(1.5 * outer + 1.0, 5.0);
  lm.t_max = t_max;
  lm.tail_bound = 0.0;

  auto eval = [&](double t) { return density_given(a, b, t, sing); };

  // Swapped-pair density for the far field: in the chart x = 1/t the measure
  // density of t -> tr|A+tB|^3 beyond t_max pulls back exactly to the
  // density of x -> tr|B+xA|^3 on [-1/t_max, 1/t_max]. The real pencil roots
  // of the swapped pair sit at 1/c outside that window, but for a far-out
  // root 1/c crowds the window edge, so the chart is cleared and patched the
  // same way as the main axis.
  std::vector<double> sing_swapped;
  for (double c : sing)
    if (std::abs(c) > 1e-300) sing_swapped.push_back(1.0 / c);
  std::sort(sing_swapped.begin(), sing_swapped.end());
  auto eval_tail = [&](double x) { return density_given(b, a, x, sing_swapped); };
  const double x_max = 1.0 / t_max;

  const auto main_segs = clear_segments(sing, -t_max, t_max);
  const auto tail_segs = clear_segments(sing_swapped, -x_max, x_max);

  // Rough mass sets the quadrature tolerances and the density scale used to
  // bound whatever the sliver patches cannot represent.
  double rough = 0.0;
  double hmax = 0.0;
  for (const auto& [lo, hi] : main_segs) {
    const int steps = 64;
    double prev = eval(lo);
    for (int i = 1; i <= steps; ++i) {
      const double t = lo + (hi - lo) * i / steps;
      const double h = eval(t);
      rough += 0.5 * (prev + h) * (hi - lo) / steps;
      hmax = std::max(hmax, h);
      prev = h;
    }
  }
  double rough_tail = 0.0;
  double hmax_tail = 0.0;
  for (const auto& [lo, hi] : tail_segs) {
    const int steps = 32;
    double prev = eval_tail(lo);
    for (int i = 1; i <= steps; ++i) {
      const double x = lo + (hi - lo) * i / steps;
      const double h = eval_tail(x);
      rough_tail += 0.5 * (prev + h) * (hi - lo) / steps;
      hmax_tail = std::max(hmax_tail, h);
      prev = h;
    }
  }
  const double total_rough = std::max(lm.atom_mass() + rough + rough_tail, 1e-300);

  // Refined pass: accept panels against the cubic-moment-weighted density so
  // the |s|^3 moments converge, but cap the tolerance by the unweighted mass
  // as well; the residual at the B endpoint sees the bare mass error, and for
  // a far-out singular point the cubic weight inflates the budget by the span
  // cubed.
  double weighted_rough = rough * cube(1.0 + t_max) + rough_tail;
  for (const LineAtom& atom : lm.atoms)
    weighted_rough += atom.mass * cube(1.0 + std::abs(atom.location));
  const double tol =
      std::max(1e-300, std::min(1e-9 * weighted_rough, 1e-8 * total_rough));
  for (const auto& [lo, hi] : main_segs)
    integrate_segment(eval, lo, hi, tol * (hi - lo) / (2.0 * t_max), lm.density);
  for (const auto& [lo, hi] : tail_segs)
    integrate_segment(eval_tail, lo, hi, tol * (hi - lo) / (2.0 * x_max), lm.tail);

  // Fill the exclusion slivers on both axes.
  for (size_t i = 0; i < sing.size(); ++i) {
    const double c = sing[i];
    const double r2 = 2.0 * exclusion_radius(c);
    const bool lf = i == 0 || c - sing[i - 1] > r2;
    const bool rf = i + 1 == sing.size() || sing[i + 1] - c > r2;
    lm.tail_bound += hmax * patch_sliver(eval, c, -t_max, t_max, lf, rf, lm.density);
  }
  for (size_t i = 0; i < sing_swapped.size(); ++i) {
    const double x = sing_swapped[i];
    const double r = exclusion_radius(x);
    if (std::abs(x) > x_max + r) continue;
    const bool lf = i == 0 || x - sing_swapped[i - 1] > 2.0 * r;
    const bool rf = i + 1 == sing_swapped.size() || sing_swapped[i + 1] - x > 2.0 * r;
    const double skipped = patch_sliver(eval_tail, x, -x_max, x_max, lf, rf, lm.tail);
    lm.tail_bound += hmax_tail * skipped * cube(std::abs(x) + r);
  }
  return lm;
}

CircleMeasure circle_measure(const HermitianMatrix& a, const HermitianMatrix& b) {
  const LineMeasure lm = line_measure(a, b);
  CircleMeasure cm;
  auto push = [&](double s, double m) {
    if (!(m > 0.0)) return;
    double theta = std::atan2(1.0, -s);
    if (theta >= kPi) theta -= kPi;
    cm.atoms.push_back({theta, m * std::pow(1.0 + s * s, 1.5) / 12.0});
  };
  for (const LineAtom& atom : lm.atoms) push(atom.location, atom.mass);
  for (const DensityNode& node : lm.density) push(node.t, node.weight * node.h);

  // Tail nodes live in the x = 1/s chart: the node at x carries circle mass
  // weight * h * (1+x^2)^{3/2} / 12 in the direction (1, -x)/sqrt(1+x^2).
  for (const DensityNode& node : lm.tail) {
    const double m = node.weight * node.h * std::pow(1.0 + node.t * node.t, 1.5) / 12.0;
    if (!(m > 0.0)) continue;
    double theta = std::atan2(-node.t, 1.0);
    if (theta < 0.0) theta += kPi;
    cm.atoms.push_back({theta, m});
  }

  // Residual at theta = pi/2 restores the exact ||B||^3 moment; each atom
  // contributes exactly mass * sin(theta)^3 to that moment.
  const double b3 = cube(schatten_norm(b.mat(), 3));
  double covered = 0.0;
  for (const CircleAtom& atom : cm.atoms) covered += atom.mass * cube(std::sin(atom.theta));
  const double m0 = b3 - covered;
  if (m0 < -1e-6 * b3)
    throw NegativeResidualMass("circle_measure: residual mass " + std::to_string(m0) +
                               " is negative beyond tolerance");
  if (m0 > 0.0) cm.atoms.push_back({kPi / 2.0, m0});
  std::sort(cm.atoms.begin(), cm.atoms.end(),
            [](const CircleAtom& l, const CircleAtom& r) { return l.theta < r.theta; });
  return cm;
}

double verify_isometry(const CircleMeasure& nu, const HermitianMatrix& a,
                       const HermitianMatrix& b, int directions) {
  if (directions <= 0) throw std::invalid_argument("verify_isometry: directions must be > 0");
  check_pair(a, b, "verify_isometry");
  const double scale3 =
      cube(schatten_norm(a.mat(), 3)) + cube(schatten_norm(b.mat(), 3)) + 1e-300;
  double worst = 0.0;
  for (int j = 0; j < directions; ++j) {
    const double phi = kPi * j / directions;
    double lhs = 0.0;
    for (const CircleAtom& atom : nu.atoms)
      lhs += atom.mass * cube(std::abs(std::cos(phi - atom.theta)));
    const double rhs =
        cube(schatten_norm(std::cos(phi) * a.mat() + std::sin(phi) * b.mat(), 3));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(rhs, 1e-12 * scale3));
  }
  return worst;
}

StepFunctionPair build_step_functions(const CircleMeasure& nu) {
  const double total = nu.total_mass();
  if (nu.atoms.empty() || !(total > 0.0))
    throw EmptyMeasure("build_step_functions: measure carries no mass");
  StepFunctionPair sp;
  const double amp = std::cbrt(total);
  double cum = 0.0;
  for (const CircleAtom& atom : nu.atoms) {
    if (!(atom.mass > 0.0)) continue;
    cum += atom.mass / total;
    sp.breakpoints.push_back(std::min(cum, 1.0));
    sp.values.push_back({amp * std::cos(atom.theta), amp * std::sin(atom.theta)});
  }
  if (sp.breakpoints.empty())
    throw EmptyMeasure("build_step_functions: measure carries no mass");
  sp.breakpoints.back() = 1.0;
  return sp;
}

CubicResidual convolution_residual_cubic(const HermitianMatrix& a, const HermitianMatrix& b,
                                         const LineMeasure& mu) {
  check_pair(a, b, "convolution_residual_cubic");
  double outer = 0.0;
  for (const LineAtom& atom : mu.atoms) outer = std::max(outer, std::abs(atom.location));
  const double span = outer + 1.0;
  const int m = 25;
  Eigen::MatrixXd vand(m, 4);
  Eigen::VectorXd rhs(m);
  CubicResidual res;
  for (int j = 0; j < m; ++j) {
    const double t = -span + 2.0 * span * j / (m - 1);
    const double nval = cube(schatten_norm(a.mat() + t * b.mat(), 3));
    double conv = 0.0;
    for (const LineAtom& atom : mu.atoms)
      conv += atom.mass * cube(std::abs(t - atom.location));
    for (const DensityNode& node : mu.density)
      conv += node.weight * node.h * cube(std::abs(t - node.t));
    for (const DensityNode& node : mu.tail)
      conv += node.weight * node.h * cube(std::abs(t * node.t - 1.0));
    conv /= 12.0;
    rhs(j) = nval - conv;
    res.scale = std::max(res.scale, std::abs(nval));
    double pw = 1.0;
    for (int d = 0; d < 4; ++d) {
      vand(j, d) = pw;
      pw *= t;
    }
  }
  const Eigen::VectorXd coeff = vand.colPivHouseholderQr().solve(rhs);
  for (int d = 0; d < 4; ++d) res.coeff[static_cast<size_t>(d)] = coeff(d);
  return res;
}

EmbedResult embed_plane(const Matrix& a, const Matrix& b, int p, int directions) {
  if (p != 3) throw InvalidP("embed_plane: only p = 3 is supported");
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw DimensionMismatch("embed_plane: A and B must be square with equal dimension");
  if (a.rows() == 0 || (a.norm() == 0.0 && b.norm() == 0.0))
    throw std::invalid_argument("embed_plane: span{A, B} is trivial");

  EmbedResult res;
  res.report.directions = directions;
  Matrix ah = a;
  Matrix bh = b;
  if (!(is_hermitian(a) && is_hermitian(b))) {
    res.report.dilated = true;
    ah = dilate(a).mat();
    bh = dilate(b).mat();
  }
  const HermitianMatrix ha(ah);

  if (bh.norm() == 0.0) {
    // One-dimensional family: a single direction carries the whole norm.
    res.measure.atoms.push_back({0.0, cube(schatten_norm(ah, 3))});
    res.steps = build_step_functions(res.measure);
    res.report.max_error = verify_isometry(res.measure, ha, HermitianMatrix(bh), directions);
    return res;
  }

  HermitianMatrix hb(bh);
  std::vector<double> svb = singular_values(hb.mat());
  double eps = 0.0;
  while (svb.front() < 1e-8 * svb.back()) {
    eps = eps == 0.0 ? 1e-6 * hb.mat().norm() : 2.0 * eps;
    hb = HermitianMatrix(bh + eps * Matrix::Identity(bh.rows(), bh.cols()));
    svb = singular_values(hb.mat());
    res.report.regularized = true;
    res.report.epsilon = eps;
  }

  res.measure = circle_measure(ha, hb);
  res.steps = build_step_functions(res.measure);
  res.report.max_error = verify_isometry(res.measure, ha, hb, directions);
  return res;
}

double hanner_check(const Matrix& a, const Matrix& b, double p, HannerMode mode) {
  if (!(p >= 1.0)) throw InvalidP("hanner_check: p must be >= 1");
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw DimensionMismatch("hanner_check: A and B must be square with equal dimension");
  double na = 0.0;
  double nb = 0.0;
  double nsum = 0.0;
  double ndiff = 0.0;
  if (mode == HannerMode::direct) {
    na = schatten_norm(a, p);
    nb = schatten_norm(b, p);
    nsum = schatten_norm(a + b, p);
    ndiff = schatten_norm(a - b, p);
  } else {
    if (p != 3.0)
      throw std::invalid_argument("hanner_check: via_embedding supports p = 3 only");
    const EmbedResult res = embed_plane(a, b, 3, 16);
    na = std::cbrt(res.steps.combo_cube(1.0, 0.0));
    nb = std::cbrt(res.steps.combo_cube(0.0, 1.0));
    nsum = std::cbrt(res.steps.combo_cube(1.0, 1.0));
    ndiff = std::cbrt(res.steps.combo_cube(1.0, -1.0));
  }
  const double lhs = std::pow(nsum, p) + std::pow(ndiff, p);
  const double rhs = std::pow(na + nb, p) + std::pow(std::abs(na - nb), p);
  return p >= 2.0 ? rhs - lhs : lhs - rhs;
}

}  // namespace schatten
