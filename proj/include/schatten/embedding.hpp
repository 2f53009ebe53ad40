#pragma once

#include <array>
#include <utility>
#include <vector>

#include "schatten/matrix_core.hpp"

namespace schatten {

// Positive measure on the line: point masses at the zeros of det(A+tB) plus
// a sampled density between them. The density table covers [-t_max, t_max].
// The rest of the line is carried exactly by `tail`, sampled in the chart
// x = 1/t over [-1/t_max, 1/t_max]: there the density of the swapped pair
// t -> tr|B + xA|^3 equals x^{-5} h(1/x), so the far field needs no
// truncation and no asymptotic model. A tail node at x contributes line
// mass weight*h*|x|^3 and convolves as (1/12) weight*h*|t*x - 1|^3.
struct LineAtom {
  double location = 0.0;
  double mass = 0.0;
};

struct DensityNode {
  double t = 0.0;
  double h = 0.0;
  double weight = 0.0;
};

struct LineMeasure {
  std::vector<LineAtom> atoms;
  std::vector<DensityNode> density;
  std::vector<DensityNode> tail;
  double t_max = 0.0;
  double tail_bound = 0.0;

  double atom_mass() const;
  double density_mass() const;
  double tail_mass() const;
  double total_mass() const;
};

// Measure on the half-circle [0, pi) with the antipodal identification.
struct CircleAtom {
  double theta = 0.0;
  double mass = 0.0;
};

struct CircleMeasure {
  std::vector<CircleAtom> atoms;
  double total_mass() const;
};

// Pair of step functions on (0,1) stored as right breakpoints and the value
// pair taken on each piece.
struct StepFunctionPair {
  std::vector<double> breakpoints;
  std::vector<std::pair<double, double>> values;

  // Integral of |alpha f + beta g|^3 over (0,1), exact for step functions.
  double combo_cube(double alpha, double beta) const;
};

// All real t with det(A + tB) = 0, ascending, polished to ~1e-10 accuracy.
std::vector<double> singular_points(const HermitianMatrix& a, const HermitianMatrix& b);

// Mass 12 * sum |eta|^3 over first-order eigenvalue velocities through zero
// at the singular point c.
double atom_weight(const HermitianMatrix& a, const HermitianMatrix& b, double c);

// Density 4! * (d/dt)^4 tr|A+tB|^3 / 4! evaluated away from singular points,
// clamped at zero.
double smooth_density(const HermitianMatrix& a, const HermitianMatrix& b, double t);

LineMeasure line_measure(const HermitianMatrix& a, const HermitianMatrix& b);

// Pushforward to the circle: the node at s with mass m becomes a point mass
// m (1+s^2)^{3/2} / 12 in the direction (-s, 1)/sqrt(1+s^2), plus a residual
// at theta = pi/2 that restores the exact ||B||^3 moment.
CircleMeasure circle_measure(const HermitianMatrix& a, const HermitianMatrix& b);

// Max over `directions` equally spaced angles phi of the relative gap
// between the measure moment and ||cos(phi) A + sin(phi) B||_{S3}^3.
double verify_isometry(const CircleMeasure& nu, const HermitianMatrix& a,
                       const HermitianMatrix& b, int directions);

StepFunctionPair build_step_functions(const CircleMeasure& nu);

// Least-squares cubic fit of t -> tr|A+tB|^3 - (1/12) int |t-s|^3 dmu(s) on a
// sample grid; coeff[j] multiplies t^j. A correct measure leaves the degree
// 1..3 coefficients at roundoff level.
struct CubicResidual {
  std::array<double, 4> coeff{};
  double scale = 0.0;
};

CubicResidual convolution_residual_cubic(const HermitianMatrix& a, const HermitianMatrix& b,
                                         const LineMeasure& mu);

struct EmbedReport {
  double max_error = 0.0;
  int directions = 0;
  bool dilated = false;
  bool regularized = false;
  double epsilon = 0.0;
};

struct EmbedResult {
  CircleMeasure measure;
  StepFunctionPair steps;
  EmbedReport report;
};

// Full pipeline for arbitrary square A, B: dilates non-Hermitian inputs,
// regularizes B to invertible, builds the measure and the step functions,
// and reports the isometry check.
EmbedResult embed_plane(const Matrix& a, const Matrix& b, int p = 3, int directions = 180);

enum class HannerMode { direct, via_embedding };

// Slack of the three-point inequality between ||A+B||_p^p + ||A-B||_p^p and
// (||A||+||B||)^p + | ||A|| - ||B|| |^p, oriented so conjectured-true cases
// give slack >= 0. via_embedding evaluates every norm through the step
// functions (p = 3 only).
double hanner_check(const Matrix& a, const Matrix& b, double p,
                    HannerMode mode = HannerMode::direct);

}  // namespace schatten
