#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "schatten/embedding.hpp"
#include "schatten/errors.hpp"
#include "schatten/even_moments.hpp"
#include "schatten/matrix_core.hpp"
#include "schatten/matrix_io.hpp"
#include "schatten/rng.hpp"
#include "schatten/scalar_function.hpp"
#include "schatten/trace_derivatives.hpp"

namespace {

using namespace schatten;
using nlohmann::ordered_json;

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

ordered_json matrix_doc(const Matrix& m, const std::string& label = "") {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(ordered_json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  ordered_json doc;
  doc["n"] = m.rows();
  doc["entries"] = std::move(rows);
  if (!label.empty()) doc["label"] = label;
  return doc;
}

std::string rational_str(const Rational& r) {
  std::string s = std::to_string(r.num);
  if (r.den != 1) s += "/" + std::to_string(r.den);
  return s;
}

// Report plumbing shared by every subcommand: JSON to stdout, optional copy
// to --out, optional per-instance CSV to --csv, elapsed_s appended last so
// reports are byte-identical across runs once that field is dropped.
struct Reporter {
  ordered_json report;
  std::vector<std::string> csv_header;
  std::vector<std::vector<std::string>> csv_rows;
  std::string out_path;
  std::string csv_path;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  Reporter(const std::string& command, std::uint64_t seed) {
    report["command"] = command;
    report["seed"] = seed;
  }

  void row(std::vector<std::string> cells) { csv_rows.push_back(std::move(cells)); }

  int finish(bool pass, ordered_json min_slack, ordered_json max_error) {
    ordered_json summary;
    summary["pass"] = pass;
    summary["min_slack"] = std::move(min_slack);
    summary["max_error"] = std::move(max_error);
    report["summary"] = std::move(summary);
    report["elapsed_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string text = report.dump(2);
    std::cout << text << "\n";
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      out << text << "\n";
      if (!out) throw ParseError(out_path + ": cannot write report");
    }
    if (!csv_path.empty()) {
      std::ofstream csv(csv_path);
      for (size_t i = 0; i < csv_header.size(); ++i)
        csv << csv_header[i] << (i + 1 < csv_header.size() ? "," : "");
      csv << "\n";
      for (const auto& cells : csv_rows) {
        for (size_t i = 0; i < cells.size(); ++i)
          csv << cells[i] << (i + 1 < cells.size() ? "," : "");
        csv << "\n";
      }
      if (!csv) throw ParseError(csv_path + ": cannot write CSV");
    }
    return pass ? 0 : 1;
  }
};

HermitianMatrix random_invertible_hermitian(Eigen::Index n, Rng& rng, double floor) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const HermitianMatrix a = random_hermitian(n, rng);
    const auto ed = eigh(a);
    if (ed.eigenvalues.cwiseAbs().minCoeff() >= floor * a.mat().norm()) return a;
  }
  throw ConvergenceFailure("random draw: no invertible Hermitian matrix in 100 attempts");
}

// ---------------------------------------------------------------- embed ----

struct EmbedOpts {
  std::string a_path, b_path, out, csv;
  int p = 3;
  int directions = 180;
  double tol = 1e-4;
};

int run_embed(const EmbedOpts& o) {
  Reporter rep("embed", 0);
  rep.out_path = o.out;
  rep.csv_path = o.csv;
  rep.report["params"] = {{"a", o.a_path},       {"b", o.b_path}, {"p", o.p},
                          {"directions", o.directions}, {"tol", o.tol}};
  const ParsedMatrix a = parse_matrix_file(o.a_path);
  const ParsedMatrix b = parse_matrix_file(o.b_path);
  const EmbedResult res = embed_plane(a.matrix, b.matrix, o.p, o.directions);
  ordered_json atoms = ordered_json::array();
  rep.csv_header = {"atom", "theta", "mass"};
  for (size_t i = 0; i < res.measure.atoms.size(); ++i) {
    const CircleAtom& atom = res.measure.atoms[i];
    atoms.push_back(ordered_json::array({atom.theta, atom.mass}));
    rep.row({std::to_string(i), fmt(atom.theta), fmt(atom.mass)});
  }
  ordered_json result;
  result["a_label"] = a.label;
  result["b_label"] = b.label;
  result["a_hermitian"] = a.hermitian;
  result["b_hermitian"] = b.hermitian;
  result["dilated"] = res.report.dilated;
  result["regularized"] = res.report.regularized;
  result["epsilon"] = res.report.epsilon;
  result["total_mass"] = res.measure.total_mass();
  result["atoms"] = std::move(atoms);
  result["max_error"] = res.report.max_error;
  rep.report["results"] = ordered_json::array({std::move(result)});
  return rep.finish(res.report.max_error <= o.tol, nullptr, res.report.max_error);
}

// --------------------------------------------------------------- verify ----

struct VerifyOpts {
  std::string out, csv;
  int trials = 100;
  int n = 3;
  int directions = 180;
  double tol = 1e-4;
  std::uint64_t seed = 1;
};

int run_verify(const VerifyOpts& o) {
  Reporter rep("verify", o.seed);
  rep.out_path = o.out;
  rep.csv_path = o.csv;
  rep.report["params"] = {{"trials", o.trials},
                          {"n", o.n},
                          {"directions", o.directions},
                          {"tol", o.tol}};
  rep.csv_header = {"trial", "seed", "max_error", "regularized"};
  ordered_json results = ordered_json::array();
  double worst = 0.0;
  int worst_trial = 0;
  Matrix worst_a, worst_b;
  for (int trial = 0; trial < o.trials; ++trial) {
    Rng rng(o.seed + static_cast<std::uint64_t>(trial));
    const HermitianMatrix a = random_hermitian(o.n, rng);
    const HermitianMatrix b = random_hermitian(o.n, rng);
    const EmbedResult res = embed_plane(a.mat(), b.mat(), 3, o.directions);
    if (trial == 0 || res.report.max_error > worst) {
      worst = res.report.max_error;
      worst_trial = trial;
      worst_a = a.mat();
      worst_b = b.mat();
    }
    ordered_json row;
    row["trial"] = trial;
    row["max_error"] = res.report.max_error;
    row["regularized"] = res.report.regularized;
    results.push_back(std::move(row));
    rep.row({std::to_string(trial), std::to_string(o.seed + trial), fmt(res.report.max_error),
             res.report.regularized ? "1" : "0"});
  }
  rep.report["results"] = std::move(results);
  ordered_json worst_doc;
  worst_doc["trial"] = worst_trial;
  worst_doc["a"] = matrix_doc(worst_a);
  worst_doc["b"] = matrix_doc(worst_b);
  rep.report["worst_instance"] = std::move(worst_doc);
  return rep.finish(worst <= o.tol, nullptr, worst);
}

// --------------------------------------------------------------- hanner ----

struct HannerOpts {
  std::string out, csv;
  double p = 3.0;
  int trials = 1000;
  int n = 4;
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

int run_hanner(const HannerOpts& o) {
  Reporter rep("hanner", o.seed);
  rep.out_path = o.out;
  rep.csv_path = o.csv;
  rep.report["params"] = {{"p", o.p}, {"trials", o.trials}, {"n", o.n}, {"tol", o.tol}};
  rep.csv_header = {"trial", "seed", "slack", "scale", "relative_slack"};
  ordered_json results = ordered_json::array();
  double min_rel = 0.0;
  int worst_trial = 0;
  Matrix worst_a, worst_b;
  for (int trial = 0; trial < o.trials; ++trial) {
    Rng rng(o.seed + static_cast<std::uint64_t>(trial));
    const Matrix a = random_complex(o.n, rng);
    const Matrix b = random_complex(o.n, rng);
    const double slack = hanner_check(a, b, o.p);
    const double scale =
        std::pow(schatten_norm(a, o.p) + schatten_norm(b, o.p), o.p) + 1e-300;
    const double rel = slack / scale;
    if (trial == 0 || rel < min_rel) {
      min_rel = rel;
      worst_trial = trial;
      worst_a = a;
      worst_b = b;
    }
    ordered_json row;
    row["trial"] = trial;
    row["slack"] = slack;
    row["relative_slack"] = rel;
    results.push_back(std::move(row));
    rep.row({std::to_string(trial), std::to_string(o.seed + trial), fmt(slack), fmt(scale),
             fmt(rel)});
  }
  rep.report["results"] = std::move(results);
  ordered_json worst_doc;
  worst_doc["trial"] = worst_trial;
  worst_doc["a"] = matrix_doc(worst_a);
  worst_doc["b"] = matrix_doc(worst_b);
  rep.report["worst_instance"] = std::move(worst_doc);
  return rep.finish(min_rel >= -o.tol, min_rel, nullptr);
}

// ---------------------------------------------------------- deriv-check ----

struct DerivOpts {
  std::string out, csv;
  int k = 0;  // 0 = all of 1..4
  int trials = 100;
  int n = 4;
  double tol = 1e-6;
  std::uint64_t seed = 1;
};

// Kinked scalars leave the FD oracle truncation-limited when a spectrum kink
// sits just outside its step guard, so an instance counts only when the
// oracle agrees with itself across three unrelated steps (value = median).
bool fd_median_stable(const ScalarFunction& f, const HermitianMatrix& a,
                      const HermitianMatrix& b, int k, double budget, double* out) {
  const double h = 1e-2 * (1.0 + a.mat().norm() / b.mat().norm());
  double v[3];
  v[0] = fd_oracle(f, a, b, k, h);
  v[1] = fd_oracle(f, a, b, k, 0.71 * h);
  v[2] = fd_oracle(f, a, b, k, 0.53 * h);
  std::sort(v, v + 3);
  if (v[2] - v[0] > budget) return false;
  *out = v[1];
  return true;
}

int run_deriv_check(const DerivOpts& o) {
  Reporter rep("deriv-check", o.seed);
  rep.out_path = o.out;
  rep.csv_path = o.csv;
  rep.report["params"] = {{"k", o.k}, {"trials", o.trials}, {"n", o.n}, {"tol", o.tol}};
  rep.csv_header = {"f", "k", "trial", "closed", "fd", "relative_error"};
  const double factorial[5] = {1.0, 1.0, 2.0, 6.0, 24.0};
  struct Fn {
    const char* name;
    ScalarFunction f;
    bool kinked;
  };
  const std::vector<Fn> fns = {{"x^3", ScalarFunction::monomial(3), false},
                               {"x^4", ScalarFunction::monomial(4), false},
                               {"|x|^3", ScalarFunction::abs_cubed(), true}};
  std::vector<int> orders;
  if (o.k == 0)
    orders = {1, 2, 3, 4};
  else if (o.k >= 1 && o.k <= 4)
    orders = {o.k};
  else
    throw std::invalid_argument("deriv-check: --k must be in 1..4 (0 = all)");

  ordered_json results = ordered_json::array();
  double max_err = 0.0;
  ordered_json worst_doc;
  std::uint64_t index = 0;
  for (const Fn& fn : fns) {
    for (int k : orders) {
      double block_max = 0.0;
      int redraws = 0;
      for (int trial = 0; trial < o.trials; ++trial, ++index) {
        double closed = 0.0;
        double fd = 0.0;
        Matrix a_used, b_used;
        bool done = false;
        for (int attempt = 0; attempt < 60 && !done; ++attempt) {
          Rng rng(o.seed + index + static_cast<std::uint64_t>(attempt) * 0x9e3779b9ULL);
          const HermitianMatrix a = random_hermitian(o.n, rng);
          const HermitianMatrix b = random_hermitian(o.n, rng);
          try {
            closed = factorial[k] * trace_fun_derivative(fn.f, a, b, k);
            if (fn.kinked) {
              const double floor_scale =
                  1e-6 * std::pow(b.mat().norm(), k) * static_cast<double>(o.n);
              const double budget = 0.5 * o.tol * std::max(std::abs(closed), floor_scale);
              if (!fd_median_stable(fn.f, a, b, k, budget, &fd)) {
                ++redraws;
                continue;
              }
            } else {
              fd = fd_oracle(fn.f, a, b, k, 2.0);
            }
            a_used = a.mat();
            b_used = b.mat();
            done = true;
          } catch (const SingularityTooClose&) {
            ++redraws;
          }
        }
        if (!done)
          throw ConvergenceFailure("deriv-check: no kink-free instance in 60 attempts");
        const double denom = std::max(
            {std::abs(closed), std::abs(fd),
             1e-6 * std::pow(b_used.norm(), k) * static_cast<double>(o.n)});
        const double err = std::abs(closed - fd) / denom;
        if (err > max_err) {
          max_err = err;
          worst_doc = ordered_json();
          worst_doc["f"] = fn.name;
          worst_doc["k"] = k;
          worst_doc["trial"] = trial;
          worst_doc["a"] = matrix_doc(a_used);
          worst_doc["b"] = matrix_doc(b_used);
        }
        block_max = std::max(block_max, err);
        rep.row({fn.name, std::to_string(k), std::to_string(trial), fmt(closed), fmt(fd),
                 fmt(err)});
      }
      ordered_json row;
      row["f"] = fn.name;
      row["k"] = k;
      row["trials"] = o.trials;
      row["redraws"] = redraws;
      row["max_relative_error"] = block_max;
      results.push_back(std::move(row));
    }
  }
  rep.report["results"] = std::move(results);
  rep.report["worst_instance"] = std::move(worst_doc);
  return rep.finish(max_err <= o.tol, nullptr, max_err);
}

// --------------------------------------------------------- pattern-sums ----

struct PatternOpts {
  std::string out, csv;
  int trials = 200;
  int n = 4;
  double tol = 1e-10;
  std::uint64_t seed = 1;
};

int run_pattern_sums(const PatternOpts& o) {
  Reporter rep("pattern-sums", o.seed);
  rep.out_path = o.out;
  rep.csv_path = o.csv;
  rep.report["params"] = {{"trials", o.trials}, {"n", o.n}, {"tol", o.tol}};
  rep.csv_header = {"trial", "seed",         "form1",     "form2",
                    "third", "identity_err", "same_sign"};
  ordered_json results = ordered_json::array();
  double min_slack = 0.0;
  double max_identity = 0.0;
  double max_same_sign = 0.0;
  bool first = true;
  for (int trial = 0; trial < o.trials; ++trial) {
    Rng rng(o.seed + static_cast<std::uint64_t>(trial));
    const HermitianMatrix a = random_invertible_hermitian(o.n, rng, 1e-6);
    const HermitianMatrix b = random_hermitian(o.n, rng);
    const PatternSums4 ps = pattern_sums4(a, b);
    const auto forms = sos_form_values(a, b);
    const HermitianMatrix bp = random_psd(o.n, rng);
    const SosCertificate third = pattern_sums3(a, bp);
    const double weighted = ps.s_mmmm + 4.0 * (ps.s_pmmm + ps.s_ppmm + ps.s_mppp) +
                            2.0 * ps.s_pmpm + ps.s_pppp;
    const double scale = std::max(ps.scale, 1e-300);
    const double identity_err = std::abs(weighted - ps.total) / scale;
    const double same_sign = std::max(std::abs(ps.s_mmmm), std::abs(ps.s_pppp)) / scale;
    const double f1 = forms.first.value / std::max(forms.first.scale, 1e-300);
    const double f2 = forms.second.value / std::max(forms.second.scale, 1e-300);
    const double f3 = third.value / std::max(third.scale, 1e-300);
    const double slack = std::min({f1, f2, f3});
    if (first || slack < min_slack) min_slack = slack;
    first = false;
    max_identity = std::max(max_identity, identity_err);
    max_same_sign = std::max(max_same_sign, same_sign);
    ordered_json row;
    row["trial"] = trial;
    row["form1"] = f1;
    row["form2"] = f2;
    row["third"] = f3;
    row["identity_err"] = identity_err;
    row["same_sign"] = same_sign;
    results.push_back(std::move(row));
    rep.row({std::to_string(trial), std::to_string(o.seed + trial), fmt(f1), fmt(f2), fmt(f3),
             fmt(identity_err), fmt(same_sign)});
  }
  rep.report["results"] = std::move(results);
  const bool pass = min_slack >= -o.tol && max_identity <= 1e-9 && max_same_sign <= 1e-12;
  return rep.finish(pass, min_slack, max_identity);
}

// --------------------------------------------------------------- even-p ----

struct EvenPOpts {
  std::string out, csv;
  int p = 4;
  int trials = 200;
  int n = 4;
  int directions = 90;
  double tol = -1.0;  // default depends on p
  std::uint64_t seed = 1;
};

int run_even_p(const EvenPOpts& o) {
  if (o.p != 2 && o.p != 4)
    throw std::invalid_argument("even-p: --p must be 2 or 4");
  const double tol = o.tol > 0.0 ? o.tol : (o.p == 4 ? 1e-8 : 1e-12);
  Reporter rep("even-p", o.seed);
  rep.out_path = o.out;
  rep.csv_path = o.csv;
  rep.report["params"] = {{"p", o.p},
                          {"trials", o.trials},
                          {"n", o.n},
                          {"directions", o.directions},
                          {"tol", tol}};
  ordered_json results = ordered_json::array();
  double min_slack = 0.0;
  double max_err = 0.0;
  bool all_ok = true;
  bool first = true;
  if (o.p == 2) {
    rep.csv_header = {"trial", "seed", "m0", "abs_m1", "feasible", "max_error"};
    for (int trial = 0; trial < o.trials; ++trial) {
      Rng rng(o.seed + static_cast<std::uint64_t>(trial));
      const HermitianMatrix a = random_hermitian(o.n, rng);
      const HermitianMatrix b = random_hermitian(o.n, rng);
      const P2Result r = p2_moments(a, b);
      double err = 0.0;
      for (int j = 0; j < o.directions; ++j) {
        const double phi = kPi * j / o.directions;
        double lhs = 0.0;
        for (const CircleAtom& atom : r.measure.atoms) {
          const double c = std::cos(phi - atom.theta);
          lhs += atom.mass * c * c;
        }
        const double norm2 =
            schatten_norm(std::cos(phi) * a.mat() + std::sin(phi) * b.mat(), 2);
        err = std::max(err, std::abs(lhs - norm2 * norm2) / (r.m0 + 1e-300));
      }
      const double slack = (r.m0 - std::abs(r.m1)) / (r.m0 + 1e-300);
      if (first || slack < min_slack) min_slack = slack;
      first = false;
      max_err = std::max(max_err, err);
      all_ok = all_ok && r.feasible;
      ordered_json row;
      row["trial"] = trial;
      row["m0"] = r.m0;
      row["abs_m1"] = std::abs(r.m1);
      row["feasible"] = r.feasible;
      row["max_error"] = err;
      results.push_back(std::move(row));
      rep.row({std::to_string(trial), std::to_string(o.seed + trial), fmt(r.m0),
               fmt(std::abs(r.m1)), r.feasible ? "1" : "0", fmt(err)});
    }
    rep.report["results"] = std::move(results);
    return rep.finish(all_ok && max_err <= tol, min_slack, max_err);
  }
  rep.csv_header = {"trial", "seed",         "m0",      "toeplitz_min_eig_rel",
                    "atoms", "verify_error", "sos_gap", "sos_rhs"};
  for (int trial = 0; trial < o.trials; ++trial) {
    Rng rng(o.seed + static_cast<std::uint64_t>(trial));
    const HermitianMatrix a = random_hermitian(o.n, rng);
    const HermitianMatrix b = random_hermitian(o.n, rng);
    const MomentTriple m = p4_moments(a, b);
    const ToeplitzReport toep = toeplitz_check(m);
    const double eig_rel = toep.min_eigenvalue / (m.m0 + 1e-300);
    const CircleMeasure nu = recover_trig_measure(m);
    const double err = p4_verify(a, b, nu, o.directions);
    const SosResult sos =
        sos_identity_eval(a, b, 2.0 * kPi * rng.uniform(), 2.0 * kPi * rng.uniform());
    const double sos_scale = 16.0 * m.m0 + sos.rhs + 1e-300;
    const double sos_gap = std::abs(sos.lhs - sos.rhs) / sos_scale;
    if (first || eig_rel < min_slack) min_slack = eig_rel;
    first = false;
    max_err = std::max(max_err, err);
    all_ok = all_ok && toep.psd && eig_rel >= -1e-9 && sos_gap <= 1e-10 && sos.rhs >= 0.0;
    ordered_json row;
    row["trial"] = trial;
    row["m0"] = m.m0;
    row["toeplitz_min_eig_rel"] = eig_rel;
    row["atoms"] = nu.atoms.size();
    row["verify_error"] = err;
    row["sos_gap"] = sos_gap;
    results.push_back(std::move(row));
    rep.row({std::to_string(trial), std::to_string(o.seed + trial), fmt(m.m0), fmt(eig_rel),
             std::to_string(nu.atoms.size()), fmt(err), fmt(sos_gap), fmt(sos.rhs)});
  }
  rep.report["results"] = std::move(results);
  return rep.finish(all_ok && max_err <= tol, min_slack, max_err);
}

// ------------------------------------------------------------- refute-3d ----

struct RefuteOpts {
  std::string out, csv;
  int p = 4;
  int grid = 2000;
};

int run_refute_3d(const RefuteOpts& o) {
  Reporter rep("refute-3d", 0);
  rep.out_path = o.out;
  rep.csv_path = o.csv;
  rep.report["params"] = {{"p", o.p}, {"grid", o.grid}};
  const Refute3dResult r = refute_3d_moments(o.p);
  const double residual = refute_3d_grid_residual(o.p, o.grid);
  ordered_json result;
  result["mu_p"] = rational_str(r.mu_p);
  result["mu_mid"] = rational_str(r.mu_mid);
  result["mu_low"] = rational_str(r.mu_low);
  result["combo"] = rational_str(r.combo);
  result["combo_value"] = r.combo.value();
  result["grid_residual"] = residual;
  rep.report["results"] = ordered_json::array({std::move(result)});
  rep.csv_header = {"p", "mu_p", "mu_mid", "mu_low", "combo", "grid_residual"};
  rep.row({std::to_string(o.p), rational_str(r.mu_p), rational_str(r.mu_mid),
           rational_str(r.mu_low), rational_str(r.combo), fmt(residual)});
  // the moment combination must be negative (the integrand is nonnegative,
  // so no measure exists) and the grid fit must stay infeasible
  const bool pass = r.combo.value() < 0.0 && residual >= 0.01;
  return rep.finish(pass, residual, std::abs(r.combo.value() + 2.0 / 3.0));
}

// ------------------------------------------------------ probe-conjecture ----

struct ProbeOpts {
  std::string out, csv;
  int k = 4;
  int trials = 50;
  double tol = 1e-6;
  std::uint64_t seed = 1;
};

int run_probe(const ProbeOpts& o) {
  Reporter rep("probe-conjecture", o.seed);
  rep.out_path = o.out;
  rep.csv_path = o.csv;
  rep.report["params"] = {{"k", o.k}, {"trials", o.trials}, {"tol", o.tol}};
  const ConjectureProbeReport probe = conjecture_probe(o.k, o.trials, o.seed);
  ordered_json result;
  result["k"] = probe.k;
  result["trials"] = probe.trials;
  result["evaluated"] = probe.evaluated;
  result["skipped"] = probe.skipped;
  result["has_min"] = probe.has_min;
  if (probe.has_min) {
    result["min_value"] = probe.min_value;
    result["argmin_trial"] = probe.argmin_trial;
    result["argmin_t"] = probe.argmin_t;
    result["argmin_a"] = matrix_doc(probe.argmin_a);
    result["argmin_b"] = matrix_doc(probe.argmin_b);
    result["argmin_knots"] = probe.argmin_knots;
    result["argmin_weights"] = probe.argmin_weights;
  }
  rep.report["results"] = ordered_json::array({std::move(result)});
  rep.csv_header = {"k", "trials", "evaluated", "skipped", "min_value"};
  rep.row({std::to_string(probe.k), std::to_string(probe.trials),
           std::to_string(probe.evaluated), std::to_string(probe.skipped),
           probe.has_min ? fmt(probe.min_value) : ""});
  const bool pass = !probe.has_min || probe.min_value >= -o.tol;
  return rep.finish(pass, probe.has_min ? ordered_json(probe.min_value) : ordered_json(nullptr),
                    nullptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Schatten-3 plane embedding, trace-derivative positivity, and even-p "
      "moment criteria"};
  app.require_subcommand(1);

  EmbedOpts embed_opts;
  auto* embed = app.add_subcommand(
      "embed", "Embed span{A, B} into L3 step functions and verify the isometry");
  embed->add_option("--a", embed_opts.a_path, "matrix JSON file for A")->required();
  embed->add_option("--b", embed_opts.b_path, "matrix JSON file for B")->required();
  embed->add_option("--p", embed_opts.p, "Schatten exponent (only 3)");
  embed->add_option("--directions", embed_opts.directions, "verification angles");
  embed->add_option("--tol", embed_opts.tol, "max relative isometry error");
  embed->add_option("--out", embed_opts.out, "write the JSON report here too");
  embed->add_option("--csv", embed_opts.csv, "CSV rows: atom,theta,mass");

  VerifyOpts verify_opts;
  auto* verify = app.add_subcommand(
      "verify", "Random-pair batch of the full embedding pipeline");
  verify->add_option("--trials", verify_opts.trials, "number of random pairs");
  verify->add_option("--n", verify_opts.n, "matrix dimension");
  verify->add_option("--directions", verify_opts.directions, "verification angles");
  verify->add_option("--tol", verify_opts.tol, "max relative isometry error");
  verify->add_option("--seed", verify_opts.seed, "base seed; trial i uses seed+i");
  verify->add_option("--out", verify_opts.out, "write the JSON report here too");
  verify->add_option("--csv", verify_opts.csv,
                     "CSV rows: trial,seed,max_error,regularized");

  HannerOpts hanner_opts;
  auto* hanner = app.add_subcommand(
      "hanner", "Three-point inequality slack over random matrix pairs");
  hanner->add_option("--p", hanner_opts.p, "Schatten exponent, p >= 1");
  hanner->add_option("--trials", hanner_opts.trials, "number of random pairs");
  hanner->add_option("--n", hanner_opts.n, "matrix dimension");
  hanner->add_option("--tol", hanner_opts.tol, "allowed negative relative slack");
  hanner->add_option("--seed", hanner_opts.seed, "base seed; trial i uses seed+i");
  hanner->add_option("--out", hanner_opts.out, "write the JSON report here too");
  hanner->add_option("--csv", hanner_opts.csv,
                     "CSV rows: trial,seed,slack,scale,relative_slack");

  DerivOpts deriv_opts;
  auto* deriv = app.add_subcommand(
      "deriv-check", "Closed-form trace derivatives against finite differences");
  deriv->add_option("--k", deriv_opts.k, "derivative order 1..4 (0 = all)");
  deriv->add_option("--trials", deriv_opts.trials, "instances per (f, k) block");
  deriv->add_option("--n", deriv_opts.n, "matrix dimension");
  deriv->add_option("--tol", deriv_opts.tol, "max relative error");
  deriv->add_option("--seed", deriv_opts.seed, "base seed; instance i uses seed+i");
  deriv->add_option("--out", deriv_opts.out, "write the JSON report here too");
  deriv->add_option("--csv", deriv_opts.csv,
                    "CSV rows: f,k,trial,closed,fd,relative_error");

  PatternOpts pattern_opts;
  auto* pattern = app.add_subcommand(
      "pattern-sums", "Sign-pattern positivity certificates for k = 3, 4");
  pattern->add_option("--trials", pattern_opts.trials, "number of random pairs");
  pattern->add_option("--n", pattern_opts.n, "matrix dimension");
  pattern->add_option("--tol", pattern_opts.tol, "allowed negative relative value");
  pattern->add_option("--seed", pattern_opts.seed, "base seed; trial i uses seed+i");
  pattern->add_option("--out", pattern_opts.out, "write the JSON report here too");
  pattern->add_option("--csv", pattern_opts.csv,
                      "CSV rows: trial,seed,form1,form2,third,identity_err,same_sign");

  EvenPOpts evenp_opts;
  auto* evenp = app.add_subcommand(
      "even-p", "Trigonometric moment criteria for p = 2 and p = 4");
  evenp->add_option("--p", evenp_opts.p, "even exponent, 2 or 4");
  evenp->add_option("--trials", evenp_opts.trials, "number of random pairs");
  evenp->add_option("--n", evenp_opts.n, "matrix dimension");
  evenp->add_option("--directions", evenp_opts.directions, "verification angles");
  evenp->add_option("--tol", evenp_opts.tol,
                    "max measure-vs-norm error (default 1e-8 for p=4, 1e-12 for p=2)");
  evenp->add_option("--seed", evenp_opts.seed, "base seed; trial i uses seed+i");
  evenp->add_option("--out", evenp_opts.out, "write the JSON report here too");
  evenp->add_option("--csv", evenp_opts.csv,
                    "CSV rows (p=4): trial,seed,m0,toeplitz_min_eig_rel,atoms,"
                    "verify_error,sos_gap,sos_rhs; (p=2): trial,seed,m0,abs_m1,"
                    "feasible,max_error");

  RefuteOpts refute_opts;
  auto* refute = app.add_subcommand(
      "refute-3d", "Moment obstruction for the symmetric 2x2 3-space");
  refute->add_option("--p", refute_opts.p, "even exponent >= 4");
  refute->add_option("--grid", refute_opts.grid, "S^2 grid points for the NNLS fit");
  refute->add_option("--out", refute_opts.out, "write the JSON report here too");
  refute->add_option("--csv", refute_opts.csv,
                     "CSV row: p,mu_p,mu_mid,mu_low,combo,grid_residual");

  ProbeOpts probe_opts;
  auto* probe = app.add_subcommand(
      "probe-conjecture", "Randomized search for negative higher derivatives");
  probe->add_option("--k", probe_opts.k, "derivative order in [2, 7]");
  probe->add_option("--trials", probe_opts.trials, "random instances");
  probe->add_option("--tol", probe_opts.tol, "allowed negative normalized value");
  probe->add_option("--seed", probe_opts.seed, "base seed; trial i uses seed+i");
  probe->add_option("--out", probe_opts.out, "write the JSON report here too");
  probe->add_option("--csv", probe_opts.csv,
                    "CSV row: k,trials,evaluated,skipped,min_value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (embed->parsed()) return run_embed(embed_opts);
    if (verify->parsed()) return run_verify(verify_opts);
    if (hanner->parsed()) return run_hanner(hanner_opts);
    if (deriv->parsed()) return run_deriv_check(deriv_opts);
    if (pattern->parsed()) return run_pattern_sums(pattern_opts);
    if (evenp->parsed()) return run_even_p(evenp_opts);
    if (refute->parsed()) return run_refute_3d(refute_opts);
    if (probe->parsed()) return run_probe(probe_opts);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
