#pragma once

// Numerical checks of the a-priori, dissipativity, continuous-dependence,
// kernel-approximation and absorbing-set estimates, plus trajectory-space
// diagnostics (translations, windowed norms, attraction proxy).
//
// Every constant that enters a bound is computed from scenario parameters
// only, never from trajectories, so it is the same for every (m, n).

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sdpde/integrator.hpp"

namespace sdpde {

struct CheckRecord {
  std::string name;
  std::string inequality;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<std::pair<std::string, double>> metrics;
  // Smallest normalised gap (bound - lhs) / bound seen; negative on violation.
  double margin = 0.0;
  double slack = 0.0;
  bool passed = false;
  std::string note;
  // Optional curves for plotting: name -> values (first column is the abscissa).
  std::vector<std::pair<std::string, std::vector<double>>> series;

  void constant(std::string key, double v) { constants.emplace_back(std::move(key), v); }
  void metric(std::string key, double v) { metrics.emplace_back(std::move(key), v); }
  double metric_value(const std::string& key) const;
};

struct VerificationReport {
  std::string scenario_config;
  std::vector<CheckRecord> records;

  bool all_passed() const;
  const CheckRecord* find(const std::string& name) const;
};

// Relative slack and absolute floor shared by the differential-inequality checks.
inline constexpr double kRelativeSlack = 1e-3;
inline constexpr double kAbsoluteFloor = 1e-10;

struct DerivedConstants {
  double lambda1 = 0.0;
  double rhs_bound = 0.0;  // K = M_f |Omega|^{3/2} C_b C_xi1
  double k1 = 1.0;         // energy growth rate
  double k3 = 0.0;         // K^2
  double gamma1 = 0.0;
  double d1 = 0.0;
  double gamma2 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
  double absorbing_l2_sq = 0.0;  // K^2 / (d (d + 2 lambda1))
  double absorbing_radius = 0.0;  // d1/gamma1 + sqrt(absorbing_l2_sq) + d3
};

DerivedConstants derive_constants(const Scenario& scenario);

// --- trajectory-space utilities ---------------------------------------------

// T(h): drops the first h / dt nodes and restarts the clock at 0.
// Throws std::invalid_argument if h is not a multiple of dt or exceeds T.
Trajectory translate(const Trajectory& traj, double h);

// Trapezoid integrals of values over windows [t_j, t_j + window] for every
// start node with the window inside the record.
std::vector<double> window_integrals(const std::vector<double>& values, double dt, long window_steps);

struct FbNorm {
  double h1_window = 0.0;    // sup_h int_h^{h+1} ||A^{1/2} u||^2
  double sup_l2 = 0.0;       // sup_t ||u||
  double dual_window = 0.0;  // sup_h int_h^{h+1} ||A^{-1/2} u'||^2
  double total() const { return h1_window + sup_l2 + dual_window; }
};

// Windowed norm with unit windows; u' is rebuilt from the equation.
// Throws std::invalid_argument if the record is shorter than one window.
FbNorm fb_norm(const Trajectory& traj, const SpectralBasis& basis, double damping);

// fb_norm of T(h_j) u for every window start h_j (suffix suprema).
std::vector<double> fb_tail_norms(const Trajectory& traj, const SpectralBasis& basis,
                                  double damping);

// --- checks -----------------------------------------------------------------

CheckRecord rhs_bound_check(const Scenario& scenario, int samples, std::uint64_t seed);

CheckRecord kernel_hypothesis_check(const Scenario& scenario, int pairs, std::uint64_t seed);

// The margin is the smallest relative gap over nodes t > 0 that are multiples
// of margin_grid (all nodes when margin_grid <= 0), so runs with different dt
// can be compared on the same times.
CheckRecord energy_check(const Trajectory& traj, const Scenario& scenario,
                         double slack = kRelativeSlack, double margin_grid = 0.0);

CheckRecord dissipativity_check(const Trajectory& traj, const Scenario& scenario,
                                double slack = kRelativeSlack);

enum class Perturbation { state, history, both };

struct PairedRun {
  double delta = 0.0;
  double d0 = 0.0;           // ||w(0)||^2
  double history_gap = 0.0;  // int ||phi1 - phi2||^2
  double sup_sqrt_d = 0.0;   // sup_t sqrt(D(t))
  double fitted_c5 = 0.0;
  std::vector<double> d_series;
};

// Paired runs whose initial data differ by delta * e_1 in the chosen component.
PairedRun paired_run(const Scenario& scenario, double delta, Perturbation kind, double c4);

// C4 of the continuous-dependence estimate from the Lipschitz constants of b
// and of the kernel on the ball of radius M.
double continuous_dependence_c4(const Scenario& scenario, double radius);

// Smallest growth rate C5 on the increasing branch of
// C5 -> (D(0) + C4 G / C5) e^{C5 t} that dominates D(t) on the whole record.
double fit_c5(const std::vector<double>& d_series, double dt, double d0, double c4,
              double history_gap);

CheckRecord continuous_dependence_check(const Scenario& scenario, const std::vector<double>& deltas,
                                        Perturbation kind = Perturbation::state);

struct LebesgueResult {
  std::vector<double> eps;
  std::vector<double> errors;
  double slope = 0.0;
};

// |eps^{-1} int_{t-h-eps}^{t-h} y - y(t - h)| for every eps (composite Simpson).
LebesgueResult lebesgue_errors(const std::function<double(double)>& y, double t, double h,
                               const std::vector<double>& eps);

CheckRecord lebesgue_check(const std::function<double(double)>& y, double lipschitz, double t,
                           double h, const std::vector<double>& eps);

struct LimitingStudy {
  std::vector<double> eps;
  std::vector<double> errors;  // e(n) = max_j ||u^(n)(t_j) - u^disc(t_j)||
  double reference_max_norm = 0.0;
};

LimitingStudy limiting_solution_errors(const Scenario& scenario, int n_max);
CheckRecord limiting_solution_study(const Scenario& scenario, int n_max,
                                    double relative_tolerance = 1e-2);

struct EnsembleMember {
  Scenario scenario;
  Trajectory trajectory;
};

// Runs the given scenarios concurrently.
std::vector<EnsembleMember> run_members(const std::vector<Scenario>& scenarios);

// Runs one member per initial-data scale, direction fixed by scenario.initial.u0.
std::vector<EnsembleMember> run_ensemble(const Scenario& scenario,
                                         const std::vector<double>& initial_norms);

CheckRecord absorbing_check(const std::vector<EnsembleMember>& ensemble,
                            double spread_tolerance = 0.10, double slack = kRelativeSlack);

CheckRecord attraction_diagnostic(const std::vector<EnsembleMember>& ensemble,
                                  double tolerance = 1e-3);

// Restart oracle: run to h, continue from (u(h), u_h) and compare with T(h) of the full run.
CheckRecord translation_check(const Scenario& scenario, double h1, double h2);

CheckRecord self_convergence_check(const Scenario& scenario, int halvings = 2,
                                   int reference_refinement = 64);

struct VerifyOptions {
  int random_samples = 1000;
  std::uint64_t seed = 1;
  std::vector<double> deltas = {1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> ensemble_norms = {0.1, 1.0, 10.0};
};

VerificationReport verify(const Scenario& scenario, const VerifyOptions& options);

}  // namespace sdpde
