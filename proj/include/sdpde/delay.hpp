#pragma once

// State-dependent delay laws eta(a, phi) and the distributed kernels built from them.

#include <span>
#include <utility>
#include <vector>

#include "sdpde/history.hpp"
#include "sdpde/spectral.hpp"

namespace sdpde {

// A point of H = L2(Omega) x L2(-r, 0; L2(Omega)).
struct HState {
  SpectralField state;
  HistorySegment history;
};

double h_norm_sq(const HState& s);
double h_distance(const HState& a, const HState& b);

struct DelayLaw {
  enum class Rule { constant, sigmoid };

  Rule rule = Rule::constant;
  double eta0 = 0.5;
  // sigmoid rule: eta = eta_max * logistic(c0 + c1 ||a||^2 + c2 int ||phi||^2)
  double eta_max = 0.75;
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  static DelayLaw constant(double eta0);
  static DelayLaw sigmoid(double eta_max, double c0, double c1, double c2);

  // Largest value the law can return.
  double cap() const { return rule == Rule::constant ? eta0 : eta_max; }
  double evaluate(double state_norm_sq, double history_norm_sq) const;

  // L_{eta,M}: Lipschitz constant in the H metric on the ball of radius M.
  // The logistic slope is at most 1/4 and | |x|^2 - |y|^2 | <= 2M |x - y| on the
  // ball, so L = eta_max * M * sqrt(c1^2 + c2^2) / 2.
  double lipschitz_bound(double radius) const;
};

double eta_eval(const DelayLaw& law, const SpectralField& a, const HistorySegment& phi);

// eps_n = eps0 * ratio^(n-1), n >= 1.
struct EpsilonSchedule {
  double eps0 = 0.125;
  double ratio = 0.5;

  // Throws std::invalid_argument unless eps0 > 0 and 0 < ratio < 1.
  void validate() const;
  double operator()(int n) const;
};

class DelayKernel {
 public:
  enum class Kind { step, tabulated };

  // Height 1/eps on [-delay - eps, -delay].
  static DelayKernel step(double eps, double delay);
  // Piecewise-linear profile on uniform nodes spanning [lower, upper].
  static DelayKernel tabulated(double lower, double upper, std::vector<double> values);

  Kind kind() const { return kind_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double epsilon() const { return upper_ - lower_; }
  double delay() const { return -upper_; }

  double value(double theta) const;
  double mass() const;
  double sup_norm() const;

  // Composite trapezoid with `subintervals` panels over the support (step),
  // or on the table nodes (tabulated). Weights include the kernel values.
  DelayQuadrature quadrature(int subintervals = 8) const;

 private:
  DelayKernel(Kind kind, double lower, double upper) : kind_(kind), lower_(lower), upper_(upper) {}

  Kind kind_;
  double lower_;
  double upper_;
  double height_ = 0.0;
  std::vector<double> values_;
};

// Step kernel of index n at the state (a, phi). Throws if the schedule is
// invalid or the support leaves [-r, 0].
DelayKernel make_step_kernel(int n, const EpsilonSchedule& schedule, const DelayLaw& law,
                             const SpectralField& a, const HistorySegment& phi);

// Exact L1 distance of two step kernels with the same eps.
double kernel_l1_diff(const DelayKernel& a, const DelayKernel& b);

struct KernelHypothesisReport {
  int pairs = 0;
  double epsilon = 0.0;
  double radius = 0.0;
  double eta_lipschitz = 0.0;     // L_{eta,M}
  double kernel_lipschitz = 0.0;  // 2 L_{eta,M} / eps
  double max_ratio = 0.0;         // max l1_diff / dist_H over pairs
  double max_mass_error = 0.0;    // max |mass - 1|
  double max_sup_error = 0.0;     // max |sup - 1/eps|
  int lipschitz_violations = 0;
  int mass_violations = 0;
  int outside_ball = 0;  // pairs skipped because they leave the ball of radius M

  bool holds() const { return lipschitz_violations == 0 && mass_violations == 0; }
};

// Reports (never throws on) violations of the kernel Lipschitz, L1-mass and
// L-infinity hypotheses over the sampled pairs.
KernelHypothesisReport verify_kernel_hypotheses(const DelayLaw& law,
                                                const EpsilonSchedule& schedule, int n,
                                                double radius,
                                                std::span<const std::pair<HState, HState>> pairs,
                                                double mass_tolerance = 1e-12);

}  // namespace sdpde
