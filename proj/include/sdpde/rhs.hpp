#pragma once

// Nonlocal right-hand sides
//   F(u_t)(x)   = int_Omega b(u(t - eta, y)) f(x - y) dy                 (discrete delay)
//   F_n(u_t)(x) = int_{-r}^0 int_Omega b(u(t + theta, y)) f(x - y) dy xi^n(theta) dtheta
// projected onto the Galerkin basis.

#include <span>
#include <vector>

#include "sdpde/delay.hpp"
#include "sdpde/history.hpp"
#include "sdpde/spectral.hpp"

namespace sdpde {

struct Nonlinearity {
  enum class Kind { nicholson, zero, table };

  Kind kind = Kind::nicholson;
  double p = 2.0;
  // table: piecewise-linear through (table_w[i], table_b[i]), held constant
  // outside the table range so the map stays bounded.
  std::vector<double> table_w;
  std::vector<double> table_b;

  static Nonlinearity nicholson(double p);
  static Nonlinearity zero();
  static Nonlinearity table(std::vector<double> w, std::vector<double> b);

  // Nicholson is clamped to 0 for w < 0: b(w) = p max(w,0) exp(-max(w,0)).
  double operator()(double w) const;
  // C_b = sup |b|
  double bound() const;
  // Global Lipschitz constant (p for the clamped Nicholson map).
  double lipschitz() const;
};

double b_eval(const Nonlinearity& nl, double w);

struct SpatialKernel {
  enum class Kind { constant, gaussian };

  Kind kind = Kind::constant;
  double f0 = 1.0;
  double alpha = 0.05;

  static SpatialKernel constant(double f0);
  static SpatialKernel gaussian(double alpha);

  double operator()(double s) const;
  // M_f = sup |f| on Omega - Omega.
  double sup_bound() const;
};

// Trapezoid quadrature of int_0^L w(y) f(x - y) dy at each interior node x.
// O(N^2) for the gaussian, rank one for a constant kernel.
std::vector<double> convolve_f(const SpatialKernel& kernel, const Domain& domain,
                               std::span<const double> w);

struct DelayMode {
  enum class Kind { discrete, distributed };

  Kind kind = Kind::distributed;
  int n = 1;

  static DelayMode discrete() { return {Kind::discrete, 0}; }
  static DelayMode distributed(int n) { return {Kind::distributed, n}; }
  bool is_discrete() const { return kind == Kind::discrete; }
};

struct RhsEvaluation {
  SpectralField forcing;     // <F(u_t), e_k>
  double eta = 0.0;          // delay used at this evaluation
  double history_norm_sq = 0.0;
};

class NonlocalRhs {
 public:
  NonlocalRhs(SpectralBasis basis, Nonlinearity nl, SpatialKernel kernel, DelayLaw law,
              EpsilonSchedule schedule, double delay_span);

  const SpectralBasis& basis() const { return basis_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const SpatialKernel& spatial_kernel() const { return kernel_; }
  const DelayLaw& delay_law() const { return law_; }
  const EpsilonSchedule& schedule() const { return schedule_; }

  // M_f |Omega|^{3/2} C_b C_xi1 with C_xi1 = 1 for step kernels.
  double bound() const;

  RhsEvaluation distributed(double t, const HistorySegment& history, int n) const;
  RhsEvaluation discrete(double t, const HistorySegment& history) const;
  RhsEvaluation evaluate(double t, const HistorySegment& history, DelayMode mode) const;

 private:
  SpectralField project(std::vector<double> averaged) const;
  void delay_inputs(double t, const HistorySegment& history, SpectralField& state,
                    double& history_norm_sq) const;

  SpectralBasis basis_;
  Nonlinearity nl_;
  SpatialKernel kernel_;
  DelayLaw law_;
  EpsilonSchedule schedule_;
  double delay_span_;
};

// Free-function forms of the two projections.
SpectralField project_distributed_rhs(double t, const HistorySegment& history,
                                      const DelayLaw& law, const EpsilonSchedule& schedule,
                                      int n, const Nonlinearity& nl, const SpatialKernel& f,
                                      const SpectralBasis& basis);
SpectralField project_discrete_rhs(double t, const HistorySegment& history, const DelayLaw& law,
                                   const Nonlinearity& nl, const SpatialKernel& f,
                                   const SpectralBasis& basis);

}  // namespace sdpde
