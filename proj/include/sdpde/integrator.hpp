#pragma once

// Exponential-Euler time stepping of the Galerkin system
//   g_k' = -(lambda_k + d) g_k + <F(u_t), e_k>,  k = 1..m
// with a method-of-steps history buffer.

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdpde/delay.hpp"
#include "sdpde/history.hpp"
#include "sdpde/rhs.hpp"
#include "sdpde/spectral.hpp"

namespace sdpde {

struct InitialData {
  enum class HistoryShape {
    constant,  // phi(theta) = u0
    zero,      // phi = 0
    ramp,      // phi(theta) = (1 + theta / r) u0
  };

  // Coefficients of u0 in the eigenbasis; padded with zeros / truncated to m.
  std::vector<double> u0 = {1.0};
  HistoryShape history = HistoryShape::constant;

  SpectralField state(int order) const;
};

struct OutputOptions {
  std::string directory = ".";
  bool coefficients = true;  // append g_1..g_m columns to trajectory CSV
};

struct Scenario {
  Domain domain{3.141592653589793, 64};
  int modes = 16;
  double damping = 1.0;
  double delay_span = 1.0;
  double dt = 1.0 / 64.0;
  double horizon = 20.0;
  Nonlinearity nonlinearity = Nonlinearity::nicholson(2.0);
  SpatialKernel spatial_kernel = SpatialKernel::constant(1.0);
  DelayLaw delay_law = DelayLaw::sigmoid(0.75, 0.0, 0.5, 0.25);
  EpsilonSchedule epsilon{0.125, 0.5};
  DelayMode mode = DelayMode::distributed(3);
  InitialData initial;
  OutputOptions output;

  // Throws ScenarioError naming the first violated invariant.
  void validate() const;

  long steps() const;          // floor(T / dt)
  long history_steps() const;  // r / dt
  SpectralBasis basis() const { return SpectralBasis(domain, modes); }
  NonlocalRhs rhs() const;
  HistorySegment initial_history() const;
};

class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-node record of a run on the uniform grid t_j = j dt.
struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<SpectralField> forcing;  // <F(u_{t_j}), e_k>
  std::vector<double> eta;
  std::vector<double> norm_l2;
  std::vector<double> norm_h1;  // ||A^{1/2} u||
  std::vector<double> f_norm;
  std::vector<double> history_norm_sq;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
};

// One exponential-Euler step with the forcing frozen at the step start:
//   g_k <- e^{-mu_k dt} g_k + (1 - e^{-mu_k dt}) / mu_k * F_k,  mu_k = lambda_k + d.
SpectralField exponential_euler_step(const SpectralBasis& basis, double damping, double dt,
                                     const SpectralField& state, const SpectralField& forcing);

class Simulation {
 public:
  explicit Simulation(const Scenario& scenario);
  // Restart from an arbitrary history whose last sample is the current state.
  // Times are rebased so the restart begins at t = 0.
  Simulation(const Scenario& scenario, const HistorySegment& history);

  double time() const { return static_cast<double>(step_index_) * scenario_.dt; }
  long step_index() const { return step_index_; }
  const HistorySegment& history() const { return history_; }
  const SpectralField& state() const { return history_.back(); }

  // Evaluates the forcing at the current node, records the node, advances by dt.
  void step(Trajectory& record);
  // Records the current node without advancing.
  void record_node(Trajectory& record);
  // Steps until `total_steps` nodes after the start, recording the last node too.
  Trajectory run(long total_steps);

 private:
  RhsEvaluation evaluate() const;
  void record(Trajectory& record, const RhsEvaluation& ev) const;

  Scenario scenario_;
  SpectralBasis basis_;
  NonlocalRhs rhs_;
  HistorySegment history_;
  long step_index_ = 0;
};

Trajectory run(const Scenario& scenario);
// Continues from (u(h), u_h) held in `history` over the remaining steps.
Trajectory run_from(const Scenario& scenario, const HistorySegment& history, long steps);
// One trajectory per kernel index, sharing everything else. Index 0 means
// the discrete-delay model. Members run concurrently.
std::vector<Trajectory> run_family(const Scenario& scenario, std::span<const int> indices);

// u' = -A u - d u + F reconstructed at node j.
SpectralField reconstruct_derivative(const SpectralBasis& basis, double damping,
                                     const Trajectory& traj, std::size_t j);

}  // namespace sdpde
