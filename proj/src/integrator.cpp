#include "sdpde/integrator.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <string>

namespace sdpde {

namespace {

bool is_integral_ratio(double num, double den) {
  const double q = num / den;
  const double r = std::round(q);
  return r >= 1.0 && std::abs(q - r) <= 1e-9 * std::max(1.0, q);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SpectralField InitialData::state(int order) const {
  SpectralField f(static_cast<std::size_t>(order));
  for (std::size_t i = 0; i < u0.size() && i < f.order(); ++i) f[i] = u0[i];
  return f;
}

void Scenario::validate() const {
  if (!(domain.length > 0.0)) throw ScenarioError("domain length must be positive");
  if (modes < 1) throw ScenarioError("modes must be >= 1");
  if (domain.grid_size < 4 * modes) {
    throw ScenarioError("grid size " + std::to_string(domain.grid_size) + " below 4 * modes = " +
                        std::to_string(4 * modes));
  }
  if (!(damping > 0.0)) throw ScenarioError("damping d must be positive");
  if (!(dt > 0.0)) throw ScenarioError("time step dt must be positive");
  if (!(delay_span > 0.0)) throw ScenarioError("delay span r must be positive");
  if (!is_integral_ratio(delay_span, dt)) {
    throw ScenarioError("delay span r / dt = " + num(delay_span / dt) + " must be an integer");
  }
  if (!(horizon >= dt)) throw ScenarioError("horizon T must be >= dt");
  try {
    epsilon.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  if (delay_law.rule == DelayLaw::Rule::constant) {
    if (!(delay_law.eta0 >= 0.0)) throw ScenarioError("constant delay eta0 must be >= 0");
  } else if (!(delay_law.eta_max > 0.0)) {
    throw ScenarioError("eta_max must be positive");
  }
  if (delay_law.cap() + epsilon.eps0 > delay_span + 1e-12) {
    throw ScenarioError("kernel support invariant violated: eta_max + eps_1 = " +
                        num(delay_law.cap() + epsilon.eps0) + " exceeds r = " + num(delay_span));
  }
  if (!mode.is_discrete() && mode.n < 1) throw ScenarioError("kernel index n must be >= 1");
  if (nonlinearity.kind == Nonlinearity::Kind::nicholson && !(nonlinearity.p > 0.0)) {
    throw ScenarioError("nicholson p must be positive");
  }
  if (spatial_kernel.kind == SpatialKernel::Kind::gaussian && !(spatial_kernel.alpha > 0.0)) {
    throw ScenarioError("gaussian alpha must be positive");
  }
  for (double c : initial.u0) {
    if (!std::isfinite(c)) throw ScenarioError("initial coefficients must be finite");
  }
}

long Scenario::steps() const {
  return static_cast<long>(std::floor(horizon / dt + 1e-9));
}

long Scenario::history_steps() const {
  return static_cast<long>(std::round(delay_span / dt));
}

NonlocalRhs Scenario::rhs() const {
  return NonlocalRhs(basis(), nonlinearity, spatial_kernel, delay_law, epsilon, delay_span);
}

HistorySegment Scenario::initial_history() const {
  const SpectralField u0 = initial.state(modes);
  const double r = delay_span;
  std::function<SpectralField(double)> phi;
  switch (initial.history) {
    case InitialData::HistoryShape::constant:
      phi = [u0](double) { return u0; };
      break;
    case InitialData::HistoryShape::zero:
      phi = [m = u0.order()](double) { return SpectralField(m); };
      break;
    case InitialData::HistoryShape::ramp:
      phi = [u0, r](double theta) { return (1.0 + theta / r) * u0; };
      break;
  }
  return HistorySegment::from_initial_data(u0, phi, r, dt);
}

SpectralField exponential_euler_step(const SpectralBasis& basis, double damping, double dt,
                                     const SpectralField& state, const SpectralField& forcing) {
  SpectralField next(state.order());
  for (std::size_t k = 0; k < state.order(); ++k) {
    const double mu = basis.eigenvalue(static_cast<int>(k)) + damping;
    const double decay = std::exp(-mu * dt);
    const double gain = -std::expm1(-mu * dt) / mu;
    next[k] = decay * state[k] + gain * forcing[k];
  }
  return next;
}

Simulation::Simulation(const Scenario& scenario)
    : scenario_(scenario),
      basis_((scenario.validate(), scenario.basis())),
      rhs_(scenario.rhs()),
      history_(scenario.initial_history()) {}

Simulation::Simulation(const Scenario& scenario, const HistorySegment& history)
    : scenario_(scenario),
      basis_((scenario.validate(), scenario.basis())),
      rhs_(scenario.rhs()),
      history_(history.rebased(history.back_time())) {
  if (std::abs(history.span() - scenario.delay_span) > 1e-12) {
    throw ScenarioError("restart history span differs from the scenario delay span");
  }
  if (history.back().order() != static_cast<std::size_t>(scenario.modes)) {
    throw ScenarioError("restart history order differs from the scenario modes");
  }
}

RhsEvaluation Simulation::evaluate() const {
  return rhs_.evaluate(time(), history_, scenario_.mode);
}

void Simulation::record(Trajectory& rec, const RhsEvaluation& ev) const {
  const SpectralField& u = history_.back();
  rec.dt = scenario_.dt;
  rec.times.push_back(time());
  rec.states.push_back(u);
  rec.forcing.push_back(ev.forcing);
  rec.eta.push_back(ev.eta);
  rec.norm_l2.push_back(basis_.norm(u, 0.0));
  rec.norm_h1.push_back(basis_.norm(u, 0.5));
  rec.f_norm.push_back(basis_.norm(ev.forcing, 0.0));
  rec.history_norm_sq.push_back(ev.history_norm_sq);
}

void Simulation::record_node(Trajectory& rec) { record(rec, evaluate()); }

void Simulation::step(Trajectory& rec) {
  const RhsEvaluation ev = evaluate();
  record(rec, ev);
  SpectralField next =
      exponential_euler_step(basis_, scenario_.damping, scenario_.dt, history_.back(), ev.forcing);
  for (std::size_t k = 0; k < next.order(); ++k) {
    if (!std::isfinite(next[k])) {
      throw SimulationError("non-finite coefficient g_" + std::to_string(k + 1) + " at t = " +
                            num(time() + scenario_.dt));
    }
  }
  ++step_index_;
  history_.append(time(), std::move(next));
}

Trajectory Simulation::run(long total_steps) {
  Trajectory rec;
  rec.dt = scenario_.dt;
  for (long j = 0; j < total_steps; ++j) step(rec);
  record_node(rec);
  return rec;
}

Trajectory run(const Scenario& scenario) {
  Simulation sim(scenario);
  return sim.run(scenario.steps());
}

Trajectory run_from(const Scenario& scenario, const HistorySegment& history, long steps) {
  Simulation sim(scenario, history);
  return sim.run(steps);
}

std::vector<Trajectory> run_family(const Scenario& scenario, std::span<const int> indices) {
  std::vector<std::future<Trajectory>> jobs;
  jobs.reserve(indices.size());
  for (int n : indices) {
    Scenario member = scenario;
    member.mode = n == 0 ? DelayMode::discrete() : DelayMode::distributed(n);
    jobs.push_back(std::async(std::launch::async, [member] { return run(member); }));
  }
  std::vector<Trajectory> out;
  out.reserve(jobs.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

SpectralField reconstruct_derivative(const SpectralBasis& basis, double damping,
                                     const Trajectory& traj, std::size_t j) {
  const SpectralField& u = traj.states.at(j);
  const SpectralField& f = traj.forcing.at(j);
  SpectralField du(u.order());
  for (std::size_t k = 0; k < u.order(); ++k) {
    du[k] = -(basis.eigenvalue(static_cast<int>(k)) + damping) * u[k] + f[k];
  }
  return du;
}

}  // namespace sdpde
