#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sdpde/analysis.hpp"

using namespace sdpde;

namespace {

constexpr double pi = std::numbers::pi;

// u(t) = g e_1 for all t, with forcing balancing the linear part so u' = 0.
Trajectory steady_mode_one(double g, double horizon, double dt, double damping) {
  Trajectory tr;
  tr.dt = dt;
  const auto n = static_cast<std::size_t>(std::lround(horizon / dt)) + 1;
  for (std::size_t j = 0; j < n; ++j) {
    tr.times.push_back(j * dt);
    tr.states.push_back(g * SpectralField::mode(2, 1));
    tr.forcing.push_back((1.0 + damping) * g * SpectralField::mode(2, 1));
    tr.eta.push_back(0.0);
    tr.norm_l2.push_back(std::abs(g));
    tr.norm_h1.push_back(std::abs(g));
    tr.f_norm.push_back(0.0);
    tr.history_norm_sq.push_back(0.0);
  }
  return tr;
}

}  // namespace

TEST_CASE("derived constants for the reference scenario") {
  const Scenario s;
  const DerivedConstants c = derive_constants(s);
  const double K = std::pow(pi, 1.5) * 2.0 / std::numbers::e;
  CHECK(c.rhs_bound == doctest::Approx(K));
  CHECK(c.lambda1 == doctest::Approx(1.0));
  CHECK(c.k1 == 1.0);
  CHECK(c.k3 == doctest::Approx(K * K));
  CHECK(c.gamma1 == doctest::Approx(1.0));
  CHECK(c.d1 == doctest::Approx(1.5 * K * K));
  CHECK(c.absorbing_l2_sq == doctest::Approx(K * K / 3.0));
  Scenario stronger = s;
  stronger.damping = 2.0;
  CHECK(derive_constants(stronger).absorbing_l2_sq < c.absorbing_l2_sq);
  Scenario other_n = s;
  other_n.mode = DelayMode::distributed(6);
  other_n.modes = 8;
  CHECK(derive_constants(other_n).absorbing_radius == c.absorbing_radius);
}

TEST_CASE("translation is a semigroup on grid shifts") {
  Scenario s;
  s.horizon = 3.0;
  const Trajectory tr = run(s);
  CHECK(translate(tr, 0.0).states == tr.states);
  const Trajectory ab = translate(translate(tr, 0.5), 0.25);
  const Trajectory direct = translate(tr, 0.75);
  CHECK(ab.states == direct.states);
  CHECK(ab.times == direct.times);
  CHECK(direct.times.front() == 0.0);
  CHECK_THROWS_AS(translate(tr, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(translate(tr, 4.0), std::invalid_argument);
}

TEST_CASE("window integrals and the windowed norm") {
  const std::vector<double> ones(65, 1.0);
  for (double v : window_integrals(ones, 1.0 / 32, 32)) CHECK(v == doctest::Approx(1.0));

  const SpectralBasis basis(Domain{pi, 8}, 2);
  const Trajectory zero = steady_mode_one(0.0, 3.0, 1.0 / 16, 1.0);
  CHECK(fb_norm(zero, basis, 1.0).total() == 0.0);

  const Trajectory one = steady_mode_one(1.0, 3.0, 1.0 / 16, 1.0);
  const FbNorm n = fb_norm(one, basis, 1.0);
  CHECK(n.h1_window == doctest::Approx(1.0));
  CHECK(n.sup_l2 == doctest::Approx(1.0));
  CHECK(n.dual_window == doctest::Approx(0.0));
  CHECK(fb_norm(translate(one, 1.0), basis, 1.0).total() == doctest::Approx(n.total()));
  CHECK_THROWS_AS(fb_norm(steady_mode_one(1.0, 0.5, 1.0 / 16, 1.0), basis, 1.0), std::invalid_argument);
}

TEST_CASE("energy and dissipativity hold with room to spare without a nonlinearity") {
  Scenario s;
  s.nonlinearity = Nonlinearity::zero();
  s.initial.u0 = {1.0, 0.5};
  const Trajectory tr = run(s);
  const CheckRecord e = energy_check(tr, s);
  CHECK(e.passed);
  CHECK(e.margin > 0.0);
  const CheckRecord d = dissipativity_check(tr, s);
  CHECK(d.passed);
  CHECK(d.metric_value("envelope_rate_printed_holds") == 1.0);
}

TEST_CASE("dissipativity needs a long enough record") {
  Scenario s;
  s.horizon = 2.0;
  const CheckRecord d = dissipativity_check(run(s), s);
  CHECK_FALSE(d.passed);
}

TEST_CASE("Lebesgue averages: linear data, constants and sin") {
  std::vector<double> eps;
  for (int k = 0; k < 6; ++k) eps.push_back(0.125 * std::pow(0.5, k));
  const LebesgueResult lin = lebesgue_errors([](double t) { return 3.0 - 2.0 * t; }, 1.0, 0.3, eps);
  for (std::size_t i = 0; i < eps.size(); ++i) CHECK(std::abs(lin.errors[i] - 2.0 * eps[i] / 2.0) <= 1e-12);
  const LebesgueResult flat = lebesgue_errors([](double) { return 4.0; }, 1.0, 0.3, eps);
  for (double e : flat.errors) CHECK(e <= 1e-14);
  const CheckRecord sine = lebesgue_check([](double t) { return std::sin(t); }, 1.0, 1.0, 0.3, eps);
  CHECK(sine.passed);
  CHECK(sine.metric_value("order") == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("fit_c5 recovers an exponential growth rate") {
  const double dt = 0.01;
  std::vector<double> d;
  for (int j = 0; j <= 500; ++j) d.push_back(2.0 * std::exp(0.8 * j * dt));
  CHECK(fit_c5(d, dt, 2.0, 100.0, 0.0) == doctest::Approx(0.8).epsilon(2e-3));
  std::vector<double> flat(100, 1.0);
  CHECK(fit_c5(flat, dt, 1.0, 100.0, 0.0) == 0.0);
}

TEST_CASE("identical paired runs give D = 0") {
  Scenario s;
  s.horizon = 2.0;
  const PairedRun p = paired_run(s, 0.0, Perturbation::both, 1.0);
  for (double v : p.d_series) CHECK(v == 0.0);
}

TEST_CASE("limiting study is exact when the delay term ignores the state") {
  Scenario s;
  s.horizon = 2.0;
  s.nonlinearity = Nonlinearity::table({0.0, 1.0}, {0.4, 0.4});
  const LimitingStudy st = limiting_solution_errors(s, 4);
  for (double e : st.errors) CHECK(e <= 1e-13);
  Scenario z = s;
  z.nonlinearity = Nonlinearity::zero();
  CHECK(limiting_solution_study(z, 3).passed);
}

TEST_CASE("one trajectory against its own tail converges to distance zero") {
  Scenario s;
  s.horizon = 30.0;
  const std::vector<EnsembleMember> one{{s, run(s)}};
  const CheckRecord r = attraction_diagnostic(one, 1e-3);
  CHECK(r.passed);
  CHECK(r.metric_value("final_distance") <= 1e-6);
}

TEST_CASE("absorbing check without a nonlinearity") {
  Scenario s;
  s.nonlinearity = Nonlinearity::zero();
  s.horizon = 10.0;
  const auto ens = run_ensemble(s, {0.1, 1.0, 10.0});
  const CheckRecord r = absorbing_check(ens);
  CHECK(r.passed);
  CHECK(r.metric_value("R1_spread") == 0.0);
}

TEST_CASE("restart and randomized hypothesis checks on small samples") {
  Scenario s;
  s.horizon = 4.0;
  CHECK(translation_check(s, 1.0, 1.0).passed);
  CHECK(rhs_bound_check(s, 50, 9).passed);
  CHECK(kernel_hypothesis_check(s, 50, 9).passed);
}
