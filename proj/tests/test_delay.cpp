#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "sdpde/delay.hpp"

using namespace sdpde;

namespace {

HistorySegment constant_history(const SpectralField& g, double r = 1.0, double dt = 1.0 / 16) {
  return HistorySegment::from_initial_data(g, [&](double) { return g; }, r, dt);
}

SpectralField random_field(std::mt19937_64& rng, std::size_t m, double scale) {
  std::normal_distribution<double> normal;
  SpectralField f(m);
  for (std::size_t k = 0; k < m; ++k) f[k] = scale * normal(rng);
  return f;
}

HState random_state(std::mt19937_64& rng, std::size_t m, double scale) {
  std::vector<SpectralField> nodes;
  for (int i = 0; i <= 16; ++i) nodes.push_back(random_field(rng, m, scale));
  auto phi = [&](double t) { return nodes.at(static_cast<std::size_t>(std::lround(-t * 16))); };
  return HState{nodes.front(), HistorySegment::from_initial_data(nodes.front(), phi, 1.0, 1.0 / 16)};
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("delay laws") {
  const DelayLaw c = DelayLaw::constant(0.4);
  CHECK(c.evaluate(3.0, 7.0) == 0.4);
  CHECK(c.lipschitz_bound(10.0) == 0.0);

  const DelayLaw s = DelayLaw::sigmoid(0.75, -0.5, 0.5, 0.25);
  CHECK(s.evaluate(2.0, 4.0) == doctest::Approx(0.75 * logistic(-0.5 + 1.0 + 1.0)).epsilon(1e-15));
  CHECK(s.evaluate(1e6, 1e6) <= 0.75);
  CHECK(s.evaluate(0.0, 0.0) > 0.0);
  CHECK(s.lipschitz_bound(2.0) == doctest::Approx(0.75 * 2.0 * std::sqrt(0.25 + 0.0625) / 2.0));

  const SpectralField a = 2.0 * SpectralField::mode(3, 1);
  const HistorySegment phi = constant_history(a);
  CHECK(eta_eval(s, a, phi) == doctest::Approx(s.evaluate(4.0, 4.0)));
}

TEST_CASE("sigmoid law is Lipschitz with the stated constant on a ball") {
  const DelayLaw law = DelayLaw::sigmoid(0.75, 0.3, 0.8, 0.6);
  const double M = 3.0;
  const double L = law.lipschitz_bound(M);
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 1000) {
    const HState a = random_state(rng, 4, 0.6);
    HState b = random_state(rng, 4, 0.6);
    if (h_norm_sq(a) > M * M || h_norm_sq(b) > M * M) continue;
    const double lhs = std::abs(eta_eval(law, a.state, a.history) - eta_eval(law, b.state, b.history));
    CHECK(lhs <= L * h_distance(a, b) * (1.0 + 1e-12));
    ++checked;
  }
}

TEST_CASE("epsilon schedule") {
  const EpsilonSchedule e{0.125, 0.5};
  CHECK(e(1) == 0.125);
  CHECK(e(6) == doctest::Approx(0.125 / 32));
  CHECK_THROWS_AS(e(0), std::invalid_argument);
  CHECK_THROWS_AS((EpsilonSchedule{0.0, 0.5}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((EpsilonSchedule{0.1, 1.0}.validate()), std::invalid_argument);
}

TEST_CASE("step kernel has unit mass, height 1/eps and the stated support") {
  for (double eps : {0.125, 0.01, 1e-5}) {
    const DelayKernel k = DelayKernel::step(eps, 0.4);
    CHECK(std::abs(k.mass() - 1.0) <= 1e-12);
    CHECK(k.sup_norm() == doctest::Approx(1.0 / eps));
    CHECK(k.value(-0.4 - eps / 2) == doctest::Approx(1.0 / eps));
    CHECK(k.value(-0.39) == 0.0);
    CHECK(k.value(-0.4 - 1.01 * eps) == 0.0);
    const DelayQuadrature q = k.quadrature(8);
    double mass = 0.0;
    double first = 0.0;
    for (std::size_t i = 0; i < q.weights.size(); ++i) {
      mass += q.weights[i];
      first += q.weights[i] * q.offsets[i];
    }
    CHECK(std::abs(mass - 1.0) <= 1e-12);
    // Trapezoid is exact for linear integrands: the centre of the window.
    CHECK(std::abs(first - (-0.4 - eps / 2)) <= 1e-12);
  }
}

TEST_CASE("kernel L1 difference matches direct integration") {
  const double eps = 0.1;
  for (double shift : {0.0, 0.013, 0.05, 0.1, 0.3}) {
    const DelayKernel a = DelayKernel::step(eps, 0.2);
    const DelayKernel b = DelayKernel::step(eps, 0.2 + shift);
    const int n = 200000;
    const double lo = -1.0;
    const double h = 1.0 / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double th = lo + (i + 0.5) * h;
      s += std::abs(a.value(th) - b.value(th));
    }
    CHECK(kernel_l1_diff(a, b) == doctest::Approx(s * h).epsilon(1e-3).scale(1.0));
  }
  CHECK(kernel_l1_diff(DelayKernel::step(eps, 0.2), DelayKernel::step(eps, 0.9)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(kernel_l1_diff(DelayKernel::step(0.1, 0.2), DelayKernel::step(0.2, 0.2)), std::invalid_argument);
}

TEST_CASE("make_step_kernel refuses support outside [-r, 0]") {
  const SpectralField a = SpectralField::mode(2, 1);
  const HistorySegment phi = constant_history(a);
  const EpsilonSchedule e{0.125, 0.5};
  CHECK_NOTHROW(make_step_kernel(1, e, DelayLaw::constant(0.8), a, phi));
  CHECK_THROWS_AS(make_step_kernel(1, e, DelayLaw::constant(0.95), a, phi), std::out_of_range);
  const DelayKernel k = make_step_kernel(3, e, DelayLaw::constant(0.5), a, phi);
  CHECK(k.upper() == doctest::Approx(-0.5));
  CHECK(k.epsilon() == doctest::Approx(0.03125));
}

TEST_CASE("kernel hypotheses hold on random pairs and count pairs outside the ball") {
  const DelayLaw law = DelayLaw::sigmoid(0.75, 0.0, 0.5, 0.25);
  const EpsilonSchedule e{0.125, 0.5};
  std::mt19937_64 rng(5);
  std::vector<std::pair<HState, HState>> pairs;
  for (int i = 0; i < 300; ++i) pairs.emplace_back(random_state(rng, 3, 0.5), random_state(rng, 3, 0.5));
  pairs.emplace_back(random_state(rng, 3, 50.0), random_state(rng, 3, 0.1));
  const KernelHypothesisReport rep = verify_kernel_hypotheses(law, e, 4, 3.0, pairs);
  CHECK(rep.holds());
  CHECK(rep.outside_ball >= 1);
  CHECK(rep.pairs + rep.outside_ball == static_cast<int>(pairs.size()));
  CHECK(rep.kernel_lipschitz == doctest::Approx(2.0 * law.lipschitz_bound(3.0) / e(4)));
  CHECK(rep.max_ratio <= rep.kernel_lipschitz);
}

TEST_CASE("tabulated kernel") {
  const DelayKernel k = DelayKernel::tabulated(-0.5, -0.1, {0.0, 5.0, 0.0});
  CHECK(k.mass() == doctest::Approx(0.2 * 5.0));
  CHECK(k.sup_norm() == 5.0);
  CHECK(k.value(-0.2) == doctest::Approx(2.5));
  CHECK_THROWS_AS(DelayKernel::tabulated(-0.1, -0.5, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(DelayKernel::tabulated(-0.5, -0.1, {1.0, -1.0}), std::invalid_argument);
}
