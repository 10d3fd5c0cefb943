#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sdpde/spectral.hpp"

using namespace sdpde;

namespace {

constexpr double pi = std::numbers::pi;

// e_k(x) evaluated from the closed form, independent of the cached tables.
double mode_value(double L, int k, double x) { return std::sqrt(2.0 / L) * std::sin(k * pi * x / L); }

}  // namespace

TEST_CASE("eigenvalues are (k pi / L)^2") {
  const SpectralBasis on_pi(Domain{pi, 64}, 16);
  for (int i = 0; i < 16; ++i) CHECK(on_pi.eigenvalue(i) == doctest::Approx((i + 1.0) * (i + 1.0)).epsilon(1e-14));
  const SpectralBasis on_two(Domain{2.0, 40}, 10);
  CHECK(on_two.eigenvalue(2) == doctest::Approx(std::pow(3.0 * pi / 2.0, 2)).epsilon(1e-14));
}

TEST_CASE("sampled modes are orthonormal under the interior trapezoid rule") {
  const Domain dom{pi, 64};
  const double h = dom.spacing();
  for (int i = 1; i <= 16; ++i) {
    for (int j = 1; j <= 16; ++j) {
      double s = 0.0;
      for (int n = 0; n < dom.grid_size; ++n) s += mode_value(dom.length, i, dom.node(n)) * mode_value(dom.length, j, dom.node(n));
      CHECK(h * s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("mode tables match the closed form") {
  const SpectralBasis b(Domain{2.5, 48}, 12);
  for (int k = 0; k < 12; ++k) {
    const auto row = b.mode_table(k);
    for (int n = 0; n < 48; ++n) CHECK(row[n] == doctest::Approx(mode_value(2.5, k + 1, b.domain().node(n))).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("to_physical sums the expansion and to_spectral inverts it") {
  const SpectralBasis b(Domain{pi, 64}, 16);
  SpectralField g(16);
  for (int k = 0; k < 16; ++k) g[k] = std::cos(0.7 * k) / (k + 1.0);
  const std::vector<double> u = b.to_physical(g);
  for (int n = 0; n < 64; ++n) {
    double direct = 0.0;
    for (int k = 0; k < 16; ++k) direct += g[k] * mode_value(pi, k + 1, b.domain().node(n));
    CHECK(u[n] == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
  }
  const SpectralField back = b.to_spectral(u);
  for (int k = 0; k < 16; ++k) CHECK(back[k] == doctest::Approx(g[k]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("projection of a constant approaches the exact integral of e_k") {
  const double L = pi;
  const SpectralBasis b(Domain{L, 256}, 8);
  const std::vector<double> one(256, 1.0);
  const SpectralField c = b.to_spectral(one);
  for (int k = 1; k <= 8; ++k) {
    const double exact = std::sqrt(2.0 / L) * L * (1.0 - std::cos(k * pi)) / (k * pi);
    // Trapezoid error is O(h^2) for the smooth integrand.
    CHECK(std::abs(c[k - 1] - exact) <= 1e-3);
  }
}

TEST_CASE("norms follow Parseval and fractional powers scale modes") {
  const SpectralBasis b(Domain{pi, 64}, 4);
  const SpectralField e1 = SpectralField::mode(4, 1);
  CHECK(b.norm(e1, 0.5) == doctest::Approx(1.0));
  SpectralField g(4);
  g[1] = 2.0;
  g[3] = -1.0;
  CHECK(g.squared_norm() == doctest::Approx(5.0));
  CHECK(b.norm_sq(g, 0.5) == doctest::Approx(4.0 * 4.0 + 16.0));
  CHECK(b.norm_sq(g, -0.5) == doctest::Approx(4.0 / 4.0 + 1.0 / 16.0));
  const std::vector<double> u = b.to_physical(g);
  std::vector<double> sq(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) sq[i] = u[i] * u[i];
  CHECK(b.integrate(sq) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("field arithmetic and distance") {
  SpectralField a(std::vector<double>{1.0, 2.0});
  SpectralField b(std::vector<double>{4.0, 6.0});
  CHECK(distance(a, b) == doctest::Approx(5.0));
  const SpectralField c = 2.0 * a + b - a;
  CHECK(c[0] == 5.0);
  CHECK(c[1] == 8.0);
}

TEST_CASE("invalid bases are rejected") {
  CHECK_THROWS_AS(SpectralBasis(Domain{pi, 64}, 0), std::invalid_argument);
  CHECK_THROWS_AS(SpectralBasis(Domain{-1.0, 64}, 4), std::invalid_argument);
  CHECK_THROWS_AS(SpectralBasis(Domain{pi, 63}, 16), std::invalid_argument);
  CHECK_NOTHROW(SpectralBasis(Domain{pi, 64}, 16));
}
