#include "sdpde/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sdpde {

SpectralField SpectralField::mode(std::size_t order, std::size_t k) {
  if (k < 1 || k > order) {
    throw std::out_of_range("mode index " + std::to_string(k) + " outside 1.." +
                            std::to_string(order));
  }
  SpectralField f(order);
  f[k - 1] = 1.0;
  return f;
}

double SpectralField::squared_norm() const {
  double s = 0.0;
  for (double c : coeffs_) s += c * c;
  return s;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (other.order() != order()) throw std::invalid_argument("field order mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  if (other.order() != order()) throw std::invalid_argument("field order mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

double distance(const SpectralField& a, const SpectralField& b) {
  if (a.order() != b.order()) throw std::invalid_argument("field order mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.order(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

SpectralBasis::SpectralBasis(Domain domain, int order) : domain_(domain), order_(order) {
  if (order < 1) throw std::invalid_argument("basis order must be >= 1");
  if (!(domain.length > 0.0)) throw std::invalid_argument("domain length must be positive");
  if (domain.grid_size < 4 * order) {
    throw std::invalid_argument("grid size " + std::to_string(domain.grid_size) +
                                " below 4 * order = " + std::to_string(4 * order) +
                                " (aliasing)");
  }
  const double L = domain.length;
  const double amp = std::sqrt(2.0 / L);
  const auto n = static_cast<std::size_t>(domain.grid_size);
  eigenvalues_.resize(static_cast<std::size_t>(order));
  modes_.resize(static_cast<std::size_t>(order) * n);
  const long period = 2 * static_cast<long>(n + 1);
  for (int i = 0; i < order; ++i) {
    const long k = i + 1;
    const double wave = static_cast<double>(k) * std::numbers::pi / L;
    eigenvalues_[static_cast<std::size_t>(i)] = wave * wave;
    // Phase reduced in integers so sin(k pi (j+1) / (N+1)) stays accurate for large k.
    for (std::size_t j = 0; j < n; ++j) {
      const long p = (k * static_cast<long>(j + 1)) % period;
      const double phase = std::numbers::pi * static_cast<double>(p) / static_cast<double>(n + 1);
      modes_[static_cast<std::size_t>(i) * n + j] = amp * std::sin(phase);
    }
  }
}

std::span<const double> SpectralBasis::mode_table(int i) const {
  const auto n = static_cast<std::size_t>(domain_.grid_size);
  return {modes_.data() + static_cast<std::size_t>(i) * n, n};
}

void SpectralBasis::check_order(const SpectralField& field) const {
  if (field.order() != static_cast<std::size_t>(order_)) {
    throw std::invalid_argument("field order " + std::to_string(field.order()) +
                                " does not match basis order " + std::to_string(order_));
  }
}

std::vector<double> SpectralBasis::to_physical(const SpectralField& field) const {
  std::vector<double> out(static_cast<std::size_t>(domain_.grid_size));
  to_physical(field, out);
  return out;
}

void SpectralBasis::to_physical(const SpectralField& field, std::span<double> out) const {
  check_order(field);
  const auto n = static_cast<std::size_t>(domain_.grid_size);
  if (out.size() != n) throw std::invalid_argument("grid size mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < order_; ++i) {
    const double g = field[static_cast<std::size_t>(i)];
    if (g == 0.0) continue;
    const double* row = modes_.data() + static_cast<std::size_t>(i) * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += g * row[j];
  }
}

SpectralField SpectralBasis::to_spectral(std::span<const double> grid_values) const {
  const auto n = static_cast<std::size_t>(domain_.grid_size);
  if (grid_values.size() != n) {
    throw std::invalid_argument("grid has " + std::to_string(grid_values.size()) +
                                " values, basis expects " + std::to_string(n));
  }
  const double h = domain_.spacing();
  SpectralField f(static_cast<std::size_t>(order_));
  for (int i = 0; i < order_; ++i) {
    const double* row = modes_.data() + static_cast<std::size_t>(i) * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += grid_values[j] * row[j];
    f[static_cast<std::size_t>(i)] = h * s;
  }
  return f;
}

double SpectralBasis::integrate(std::span<const double> grid_values) const {
  if (grid_values.size() != static_cast<std::size_t>(domain_.grid_size)) {
    throw std::invalid_argument("grid size mismatch");
  }
  double s = 0.0;
  for (double v : grid_values) s += v;
  return domain_.spacing() * s;
}

SpectralField SpectralBasis::apply_power(const SpectralField& field, double alpha) const {
  check_order(field);
  SpectralField out = field;
  if (alpha == 0.0) return out;
  for (int i = 0; i < order_; ++i) {
    out[static_cast<std::size_t>(i)] *= std::pow(eigenvalues_[static_cast<std::size_t>(i)], alpha);
  }
  return out;
}

double SpectralBasis::norm_sq(const SpectralField& field, double alpha) const {
  check_order(field);
  double s = 0.0;
  for (int i = 0; i < order_; ++i) {
    const double g = field[static_cast<std::size_t>(i)];
    const double w = alpha == 0.0 ? 1.0 : std::pow(eigenvalues_[static_cast<std::size_t>(i)],
                                                   2.0 * alpha);
    s += w * g * g;
  }
  return s;
}

double SpectralBasis::norm(const SpectralField& field, double alpha) const {
  return std::sqrt(norm_sq(field, alpha));
}

}  // namespace sdpde
