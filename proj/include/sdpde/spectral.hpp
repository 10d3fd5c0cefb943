#pragma once

// Dirichlet-Laplacian eigenbasis on an interval (0, L) and fields expanded in it.
//
// Mode k (1-based) is e_k(x) = sqrt(2/L) sin(k pi x / L) with eigenvalue
// lambda_k = (k pi / L)^2. Fields are stored as coefficient vectors where
// index i holds mode k = i + 1.
//
// Physical values live on the uniform interior grid x_i = (i + 1) h,
// h = L / (N_x + 1), i = 0 .. N_x - 1. Boundary values vanish, so the
// composite trapezoid rule on (0, L) reduces to h * sum over interior nodes.

#include <cstddef>
#include <span>
#include <vector>

namespace sdpde {

struct Domain {
  double length = 0.0;
  int grid_size = 0;

  double spacing() const { return length / static_cast<double>(grid_size + 1); }
  double node(int i) const { return static_cast<double>(i + 1) * spacing(); }
};

class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(std::size_t order) : coeffs_(order, 0.0) {}
  explicit SpectralField(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  // Unit coefficient on mode k (1-based).
  static SpectralField mode(std::size_t order, std::size_t k);

  std::size_t order() const { return coeffs_.size(); }
  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  std::span<const double> coefficients() const { return coeffs_; }
  std::span<double> coefficients() { return coeffs_; }

  // Parseval: the L2 norm squared of the represented function.
  double squared_norm() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s);

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }
  friend bool operator==(const SpectralField&, const SpectralField&) = default;

 private:
  std::vector<double> coeffs_;
};

// Euclidean distance between two fields of equal order.
double distance(const SpectralField& a, const SpectralField& b);

class SpectralBasis {
 public:
  // Throws std::invalid_argument for order < 1, length <= 0 or
  // grid_size < 4 * order.
  SpectralBasis(Domain domain, int order);

  const Domain& domain() const { return domain_; }
  int order() const { return order_; }
  int grid_size() const { return domain_.grid_size; }

  // lambda_{i+1}
  double eigenvalue(int i) const { return eigenvalues_[static_cast<std::size_t>(i)]; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }

  // e_{i+1} sampled on the grid.
  std::span<const double> mode_table(int i) const;

  std::vector<double> to_physical(const SpectralField& field) const;
  void to_physical(const SpectralField& field, std::span<double> out) const;
  SpectralField to_spectral(std::span<const double> grid_values) const;

  // Composite trapezoid over (0, L) with zero boundary values.
  double integrate(std::span<const double> grid_values) const;

  // Coefficient k scaled by lambda_k^alpha.
  SpectralField apply_power(const SpectralField& field, double alpha) const;
  // (sum_k lambda_k^{2 alpha} g_k^2)^{1/2}
  double norm(const SpectralField& field, double alpha) const;
  double norm_sq(const SpectralField& field, double alpha) const;

  SpectralField zero() const { return SpectralField(static_cast<std::size_t>(order_)); }

 private:
  void check_order(const SpectralField& field) const;

  Domain domain_;
  int order_;
  std::vector<double> eigenvalues_;
  std::vector<double> modes_;  // order_ rows of grid_size samples
};

}  // namespace sdpde
