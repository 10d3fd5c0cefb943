#include "sdpde/rhs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sdpde {

Nonlinearity Nonlinearity::nicholson(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("nicholson p must be positive");
  Nonlinearity nl;
  nl.kind = Kind::nicholson;
  nl.p = p;
  return nl;
}

Nonlinearity Nonlinearity::zero() {
  Nonlinearity nl;
  nl.kind = Kind::zero;
  nl.p = 0.0;
  return nl;
}

Nonlinearity Nonlinearity::table(std::vector<double> w, std::vector<double> b) {
  if (w.size() < 2 || w.size() != b.size()) {
    throw std::invalid_argument("nonlinearity table needs >= 2 matching (w, b) pairs");
  }
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (!(w[i] > w[i - 1])) throw std::invalid_argument("nonlinearity table w must increase");
  }
  Nonlinearity nl;
  nl.kind = Kind::table;
  nl.table_w = std::move(w);
  nl.table_b = std::move(b);
  return nl;
}

double Nonlinearity::operator()(double w) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::nicholson: {
      const double v = std::max(w, 0.0);
      return p * v * std::exp(-v);
    }
    case Kind::table: {
      if (w <= table_w.front()) return table_b.front();
      if (w >= table_w.back()) return table_b.back();
      const auto it = std::upper_bound(table_w.begin(), table_w.end(), w);
      const auto i = static_cast<std::size_t>(it - table_w.begin()) - 1;
      const double s = (w - table_w[i]) / (table_w[i + 1] - table_w[i]);
      return (1.0 - s) * table_b[i] + s * table_b[i + 1];
    }
  }
  return 0.0;
}

double Nonlinearity::bound() const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::nicholson:
      return p / std::numbers::e;
    case Kind::table: {
      double m = 0.0;
      for (double v : table_b) m = std::max(m, std::abs(v));
      return m;
    }
  }
  return 0.0;
}

double Nonlinearity::lipschitz() const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::nicholson:
      // |b'(w)| = p |1 - w| e^{-w} on w >= 0 peaks at w = 0.
      return p;
    case Kind::table: {
      double m = 0.0;
      for (std::size_t i = 1; i < table_w.size(); ++i) {
        m = std::max(m, std::abs(table_b[i] - table_b[i - 1]) / (table_w[i] - table_w[i - 1]));
      }
      return m;
    }
  }
  return 0.0;
}

double b_eval(const Nonlinearity& nl, double w) { return nl(w); }

SpatialKernel SpatialKernel::constant(double f0) {
  SpatialKernel k;
  k.kind = Kind::constant;
  k.f0 = f0;
  return k;
}

SpatialKernel SpatialKernel::gaussian(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gaussian alpha must be positive");
  SpatialKernel k;
  k.kind = Kind::gaussian;
  k.alpha = alpha;
  return k;
}

double SpatialKernel::operator()(double s) const {
  if (kind == Kind::constant) return f0;
  return std::exp(-s * s / (4.0 * alpha)) / std::sqrt(4.0 * std::numbers::pi * alpha);
}

double SpatialKernel::sup_bound() const {
  if (kind == Kind::constant) return std::abs(f0);
  return 1.0 / std::sqrt(4.0 * std::numbers::pi * alpha);
}

std::vector<double> convolve_f(const SpatialKernel& kernel, const Domain& domain,
                               std::span<const double> w) {
  const auto n = static_cast<std::size_t>(domain.grid_size);
  if (w.size() != n) throw std::invalid_argument("convolution input does not match the grid");
  const double h = domain.spacing();
  if (kernel.kind == SpatialKernel::Kind::constant) {
    double s = 0.0;
    for (double v : w) s += v;
    return std::vector<double>(n, kernel.f0 * h * s);
  }
  // f(x_i - y_j) depends on |i - j| only.
  std::vector<double> table(n);
  for (std::size_t k = 0; k < n; ++k) table[k] = kernel(static_cast<double>(k) * h);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += w[j] * table[i > j ? i - j : j - i];
    out[i] = h * s;
  }
  return out;
}

NonlocalRhs::NonlocalRhs(SpectralBasis basis, Nonlinearity nl, SpatialKernel kernel, DelayLaw law,
                         EpsilonSchedule schedule, double delay_span)
    : basis_(std::move(basis)),
      nl_(std::move(nl)),
      kernel_(kernel),
      law_(law),
      schedule_(schedule),
      delay_span_(delay_span) {}

double NonlocalRhs::bound() const {
  const double L = basis_.domain().length;
  return kernel_.sup_bound() * std::pow(L, 1.5) * nl_.bound();
}

SpectralField NonlocalRhs::project(std::vector<double> averaged) const {
  const std::vector<double> conv = convolve_f(kernel_, basis_.domain(), averaged);
  return basis_.to_spectral(conv);
}

void NonlocalRhs::delay_inputs(double t, const HistorySegment& history, SpectralField& state,
                               double& history_norm_sq) const {
  history.eval_into(t, state);
  history_norm_sq = history.segment_norm_sq(t);
}

RhsEvaluation NonlocalRhs::distributed(double t, const HistorySegment& history, int n) const {
  RhsEvaluation ev;
  SpectralField state;
  delay_inputs(t, history, state, ev.history_norm_sq);
  ev.eta = law_.evaluate(state.squared_norm(), ev.history_norm_sq);
  const double eps = schedule_(n);
  if (ev.eta + eps > delay_span_ + 1e-12) {
    throw std::out_of_range("kernel support escapes [-r, 0]: eta + eps_n > r");
  }
  const DelayKernel kernel = DelayKernel::step(eps, ev.eta);
  std::vector<double> averaged =
      kernel_time_integral(history, t, kernel.quadrature(8), basis_, [this](double w) {
        return nl_(w);
      });
  ev.forcing = project(std::move(averaged));
  return ev;
}

RhsEvaluation NonlocalRhs::discrete(double t, const HistorySegment& history) const {
  RhsEvaluation ev;
  SpectralField state;
  delay_inputs(t, history, state, ev.history_norm_sq);
  ev.eta = law_.evaluate(state.squared_norm(), ev.history_norm_sq);
  std::vector<double> grid = basis_.to_physical(history.eval(t - ev.eta));
  for (double& v : grid) v = nl_(v);
  ev.forcing = project(std::move(grid));
  return ev;
}

RhsEvaluation NonlocalRhs::evaluate(double t, const HistorySegment& history,
                                    DelayMode mode) const {
  return mode.is_discrete() ? discrete(t, history) : distributed(t, history, mode.n);
}

SpectralField project_distributed_rhs(double t, const HistorySegment& history,
                                      const DelayLaw& law, const EpsilonSchedule& schedule,
                                      int n, const Nonlinearity& nl, const SpatialKernel& f,
                                      const SpectralBasis& basis) {
  NonlocalRhs rhs(basis, nl, f, law, schedule, history.span());
  return rhs.distributed(t, history, n).forcing;
}

SpectralField project_discrete_rhs(double t, const HistorySegment& history, const DelayLaw& law,
                                   const Nonlinearity& nl, const SpatialKernel& f,
                                   const SpectralBasis& basis) {
  NonlocalRhs rhs(basis, nl, f, law, EpsilonSchedule{}, history.span());
  return rhs.discrete(t, history).forcing;
}

}  // namespace sdpde
