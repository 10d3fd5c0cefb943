#include "sdpde/delay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdpde {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double h_norm_sq(const HState& s) {
  return s.state.squared_norm() + s.history.segment_norm_sq();
}

double h_distance(const HState& a, const HState& b) {
  const double d = distance(a.state, b.state);
  return std::sqrt(d * d + history_distance_sq(a.history, b.history, a.history.back_time()));
}

DelayLaw DelayLaw::constant(double eta0) {
  DelayLaw law;
  law.rule = Rule::constant;
  law.eta0 = eta0;
  return law;
}

DelayLaw DelayLaw::sigmoid(double eta_max, double c0, double c1, double c2) {
  DelayLaw law;
  law.rule = Rule::sigmoid;
  law.eta_max = eta_max;
  law.c0 = c0;
  law.c1 = c1;
  law.c2 = c2;
  return law;
}

double DelayLaw::evaluate(double state_norm_sq, double history_norm_sq) const {
  if (rule == Rule::constant) return eta0;
  return eta_max * logistic(c0 + c1 * state_norm_sq + c2 * history_norm_sq);
}

double DelayLaw::lipschitz_bound(double radius) const {
  if (rule == Rule::constant) return 0.0;
  return 0.5 * eta_max * radius * std::hypot(c1, c2);
}

double eta_eval(const DelayLaw& law, const SpectralField& a, const HistorySegment& phi) {
  if (law.rule == DelayLaw::Rule::constant) return law.eta0;
  return law.evaluate(a.squared_norm(), phi.segment_norm_sq());
}

void EpsilonSchedule::validate() const {
  if (!(eps0 > 0.0)) throw std::invalid_argument("eps0 must be positive");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("eps ratio must lie in (0, 1) for a decreasing sequence");
  }
}

double EpsilonSchedule::operator()(int n) const {
  if (n < 1) throw std::invalid_argument("kernel index n must be >= 1");
  return eps0 * std::pow(ratio, n - 1);
}

DelayKernel DelayKernel::step(double eps, double delay) {
  if (!(eps > 0.0)) throw std::invalid_argument("step kernel width must be positive");
  DelayKernel k(Kind::step, -delay - eps, -delay);
  k.height_ = 1.0 / eps;
  return k;
}

DelayKernel DelayKernel::tabulated(double lower, double upper, std::vector<double> values) {
  if (!(upper > lower)) throw std::invalid_argument("tabulated kernel needs lower < upper");
  if (values.size() < 2) throw std::invalid_argument("tabulated kernel needs >= 2 values");
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("tabulated kernel values must be finite and non-negative");
    }
  }
  DelayKernel k(Kind::tabulated, lower, upper);
  k.values_ = std::move(values);
  return k;
}

double DelayKernel::value(double theta) const {
  if (theta < lower_ || theta > upper_) return 0.0;
  if (kind_ == Kind::step) return height_;
  const double pos = (theta - lower_) / (upper_ - lower_) * static_cast<double>(values_.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

double DelayKernel::mass() const {
  if (kind_ == Kind::step) return height_ * (upper_ - lower_);
  const double h = (upper_ - lower_) / static_cast<double>(values_.size() - 1);
  double s = 0.5 * (values_.front() + values_.back());
  for (std::size_t i = 1; i + 1 < values_.size(); ++i) s += values_[i];
  return h * s;
}

double DelayKernel::sup_norm() const {
  if (kind_ == Kind::step) return height_;
  return *std::max_element(values_.begin(), values_.end());
}

DelayQuadrature DelayKernel::quadrature(int subintervals) const {
  DelayQuadrature q;
  if (kind_ == Kind::step) {
    if (subintervals < 1) throw std::invalid_argument("need at least one subinterval");
    const double panel = (upper_ - lower_) / subintervals;
    const double w = height_ * panel;
    for (int i = 0; i <= subintervals; ++i) {
      q.offsets.push_back(i == subintervals ? upper_ : lower_ + i * panel);
      q.weights.push_back(i == 0 || i == subintervals ? 0.5 * w : w);
    }
    return q;
  }
  const std::size_t n = values_.size();
  const double h = (upper_ - lower_) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    q.offsets.push_back(i + 1 == n ? upper_ : lower_ + static_cast<double>(i) * h);
    q.weights.push_back((i == 0 || i + 1 == n ? 0.5 : 1.0) * h * values_[i]);
  }
  return q;
}

DelayKernel make_step_kernel(int n, const EpsilonSchedule& schedule, const DelayLaw& law,
                             const SpectralField& a, const HistorySegment& phi) {
  schedule.validate();
  const double eps = schedule(n);
  const double eta = eta_eval(law, a, phi);
  if (eta < 0.0 || eta + eps > phi.span() + 1e-12) {
    throw std::out_of_range("step kernel support [" + std::to_string(-eta - eps) + ", " +
                            std::to_string(-eta) + "] escapes [-r, 0]");
  }
  return DelayKernel::step(eps, eta);
}

double kernel_l1_diff(const DelayKernel& a, const DelayKernel& b) {
  if (a.kind() != DelayKernel::Kind::step || b.kind() != DelayKernel::Kind::step) {
    throw std::invalid_argument("kernel_l1_diff is defined for step kernels");
  }
  const double eps = a.epsilon();
  if (std::abs(eps - b.epsilon()) > 1e-12 * eps) {
    throw std::invalid_argument("kernels have different widths");
  }
  // Symmetric difference of two equal-length intervals at height 1/eps.
  const double shift = std::abs(a.delay() - b.delay());
  return 2.0 * std::min(shift, eps) / eps;
}

KernelHypothesisReport verify_kernel_hypotheses(const DelayLaw& law,
                                                const EpsilonSchedule& schedule, int n,
                                                double radius,
                                                std::span<const std::pair<HState, HState>> pairs,
                                                double mass_tolerance) {
  KernelHypothesisReport rep;
  rep.epsilon = schedule(n);
  rep.radius = radius;
  rep.eta_lipschitz = law.lipschitz_bound(radius);
  rep.kernel_lipschitz = 2.0 * rep.eta_lipschitz / rep.epsilon;
  const double ball = radius * radius * (1.0 + 1e-12);
  for (const auto& [s1, s2] : pairs) {
    if (h_norm_sq(s1) > ball || h_norm_sq(s2) > ball) {
      ++rep.outside_ball;
      continue;
    }
    ++rep.pairs;
    const DelayKernel k1 = make_step_kernel(n, schedule, law, s1.state, s1.history);
    const DelayKernel k2 = make_step_kernel(n, schedule, law, s2.state, s2.history);
    for (const DelayKernel* k : {&k1, &k2}) {
      const double mass_err = std::abs(k->mass() - 1.0);
      rep.max_mass_error = std::max(rep.max_mass_error, mass_err);
      if (mass_err > mass_tolerance) ++rep.mass_violations;
      rep.max_sup_error = std::max(rep.max_sup_error, std::abs(k->sup_norm() - 1.0 / rep.epsilon));
    }
    const double diff = kernel_l1_diff(k1, k2);
    const double dist = h_distance(s1, s2);
    if (dist > 0.0) {
      rep.max_ratio = std::max(rep.max_ratio, diff / dist);
    }
    // Relative rounding allowance on the product bound.
    if (diff > rep.kernel_lipschitz * dist * (1.0 + 1e-12) + 1e-15) ++rep.lipschitz_violations;
  }
  return rep;
}

}  // namespace sdpde
