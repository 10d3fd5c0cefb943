#include "sdpde/history.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace sdpde {

namespace {

// Absolute tolerance for comparing grid-aligned times.
constexpr double kTimeTol = 1e-9;

std::string fmt_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  return buf;
}

}  // namespace

HistorySegment::HistorySegment(double span) : span_(span) {
  if (!(span > 0.0)) throw std::invalid_argument("history span must be positive");
}

HistorySegment HistorySegment::from_initial_data(const SpectralField& u0,
                                                 const std::function<SpectralField(double)>& phi,
                                                 double span, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("history step must be positive");
  const double ratio = span / step;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("delay span / step = " + fmt_time(ratio) + " is not an integer");
  }
  const auto count = static_cast<long>(steps);
  HistorySegment h(span);
  for (long i = count; i >= 1; --i) {
    const double t = -static_cast<double>(i) * step;
    SpectralField f = phi(t);
    if (f.order() != u0.order()) throw std::invalid_argument("history field order mismatch");
    const double nsq = f.squared_norm();
    h.samples_.push_back({t, std::move(f), nsq});
  }
  h.samples_.push_back({0.0, u0, u0.squared_norm()});
  return h;
}

void HistorySegment::append(double t, SpectralField field) {
  if (!samples_.empty()) {
    if (!(t > samples_.back().time + kTimeTol)) {
      throw std::invalid_argument("append time " + fmt_time(t) + " not after last sample " +
                                  fmt_time(samples_.back().time));
    }
    if (field.order() != samples_.back().field.order()) {
      throw std::invalid_argument("history field order mismatch");
    }
  }
  const double nsq = field.squared_norm();
  samples_.push_back({t, std::move(field), nsq});
  const double window_start = t - span_;
  while (samples_.size() >= 2 && samples_[1].time < window_start - kTimeTol) {
    samples_.pop_front();
  }
}

double HistorySegment::lower_limit() const {
  return std::max(samples_.front().time, samples_.back().time - span_);
}

void HistorySegment::check_covered(double t) const {
  if (samples_.empty()) throw std::out_of_range("history is empty");
  if (t < lower_limit() - kTimeTol || t > back_time() + kTimeTol) {
    throw std::out_of_range("time " + fmt_time(t) + " outside history span [" +
                            fmt_time(lower_limit()) + ", " + fmt_time(back_time()) + "]");
  }
}

SpectralField HistorySegment::eval(double t) const {
  SpectralField out;
  eval_into(t, out);
  return out;
}

void HistorySegment::eval_into(double t, SpectralField& out) const {
  check_covered(t);
  t = std::clamp(t, samples_.front().time, samples_.back().time);
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double v, const Sample& s) { return v < s.time; });
  if (it == samples_.begin()) {
    out = samples_.front().field;
    return;
  }
  const Sample& prev = *(it - 1);
  if (it == samples_.end() || t - prev.time <= 1e-14 * std::max(1.0, std::abs(t))) {
    out = prev.field;
    return;
  }
  const Sample& next = *it;
  const double w = (t - prev.time) / (next.time - prev.time);
  const std::size_t m = prev.field.order();
  if (out.order() != m) out = SpectralField(m);
  for (std::size_t k = 0; k < m; ++k) {
    out[k] = (1.0 - w) * prev.field[k] + w * next.field[k];
  }
}

double HistorySegment::integrate_window(double t, const std::function<double(double)>& g) const {
  const double lo = t - span_;
  check_covered(lo);
  check_covered(t);
  std::vector<double> nodes;
  nodes.push_back(lo);
  for (const Sample& s : samples_) {
    if (s.time > lo + kTimeTol && s.time < t - kTimeTol) nodes.push_back(s.time);
  }
  nodes.push_back(t);
  double total = 0.0;
  double prev = g(nodes.front());
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double cur = g(nodes[i]);
    total += 0.5 * (nodes[i] - nodes[i - 1]) * (prev + cur);
    prev = cur;
  }
  return total;
}

double HistorySegment::segment_norm_sq(double t) const {
  // Same trapezoid as integrate_window, reading cached norms at interior nodes.
  const double lo = t - span_;
  check_covered(lo);
  check_covered(t);
  double total = 0.0;
  double prev_time = lo;
  double prev = eval(lo).squared_norm();
  for (const Sample& s : samples_) {
    if (s.time > lo + kTimeTol && s.time < t - kTimeTol) {
      total += 0.5 * (s.time - prev_time) * (prev + s.norm_sq);
      prev_time = s.time;
      prev = s.norm_sq;
    }
  }
  const double last = eval(t).squared_norm();
  total += 0.5 * (t - prev_time) * (prev + last);
  return total;
}

HistorySegment HistorySegment::rebased(double shift) const {
  HistorySegment out(span_);
  for (const Sample& s : samples_) out.samples_.push_back({s.time - shift, s.field, s.norm_sq});
  return out;
}

double history_distance_sq(const HistorySegment& a, const HistorySegment& b, double t) {
  return a.integrate_window(t, [&](double tau) {
    const double d = distance(a.eval(tau), b.eval(tau));
    return d * d;
  });
}

std::vector<double> kernel_time_integral(const HistorySegment& history, double t,
                                         const DelayQuadrature& quadrature,
                                         const SpectralBasis& basis,
                                         const std::function<double(double)>& pointwise_map) {
  if (quadrature.offsets.size() != quadrature.weights.size()) {
    throw std::invalid_argument("quadrature offsets and weights differ in length");
  }
  const double r = history.span();
  const auto n = static_cast<std::size_t>(basis.grid_size());
  std::vector<double> out(n, 0.0);
  std::vector<double> grid(n);
  SpectralField state;
  for (std::size_t i = 0; i < quadrature.offsets.size(); ++i) {
    const double theta = quadrature.offsets[i];
    if (theta < -r - kTimeTol || theta > kTimeTol) {
      throw std::out_of_range("kernel node " + fmt_time(theta) + " escapes [-r, 0]");
    }
    history.eval_into(t + theta, state);
    basis.to_physical(state, grid);
    const double w = quadrature.weights[i];
    for (std::size_t j = 0; j < n; ++j) out[j] += w * pointwise_map(grid[j]);
  }
  return out;
}

}  // namespace sdpde
