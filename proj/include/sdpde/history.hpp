#pragma once

// Method-of-steps storage of the solution segment u_t on [t - r, t].

#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "sdpde/spectral.hpp"

namespace sdpde {

// Quadrature over the delay variable theta in [-r, 0]: integral ~ sum w_i g(theta_i).
struct DelayQuadrature {
  std::vector<double> offsets;
  std::vector<double> weights;
};

class HistorySegment {
 public:
  struct Sample {
    double time;
    SpectralField field;
    double norm_sq;  // cached ||field||^2
  };

  explicit HistorySegment(double span);

  // Samples at -r, -r + step, ..., 0 with u0 at 0 and phi(theta) elsewhere.
  // r / step must be an integer.
  static HistorySegment from_initial_data(const SpectralField& u0,
                                          const std::function<SpectralField(double)>& phi,
                                          double span, double step);

  double span() const { return span_; }
  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }
  double front_time() const { return samples_.front().time; }
  double back_time() const { return samples_.back().time; }
  const SpectralField& back() const { return samples_.back().field; }
  const std::deque<Sample>& samples() const { return samples_; }

  // Appends a sample strictly after the last one and discards samples older
  // than t - r, keeping one extra sample before t - r.
  void append(double t, SpectralField field);

  // Linear interpolation per coefficient. Throws std::out_of_range outside
  // [back - r, back] (clipped to the stored samples); never extrapolates.
  SpectralField eval(double t) const;
  void eval_into(double t, SpectralField& out) const;

  // Trapezoid approximation of int_{-r}^0 ||u(t + s)||^2 ds over the sample grid.
  double segment_norm_sq(double t) const;
  double segment_norm_sq() const { return segment_norm_sq(back_time()); }

  // Same sample times shifted by -shift.
  HistorySegment rebased(double shift) const;

 private:
  friend double history_distance_sq(const HistorySegment&, const HistorySegment&, double);

  double lower_limit() const;
  void check_covered(double t) const;
  // Trapezoid of g over the window [t - r, t] using the sample nodes inside it.
  double integrate_window(double t, const std::function<double(double)>& g) const;

  double span_;
  std::deque<Sample> samples_;
};

// int_{-r}^0 ||a(t + s) - b(t + s)||^2 ds on the node grid of `a`.
double history_distance_sq(const HistorySegment& a, const HistorySegment& b, double t);

// w(y) = sum_i weight_i * map(u(t + offset_i, y)) on the physical grid.
std::vector<double> kernel_time_integral(const HistorySegment& history, double t,
                                         const DelayQuadrature& quadrature,
                                         const SpectralBasis& basis,
                                         const std::function<double(double)>& pointwise_map);

}  // namespace sdpde
