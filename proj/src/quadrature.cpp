#include "hcarma/quadrature.hpp"

#include "hcarma/errors.hpp"

#include <algorithm>
#include <cmath>

namespace hcarma {

UniformGrid make_grid(double length, int nodes_per_unit, double time_scale,
                      int min_intervals) {
  if (!(length >= 0.0) || !std::isfinite(length)) {
    throw DimensionError("quadrature grid: length must be finite and >= 0");
  }
  if (nodes_per_unit < 1) {
    throw DimensionError("quadrature grid: quadrature_nodes must be >= 1");
  }
  UniformGrid g;
  g.length = length;
  if (length == 0.0) return g;
  const double wanted = std::ceil(length * std::max(time_scale, 1.0) * nodes_per_unit);
  if (wanted > 5e7) {
    throw NumericalError("quadrature grid: " + std::to_string(wanted) +
                         " intervals requested; reduce the horizon or node density");
  }
  int m = std::max(min_intervals, static_cast<int>(wanted));
  if (m % 2 != 0) ++m;
  g.intervals = m;
  return g;
}

std::vector<double> simpson_weights(int intervals, double h) {
  if (intervals < 2 || intervals % 2 != 0) {
    throw DimensionError("simpson: need a positive even number of intervals");
  }
  std::vector<double> w(intervals + 1);
  for (int j = 0; j <= intervals; ++j) {
    const double c = (j == 0 || j == intervals) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    w[j] = c * h / 3.0;
  }
  return w;
}

std::vector<double> running_weights(int k, double h) {
  if (k < 1) return std::vector<double>(std::max(k + 1, 1), 0.0);
  if (k == 1) return {h / 2.0, h / 2.0};
  if (k % 2 == 0) return simpson_weights(k, h);
  std::vector<double> w(k + 1, 0.0);
  const int head = k - 3;
  if (head > 0) {
    const auto s = simpson_weights(head, h);
    for (int j = 0; j <= head; ++j) w[j] = s[j];
  }
  const double c = 3.0 * h / 8.0;
  w[head] += c;
  w[head + 1] += 3.0 * c;
  w[head + 2] += 3.0 * c;
  w[head + 3] += c;
  return w;
}

}  // namespace hcarma
