#pragma once

// Composite Simpson rules on uniform grids.
//
// Grids are laid out in dimensionless time: `nodes_per_unit` nodes per unit
// of t * time_scale, where time_scale is the fastest rate of the generator
// (at least 1). Every grid has an even number of intervals and at least
// `min_intervals` of them.

#include <vector>

namespace hcarma {

struct UniformGrid {
  double length = 0.0;
  int intervals = 0;

  double step() const { return intervals > 0 ? length / intervals : 0.0; }
  double node(int k) const { return step() * k; }
};

inline constexpr int kMinIntervals = 16;

UniformGrid make_grid(double length, int nodes_per_unit, double time_scale,
                      int min_intervals = kMinIntervals);

// Weights of the composite Simpson rule on `intervals` (even) steps of size h.
std::vector<double> simpson_weights(int intervals, double h);

// Weights for integrating over [0, k h] for any k >= 1: Simpson for even k,
// Simpson followed by the 3/8 rule on the last three steps for odd k >= 3,
// trapezoid for k = 1.
std::vector<double> running_weights(int k, double h);

}  // namespace hcarma
