#pragma once

#include <vector>

namespace cisc {

/// Log-uniform temperature grid: `points` values with evenly spaced
/// exponents between lo and hi (inclusive).
struct GridSpec {
  int points = 80;
  double lo = 1e-4;
  double hi = 1e4;
};

std::vector<double> temperature_grid(const GridSpec& spec = {});

}  // namespace cisc
