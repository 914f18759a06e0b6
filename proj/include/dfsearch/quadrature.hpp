#pragma once

#include <functional>
#include <vector>

namespace dfsearch {

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  int max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // Kronrod-Gauss error estimate, summed over panels
  bool converged = false;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration of f over [a, b].
/// Interior `breakpoints` (kinks, jumps) become panel edges; points outside
/// (a, b) are ignored.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& breakpoints = {},
                           const QuadratureOptions& options = {});

}  // namespace dfsearch
