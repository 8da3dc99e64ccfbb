#pragma once

#include <functional>

namespace resilex::quadrature {

struct Estimate {
  double value = 0.0;
  double abs_err = 0.0;
  int panels = 0;
};

struct Tolerance {
  double abs = 1e-9;
  double rel = 1e-12;
  int max_panels = 4000;
};

/// Adaptive 7/15-point Gauss-Kronrod on [lo, hi]. The panel with the largest
/// error estimate is bisected until the summed estimate meets the tolerance.
/// The integrand is assumed smooth on the open interval; callers split at kinks.
Estimate integrate(const std::function<double(double)>& f, double lo, double hi,
                   Tolerance tol = {});

}  // namespace resilex::quadrature
