#include "resilex/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace resilex::quadrature {
namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double err;
  bool operator<(const Panel& other) const { return err < other.err; }
};

Panel gk15(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

Estimate integrate(const std::function<double(double)>& f, double lo, double hi, Tolerance tol) {
  if (!(hi > lo)) return {0.0, 0.0, 0};

  std::priority_queue<Panel> panels;
  Panel first = gk15(f, lo, hi);
  double value = first.value;
  double err = first.err;
  panels.push(first);

  int count = 1;
  while (err > std::max(tol.abs, tol.rel * std::abs(value)) && count < tol.max_panels) {
    Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // Panel is at floating-point resolution; keep its estimate.
      panels.push({worst.lo, worst.hi, worst.value, 0.0});
      err -= worst.err;
      continue;
    }
    Panel left = gk15(f, worst.lo, mid);
    Panel right = gk15(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    panels.push(left);
    panels.push(right);
    ++count;
  }

  // Re-sum to shed accumulated cancellation from the running updates.
  value = 0.0;
  err = 0.0;
  while (!panels.empty()) {
    value += panels.top().value;
    err += panels.top().err;
    panels.pop();
  }
  return {value, err, count};
}

}  // namespace resilex::quadrature
