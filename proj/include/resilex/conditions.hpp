#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "resilex/certificate.hpp"
#include "resilex/stochastics.hpp"

namespace resilex {

enum class Theorem { T1_Reboot, T2_Anomaly, T3_Switching, T4_MinHealthy };

std::string_view to_string(Theorem theorem);

/// Timing and rates a verdict was computed from.
struct VerdictInputs {
  double T0 = 0.0;
  double t_r = 0.0;
  double t_c = 0.0;
  int n = 1;
  Rates rates;
};

struct ConditionVerdict {
  Theorem theorem = Theorem::T1_Reboot;
  double value = 0.0;
  bool satisfied = false;
  ExpectationResult quadrature;
  /// Independent sampling estimate, when requested.
  std::optional<ExpectationResult> monte_carlo;
  VerdictInputs inputs;

  /// |quadrature - monte_carlo| / |quadrature|, or 0 without a sampling estimate.
  double discrepancy() const;
};

struct MonteCarloOptions {
  std::uint64_t samples = 0;  // 0 disables the sampling cross-check
  std::uint64_t seed = 1;
};

/// Re-initialisation only: E[exp(-(lambda + lambda_a) t_a + lambda_a (T0 + t_r))] < 1
/// with t_a = min(t_a', T0 - t_c).
ConditionVerdict check_reboot(const Rates& rates, const TruncatedGaussian& dist_a, double T0,
                              double t_r, double t_c, MonteCarloOptions mc = {});

/// Re-initialisation plus detector: E[exp(-lambda t_a + lambda_a (t_d + t_r + t_c))] < 1.
ConditionVerdict check_anomaly(const Rates& rates, const TruncatedGaussian& dist_a,
                               const TruncatedGaussian& dist_d, double T0, double t_r, double t_c,
                               MonteCarloOptions mc = {});

/// n-controller rotation with T0 = t_r / (n - 1). Throws Error(TooManyControllers)
/// when n >= 1 + t_r / t_c, Error(InvalidArgument) when n < 2.
ConditionVerdict check_switching(const Rates& rates, const TruncatedGaussian& dist_a, int n,
                                 double t_r, double t_c, MonteCarloOptions mc = {});

struct HealthyBound {
  double bound = 0.0;          // n1 must strictly exceed this
  int min_healthy = 0;         // smallest integer n1 > bound
  double simple_bound = 0.0;   // lambda_a n / (lambda + lambda_a), constant t_a = T0
  int min_healthy_simple = 0;
  double expectation = 0.0;    // the switching expectation used in the bound
};

/// Minimum number of controllers with finite re-initialisation time. Throws
/// Error(DenominatorNonpositive) if even an all-healthy bank fails.
HealthyBound min_healthy_controllers(const Rates& rates, const TruncatedGaussian& dist_a, int n,
                                     double t_r, double t_c);

/// Smallest integer strictly greater than bound, with 1e-12 slack so that a
/// bound sitting on an integer is not flipped by rounding.
int smallest_integer_above(double bound);

// Closed-form corollaries.

/// Without attacks the reboot condition holds iff T0 exceeds this.
double reboot_min_period(const Rates& rates, double t_r, double t_c);
/// Constant-time attack and detection: bounded iff mu_d is below this.
double max_constant_detection_time(const Rates& rates, double mu_a, double t_r, double t_c);
/// Constant-time closed form of the anomaly expectation.
double constant_time_anomaly_value(const Rates& rates, double mu_a, double mu_d, double t_r,
                                   double t_c);
/// Instantaneous persistent compromise of m of n slots is tolerated iff m < this.
double persistent_compromise_limit(const Rates& rates, int n);
bool persistent_compromise_bounded(const Rates& rates, int m, int n);
/// n must stay strictly below 1 + t_r / t_c.
double max_controllers_exclusive(double t_r, double t_c);

enum class SegmentLabel { Auth, Normal, Attacked, Reinit, Silenced };

std::string_view to_string(SegmentLabel label);

struct EnvelopeSegment {
  double duration = 0.0;
  double rate = 0.0;
  double forcing = 0.0;
  SegmentLabel label = SegmentLabel::Normal;
};

/// Segment with the rate and forcing implied by the certificate for its label.
EnvelopeSegment make_segment(const CertificateConstants& cert, SegmentLabel label, double duration);

/// Auth(t_c) + Normal(t_a) + Attacked(T0 - t_a - t_c) + Reinit(t_r).
std::vector<EnvelopeSegment> reboot_period_segments(const CertificateConstants& cert, double t_c,
                                                    double t_a, double T0, double t_r);

/// Piecewise-exponential bound obtained by chaining the per-segment
/// Bellman-Gronwall estimates.
class Envelope {
 public:
  Envelope(std::vector<EnvelopeSegment> segments, double v0);

  double operator()(double t) const;
  double end_value() const { return starts_.back(); }
  double duration() const { return times_.back(); }
  std::vector<double> sample(const std::vector<double>& grid) const;
  const std::vector<EnvelopeSegment>& segments() const { return segments_; }

 private:
  std::vector<EnvelopeSegment> segments_;
  std::vector<double> times_;   // segment start times, plus the end
  std::vector<double> starts_;  // bound at each segment start, plus the end
};

/// V_end <= V_start e^{r d} + f * integral_0^d e^{r (d - s)} ds.
double segment_bound(double v_start, const EnvelopeSegment& segment, double elapsed);

Envelope propagate_envelope(const std::vector<EnvelopeSegment>& segments, double v0);

}  // namespace resilex
