#include "resilex/conditions.hpp"

#include <algorithm>
#include <cmath>

#include "resilex/error.hpp"

namespace resilex {

std::string_view to_string(Theorem theorem) {
  switch (theorem) {
    case Theorem::T1_Reboot: return "T1_Reboot";
    case Theorem::T2_Anomaly: return "T2_Anomaly";
    case Theorem::T3_Switching: return "T3_Switching";
    case Theorem::T4_MinHealthy: return "T4_MinHealthy";
  }
  return "unknown";
}

std::string_view to_string(SegmentLabel label) {
  switch (label) {
    case SegmentLabel::Auth: return "Auth";
    case SegmentLabel::Normal: return "Normal";
    case SegmentLabel::Attacked: return "Attacked";
    case SegmentLabel::Reinit: return "Reinit";
    case SegmentLabel::Silenced: return "Silenced";
  }
  return "unknown";
}

double ConditionVerdict::discrepancy() const {
  if (!monte_carlo || quadrature.value == 0.0) return 0.0;
  return std::abs(quadrature.value - monte_carlo->value) / std::abs(quadrature.value);
}

namespace {

ConditionVerdict make_verdict(Theorem theorem, ExpectationResult quad,
                              std::optional<ExpectationResult> mc, VerdictInputs inputs) {
  ConditionVerdict v;
  v.theorem = theorem;
  v.value = quad.value;
  v.satisfied = quad.value < 1.0;
  v.quadrature = quad;
  v.monte_carlo = mc;
  v.inputs = inputs;
  return v;
}

void require_period(double T0, double t_c) {
  if (!(T0 > t_c)) {
    throw Error(Errc::InfeasibleTiming, "working period T0 must exceed the authentication time t_c");
  }
}

}  // namespace

ConditionVerdict check_reboot(const Rates& rates, const TruncatedGaussian& dist_a, double T0,
                              double t_r, double t_c, MonteCarloOptions mc) {
  require_period(T0, t_c);
  const double clip = T0 - t_c;
  const double c = rates.lambda + rates.lambda_a;
  const double offset = rates.lambda_a * (T0 + t_r);
  std::optional<ExpectationResult> sampled;
  if (mc.samples > 0) sampled = monte_carlo_clipped_exp(dist_a, clip, c, offset, mc.samples, mc.seed);
  return make_verdict(Theorem::T1_Reboot, expect_clipped_exp(dist_a, clip, c, offset), sampled,
                      {T0, t_r, t_c, 1, rates});
}

ConditionVerdict check_anomaly(const Rates& rates, const TruncatedGaussian& dist_a,
                               const TruncatedGaussian& dist_d, double T0, double t_r, double t_c,
                               MonteCarloOptions mc) {
  require_period(T0, t_c);
  std::optional<ExpectationResult> sampled;
  if (mc.samples > 0) {
    sampled = monte_carlo_joint_detection(dist_a, dist_d, T0, t_c, t_r, rates.lambda,
                                          rates.lambda_a, mc.samples, mc.seed);
  }
  return make_verdict(
      Theorem::T2_Anomaly,
      expect_joint_detection(dist_a, dist_d, T0, t_c, t_r, rates.lambda, rates.lambda_a), sampled,
      {T0, t_r, t_c, 1, rates});
}

double max_controllers_exclusive(double t_r, double t_c) { return 1.0 + t_r / t_c; }

ConditionVerdict check_switching(const Rates& rates, const TruncatedGaussian& dist_a, int n,
                                 double t_r, double t_c, MonteCarloOptions mc) {
  if (n < 2) throw Error(Errc::InvalidArgument, "switching needs at least two controllers");
  if (t_c > 0.0 && static_cast<double>(n) >= max_controllers_exclusive(t_r, t_c)) {
    throw Error(Errc::TooManyControllers,
                "n = " + std::to_string(n) + " is not below 1 + t_r / t_c = " +
                    std::to_string(max_controllers_exclusive(t_r, t_c)));
  }
  const double T0 = t_r / (n - 1);
  require_period(T0, t_c);
  const double clip = T0 - t_c;
  const double c = rates.lambda + rates.lambda_a;
  const double offset = rates.lambda_a * T0;
  std::optional<ExpectationResult> sampled;
  if (mc.samples > 0) sampled = monte_carlo_clipped_exp(dist_a, clip, c, offset, mc.samples, mc.seed);
  return make_verdict(Theorem::T3_Switching, expect_clipped_exp(dist_a, clip, c, offset), sampled,
                      {T0, t_r, t_c, n, rates});
}

int smallest_integer_above(double bound) {
  const double nearest = std::round(bound);
  if (std::abs(bound - nearest) <= 1e-12 * std::max(1.0, std::abs(bound))) {
    return static_cast<int>(nearest) + 1;
  }
  return static_cast<int>(std::floor(bound)) + 1;
}

HealthyBound min_healthy_controllers(const Rates& rates, const TruncatedGaussian& dist_a, int n,
                                     double t_r, double t_c) {
  const ConditionVerdict switching = check_switching(rates, dist_a, n, t_r, t_c);
  const double T0 = t_r / (n - 1);
  const double denominator = T0 * rates.lambda_a - std::log(switching.value);
  if (!(denominator > 0.0)) {
    throw Error(Errc::DenominatorNonpositive,
                "switching condition fails even with every controller healthy");
  }
  HealthyBound out;
  out.expectation = switching.value;
  out.bound = rates.lambda_a * n * T0 / denominator;
  out.min_healthy = smallest_integer_above(out.bound);
  out.simple_bound = rates.lambda_a * n / (rates.lambda + rates.lambda_a);
  out.min_healthy_simple = smallest_integer_above(out.simple_bound);
  return out;
}

double reboot_min_period(const Rates& rates, double t_r, double t_c) {
  return t_c + rates.lambda_a / rates.lambda * (t_c + t_r);
}

double max_constant_detection_time(const Rates& rates, double mu_a, double t_r, double t_c) {
  return rates.lambda / rates.lambda_a * mu_a - t_r - t_c;
}

double constant_time_anomaly_value(const Rates& rates, double mu_a, double mu_d, double t_r,
                                   double t_c) {
  return std::exp(-rates.lambda * mu_a + rates.lambda_a * (mu_d + t_r + t_c));
}

double persistent_compromise_limit(const Rates& rates, int n) {
  return rates.lambda / (rates.lambda + rates.lambda_a) * n;
}

bool persistent_compromise_bounded(const Rates& rates, int m, int n) {
  return static_cast<double>(m) < persistent_compromise_limit(rates, n);
}

EnvelopeSegment make_segment(const CertificateConstants& cert, SegmentLabel label, double duration) {
  switch (label) {
    case SegmentLabel::Normal:
      return {duration, -cert.lambda, cert.forcing_normal(), label};
    case SegmentLabel::Attacked:
      return {duration, cert.lambda_a, cert.forcing_attacked(), label};
    case SegmentLabel::Auth:
    case SegmentLabel::Reinit:
    case SegmentLabel::Silenced:
      break;
  }
  return {duration, cert.lambda_a, cert.forcing_unpowered(), label};
}

std::vector<EnvelopeSegment> reboot_period_segments(const CertificateConstants& cert, double t_c,
                                                    double t_a, double T0, double t_r) {
  return {make_segment(cert, SegmentLabel::Auth, t_c),
          make_segment(cert, SegmentLabel::Normal, t_a),
          make_segment(cert, SegmentLabel::Attacked, std::max(0.0, T0 - t_a - t_c)),
          make_segment(cert, SegmentLabel::Reinit, t_r)};
}

double segment_bound(double v_start, const EnvelopeSegment& segment, double elapsed) {
  const double growth = std::exp(segment.rate * elapsed);
  const double integral =
      segment.rate == 0.0 ? elapsed : std::expm1(segment.rate * elapsed) / segment.rate;
  return v_start * growth + segment.forcing * integral;
}

Envelope::Envelope(std::vector<EnvelopeSegment> segments, double v0)
    : segments_(std::move(segments)) {
  if (!(v0 >= 0.0)) throw Error(Errc::InvalidArgument, "envelope needs V0 >= 0");
  times_.reserve(segments_.size() + 1);
  starts_.reserve(segments_.size() + 1);
  times_.push_back(0.0);
  starts_.push_back(v0);
  for (const auto& s : segments_) {
    if (!(s.duration >= 0.0)) throw Error(Errc::InvalidArgument, "segment duration must be >= 0");
    starts_.push_back(segment_bound(starts_.back(), s, s.duration));
    times_.push_back(times_.back() + s.duration);
  }
}

double Envelope::operator()(double t) const {
  if (t <= 0.0) return starts_.front();
  if (t >= times_.back()) return starts_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto i = static_cast<std::size_t>(std::distance(times_.begin(), it) - 1);
  return segment_bound(starts_[i], segments_[i], t - times_[i]);
}

std::vector<double> Envelope::sample(const std::vector<double>& grid) const {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back((*this)(t));
  return out;
}

Envelope propagate_envelope(const std::vector<EnvelopeSegment>& segments, double v0) {
  return Envelope(segments, v0);
}

}  // namespace resilex
