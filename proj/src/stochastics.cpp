#include "resilex/stochastics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "resilex/error.hpp"
#include "resilex/quadrature.hpp"

namespace resilex {

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double std_normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

TruncatedGaussian::TruncatedGaussian(double a, double b, double mu, double sigma)
    : a_(a), b_(b), mu_(mu), sigma_(sigma) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(mu) || !std::isfinite(sigma) ||
      !(a < b) || !(sigma > 0.0)) {
    throw Error(Errc::InvalidArgument, "truncated Gaussian requires finite a < b and sigma > 0");
  }
  alpha_ = (a - mu) / sigma;
  beta_ = (b - mu) / sigma;
  upper_tail_ = alpha_ > 0.0;
  mass_ = upper_tail_ ? std_normal_sf(alpha_) - std_normal_sf(beta_)
                      : std_normal_cdf(beta_) - std_normal_cdf(alpha_);
  if (!(mass_ > 0.0)) {
    throw Error(Errc::InvalidArgument, "truncation interval carries no probability mass");
  }
}

double TruncatedGaussian::pdf(double t) const {
  if (t < a_ || t > b_) return 0.0;
  return std_normal_pdf((t - mu_) / sigma_) / (sigma_ * mass_);
}

double TruncatedGaussian::cdf(double t) const {
  if (t <= a_) return 0.0;
  if (t >= b_) return 1.0;
  const double z = (t - mu_) / sigma_;
  const double p = upper_tail_ ? (std_normal_sf(alpha_) - std_normal_sf(z)) / mass_
                               : (std_normal_cdf(z) - std_normal_cdf(alpha_)) / mass_;
  return std::clamp(p, 0.0, 1.0);
}

double TruncatedGaussian::sf(double t) const {
  if (t <= a_) return 1.0;
  if (t >= b_) return 0.0;
  const double z = (t - mu_) / sigma_;
  const double q = upper_tail_ ? (std_normal_sf(z) - std_normal_sf(beta_)) / mass_
                               : (std_normal_cdf(beta_) - std_normal_cdf(z)) / mass_;
  return std::clamp(q, 0.0, 1.0);
}

double TruncatedGaussian::mean() const {
  return mu_ + sigma_ * (std_normal_pdf(alpha_) - std_normal_pdf(beta_)) / mass_;
}

double TruncatedGaussian::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  double z;
  if (upper_tail_) {
    const double q = std_normal_sf(alpha_) - u * mass_;
    if (!(q > 0.0)) return b_;
    z = std::numbers::sqrt2 * boost::math::erfc_inv(std::min(2.0 * q, 2.0));
  } else {
    const double p = std_normal_cdf(alpha_) + u * mass_;
    if (!(p > 0.0)) return a_;
    if (!(p < 1.0)) return b_;
    z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  }
  return std::clamp(mu_ + sigma_ * z, a_, b_);
}

namespace {

ExpectationResult clipped_exp_any_rate(const TruncatedGaussian& dist, double clip, double rate,
                                       double offset, quadrature::Tolerance tol) {
  if (clip <= dist.lower()) {
    return {std::exp(-rate * clip + offset), 0.0, ExpectationMethod::Quadrature, true};
  }
  // Constant integrand: no quadrature error to carry.
  if (rate == 0.0) return {std::exp(offset), 0.0, ExpectationMethod::Quadrature, false};
  const double upper = std::min(dist.upper(), clip);
  const auto continuous = quadrature::integrate(
      [&](double t) { return std::exp(-rate * t + offset) * dist.pdf(t); }, dist.lower(), upper,
      tol);
  const double atom = upper < dist.upper() ? std::exp(-rate * clip + offset) * dist.sf(upper) : 0.0;
  return {continuous.value + atom, continuous.abs_err, ExpectationMethod::Quadrature, false};
}

struct RunningMean {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  ExpectationResult result() const {
    const double variance = count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    const double stderr_ = std::sqrt(variance / static_cast<double>(std::max<std::uint64_t>(count, 1)));
    return {mean, 3.0 * stderr_, ExpectationMethod::MonteCarlo, false};
  }
};

}  // namespace

ExpectationResult expect_clipped_exp(const TruncatedGaussian& dist, double clip, double c,
                                     double offset) {
  if (!(c >= 0.0)) throw Error(Errc::InvalidArgument, "clipped expectation requires c >= 0");
  return clipped_exp_any_rate(dist, clip, c, offset, {1e-10, 1e-13, 4000});
}

ExpectationResult expect_joint_detection(const TruncatedGaussian& dist_a,
                                         const TruncatedGaussian& dist_d, double T0, double t_c,
                                         double t_r, double lambda, double lambda_a) {
  if (!(T0 > t_c)) throw Error(Errc::InvalidArgument, "joint detection requires T0 > t_c");

  const double clip_a = T0 - t_c;
  const quadrature::Tolerance inner_tol{1e-12, 1e-13, 4000};
  double inner_err = 0.0;

  // Conditional expectation over t_d given t_a, times the t_a-dependent factor.
  auto conditional = [&](double t_a) {
    const auto inner = clipped_exp_any_rate(dist_d, T0 - t_a - t_c, -lambda_a, 0.0, inner_tol);
    const double weight = std::exp(-lambda * t_a + lambda_a * (t_r + t_c));
    inner_err = std::max(inner_err, weight * inner.abs_err_est);
    return weight * inner.value;
  };

  if (clip_a <= dist_a.lower()) {
    ExpectationResult r{conditional(clip_a), inner_err, ExpectationMethod::Quadrature, true};
    return r;
  }

  // The inner clip crosses the support of t_d' at these t_a values; the
  // conditional expectation has kinks there.
  const double upper = std::min(dist_a.upper(), clip_a);
  std::vector<double> cuts = {dist_a.lower(), upper};
  for (double kink : {T0 - t_c - dist_d.upper(), T0 - t_c - dist_d.lower()}) {
    if (kink > dist_a.lower() && kink < upper) cuts.push_back(kink);
  }
  std::sort(cuts.begin(), cuts.end());

  double value = 0.0;
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto piece = quadrature::integrate(
        [&](double t) { return conditional(t) * dist_a.pdf(t); }, cuts[i], cuts[i + 1],
        {1e-10, 1e-13, 4000});
    value += piece.value;
    err += piece.abs_err;
  }
  if (upper < dist_a.upper()) value += conditional(clip_a) * dist_a.sf(upper);
  return {value, err + inner_err, ExpectationMethod::Quadrature, false};
}

ExpectationResult monte_carlo_clipped_exp(const TruncatedGaussian& dist, double clip, double c,
                                          double offset, std::uint64_t samples,
                                          std::uint64_t seed) {
  Rng rng(seed);
  RunningMean acc;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double t = std::min(dist.sample(rng), clip);
    acc.add(std::exp(-c * t + offset));
  }
  auto r = acc.result();
  r.clip_below_support = clip <= dist.lower();
  return r;
}

ExpectationResult monte_carlo_joint_detection(const TruncatedGaussian& dist_a,
                                              const TruncatedGaussian& dist_d, double T0,
                                              double t_c, double t_r, double lambda,
                                              double lambda_a, std::uint64_t samples,
                                              std::uint64_t seed) {
  Rng rng(seed);
  RunningMean acc;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double t_a = std::min(dist_a.sample(rng), T0 - t_c);
    const double t_d = std::min(dist_d.sample(rng), T0 - t_a - t_c);
    acc.add(std::exp(-lambda * t_a + lambda_a * (t_d + t_r + t_c)));
  }
  return acc.result();
}

}  // namespace resilex
