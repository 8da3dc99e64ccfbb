#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace resilex {

/// Deterministic uniform source. Each ensemble run owns one, seeded from
/// base_seed + run_index; the double mapping does not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Standard normal density and distribution function. Phi is evaluated through
/// std::erfc (the platform libm, accurate to a few ulp), which meets 1e-12
/// absolute accuracy on [-8, 8].
double std_normal_pdf(double x);
double std_normal_cdf(double x);
/// Upper tail 1 - Phi(x) without cancellation.
double std_normal_sf(double x);

/// Normal(mu, sigma) restricted to [a, b] and renormalised.
class TruncatedGaussian {
 public:
  /// Throws Error(InvalidArgument) unless a < b and sigma > 0 (all finite).
  TruncatedGaussian(double a, double b, double mu, double sigma);

  double lower() const { return a_; }
  double upper() const { return b_; }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  std::array<double, 4> params() const { return {a_, b_, mu_, sigma_}; }

  double pdf(double t) const;
  double cdf(double t) const;
  /// 1 - cdf(t), evaluated without cancellation.
  double sf(double t) const;
  /// Closed-form mean of the truncated distribution.
  double mean() const;
  /// Inverse CDF on the truncated interval; u in [0, 1].
  double quantile(double u) const;
  /// One uniform draw mapped through quantile().
  double sample(Rng& rng) const { return quantile(rng.uniform()); }

  bool operator==(const TruncatedGaussian&) const = default;

 private:
  double a_;
  double b_;
  double mu_;
  double sigma_;
  // Standardised bounds and normalising mass, cached.
  double alpha_;
  double beta_;
  bool upper_tail_;  // both bounds above the mean: work with survival functions
  double mass_;
};

enum class ExpectationMethod { Quadrature, MonteCarlo };

struct ExpectationResult {
  double value = 0.0;
  double abs_err_est = 0.0;
  ExpectationMethod method = ExpectationMethod::Quadrature;
  /// Set when the clip lies at or below the support: the result is the atom alone.
  bool clip_below_support = false;
};

/// E[exp(-c * min(T, clip) + offset)] for T ~ dist. The continuous part is
/// integrated over [a, min(b, clip)]; the probability mass beyond the clip is
/// added as an explicit atom. Requires c >= 0.
ExpectationResult expect_clipped_exp(const TruncatedGaussian& dist, double clip, double c,
                                     double offset);

/// Joint expectation E[exp(-lambda * t_a + lambda_a * (t_d + t_r + t_c))] with
/// t_a = min(t_a', T0 - t_c) and t_d = min(t_d', T0 - t_a - t_c), t_a' and t_d'
/// independent.
ExpectationResult expect_joint_detection(const TruncatedGaussian& dist_a,
                                         const TruncatedGaussian& dist_d, double T0, double t_c,
                                         double t_r, double lambda, double lambda_a);

/// Monte Carlo counterparts. abs_err_est is three standard errors.
ExpectationResult monte_carlo_clipped_exp(const TruncatedGaussian& dist, double clip, double c,
                                          double offset, std::uint64_t samples,
                                          std::uint64_t seed);

ExpectationResult monte_carlo_joint_detection(const TruncatedGaussian& dist_a,
                                              const TruncatedGaussian& dist_d, double T0,
                                              double t_c, double t_r, double lambda,
                                              double lambda_a, std::uint64_t samples,
                                              std::uint64_t seed);

}  // namespace resilex
