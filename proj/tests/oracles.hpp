#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's sampling or quadrature code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace oracle {

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Plain rejection sampling from N(mu, sigma) restricted to [a, b].
class TruncNormal {
 public:
  TruncNormal(double a, double b, double mu, double sigma) : a_(a), b_(b), normal_(mu, sigma) {}

  template <class Engine>
  double operator()(Engine& engine) {
    for (;;) {
      const double t = normal_(engine);
      if (t >= a_ && t <= b_) return t;
    }
  }

 private:
  double a_;
  double b_;
  std::normal_distribution<double> normal_;
};

inline double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
inline double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Normal mass between za and zb, taken from the nearer tail to avoid cancellation.
inline double mass(double za, double zb) {
  if (za > 0.0) return Phi(-za) - Phi(-zb);
  return Phi(zb) - Phi(za);
}

inline double tn_pdf(double a, double b, double mu, double sigma, double t) {
  if (t < a || t > b) return 0.0;
  return phi((t - mu) / sigma) / (sigma * mass((a - mu) / sigma, (b - mu) / sigma));
}

inline double tn_mean(double a, double b, double mu, double sigma) {
  const double al = (a - mu) / sigma;
  const double be = (b - mu) / sigma;
  return mu + sigma * (phi(al) - phi(be)) / mass(al, be);
}

/// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double lo, double hi, int panels) {
  if (panels % 2) ++panels;
  const double h = (hi - lo) / panels;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

template <class Sample>
Estimate running(std::uint64_t n, Sample&& sample) {
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t i = 1; i <= n; ++i) {
    const double x = sample();
    const double d = x - mean;
    mean += d / static_cast<double>(i);
    m2 += d * (x - mean);
  }
  return {mean, std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n))};
}

/// E[exp(-c min(T, clip) + offset)] by rejection-sampled Monte Carlo.
inline Estimate mc_clipped_exp(double a, double b, double mu, double sigma, double clip, double c,
                               double offset, std::uint64_t n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  TruncNormal dist(a, b, mu, sigma);
  return running(n, [&] { return std::exp(-c * std::min(dist(engine), clip) + offset); });
}

struct Dist {
  double a, b, mu, sigma;
};

/// E[exp(-lambda t_a + lambda_a (t_d + t_r + t_c))] with both times clipped.
inline Estimate mc_joint(Dist da, Dist dd, double T0, double t_c, double t_r, double lambda,
                         double lambda_a, std::uint64_t n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  TruncNormal ta(da.a, da.b, da.mu, da.sigma);
  TruncNormal td(dd.a, dd.b, dd.mu, dd.sigma);
  return running(n, [&] {
    const double a = std::min(ta(engine), T0 - t_c);
    const double d = std::min(td(engine), T0 - a - t_c);
    return std::exp(-lambda * a + lambda_a * (d + t_r + t_c));
  });
}

/// Continuous-time Lyapunov solution through the Cayley transform and Smith
/// doubling: A_d = (I - A)^-1 (I + A), Q_d = 2 (I - A)^-T (I - A)^-1.
inline Eigen::MatrixXd smith_lyapunov(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd inv = (I - A).inverse();
  Eigen::MatrixXd Ad = inv * (I + A);
  Eigen::MatrixXd X = 2.0 * inv.transpose() * inv;
  for (int k = 0; k < 60; ++k) {
    X += Ad.transpose() * X * Ad;
    Ad = Ad * Ad;
    if (Ad.cwiseAbs().maxCoeff() < 1e-300) break;
  }
  return 0.5 * (X + X.transpose());
}

/// Fine-grid classical RK4 over [t, t + span] using `substeps` steps.
inline Eigen::VectorXd integrate(const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd x, double t, double span, int substeps) {
  const double h = span / substeps;
  for (int i = 0; i < substeps; ++i) {
    const Eigen::VectorXd k1 = f(t, x);
    const Eigen::VectorXd k2 = f(t + h / 2, x + h / 2 * k1);
    const Eigen::VectorXd k3 = f(t + h / 2, x + h / 2 * k2);
    const Eigen::VectorXd k4 = f(t + h, x + h * k3);
    x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return x;
}

/// Random matrix with spectrum strictly in the left half plane.
template <class Engine>
Eigen::MatrixXd random_hurwitz(int n, Engine& engine) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Eigen::MatrixXd M(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) M(r, c) = u(engine);
  const double shift = M.eigenvalues().real().maxCoeff();
  std::uniform_real_distribution<double> margin(0.05, 2.0);
  return M - (shift + margin(engine)) * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace oracle
