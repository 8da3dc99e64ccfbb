#include "resilex/certificate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "resilex/error.hpp"

namespace resilex {

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& closed_loop) {
  const Eigen::Index n = closed_loop.rows();
  if (closed_loop.cols() != n || n == 0) {
    throw Error(Errc::InvalidArgument, "Lyapunov solve needs a non-empty square matrix");
  }
  const Eigen::VectorXcd poles = closed_loop.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (poles(i).real() >= -1e-12) {
      throw Error(Errc::NotHurwitz, "closed-loop matrix has an eigenvalue with non-negative real part");
    }
  }

  // vec(A' P + P A) = (I (x) A' + A' (x) I) vec(P), column-major vec.
  const Eigen::MatrixXd At = closed_loop.transpose();
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      system.block(j * n, i * n, n, n) += At(j, i) * Eigen::MatrixXd::Identity(n, n);
      if (i == j) system.block(j * n, j * n, n, n) += At;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::MatrixXd::Identity(n, n).reshaped();
  const Eigen::VectorXd vecP = system.fullPivLu().solve(rhs);
  Eigen::MatrixXd P = vecP.reshaped(n, n);
  return 0.5 * (P + P.transpose());
}

CertificateConstants derive_constants(const Eigen::MatrixXd& P, const PlantModel& plant,
                                      ConstantsMode mode) {
  const auto lin = plant.linear_structure();
  if (!lin) {
    throw Error(Errc::UnsupportedPlant,
                std::string("no certificate derivation for plant '") + std::string(plant.name()) + "'");
  }

  CertificateConstants out;
  out.P = P;
  out.mode = mode;
  out.w_max = lin->w_max;
  out.u_max = plant.u_max();

  if (mode == ConstantsMode::PaperConstants) {
    out.alpha_lo = 0.2;
    out.alpha_hi = 0.25;
    out.beta1_bar = 4.0;
    out.gamma1_bar = 1.0;
    out.gamma2_bar = 0.25;
    out.beta2_bar = 1.0;
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pe(P);
  const double p_min = pe.eigenvalues().minCoeff();
  const double p_max = pe.eigenvalues().maxCoeff();
  if (!(p_min > 0.0)) throw Error(Errc::InvalidArgument, "P must be positive definite");

  // alpha(|x|) = x'x, so alpha_lo V <= x'x <= alpha_hi V.
  out.alpha_lo = 1.0 / p_max;
  out.alpha_hi = 1.0 / p_min;

  // |2 x' P h g(x) w| <= 2 |P h| |x| |w| with |g| <= 1.
  const double dist_coef = 2.0 * (P * lin->disturbance_direction).norm();
  const double input_coef = 2.0 * (P * lin->B).norm();
  out.beta1_bar = dist_coef * dist_coef;

  const Eigen::MatrixXd open = lin->A.transpose() * P + P * lin->A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oe(0.5 * (open + open.transpose()));
  out.gamma1_bar = std::max(0.0, oe.eigenvalues().maxCoeff()) / p_min;
  out.gamma2_bar = input_coef * input_coef / p_min;
  out.beta2_bar = dist_coef * dist_coef / p_min;
  return out;
}

Rates compute_rates(const CertificateConstants& constants, double eps, double eps_a, double eps_b) {
  if (!(eps > constants.eps_threshold())) {
    throw Error(Errc::EpsilonTooSmall, "eps must exceed beta1_bar * alpha_hi / alpha_lo = " +
                                           std::to_string(constants.eps_threshold()));
  }
  if (!(eps_a > 0.0) || !(eps_b > 0.0)) {
    throw Error(Errc::EpsilonTooSmall, "eps_a and eps_b must be positive");
  }
  Rates r;
  r.lambda = constants.alpha_lo - constants.beta1_bar * constants.alpha_hi / eps;
  r.lambda_a = constants.gamma1_bar + constants.gamma2_bar / eps_a + constants.beta2_bar / eps_b;
  return r;
}

CertificateConstants build_certificate(const PlantModel& plant, ConstantsMode mode,
                                       std::optional<double> eps, double eps_a, double eps_b) {
  const auto lin = plant.linear_structure();
  if (!lin) {
    throw Error(Errc::UnsupportedPlant,
                std::string("no certificate derivation for plant '") + std::string(plant.name()) + "'");
  }
  const Eigen::MatrixXd P = solve_lyapunov(lin->A + lin->B * lin->K);
  CertificateConstants c = derive_constants(P, plant, mode);
  c.eps = eps.value_or(10.0 * c.eps_threshold());
  c.eps_a = eps_a;
  c.eps_b = eps_b;
  const Rates r = compute_rates(c, c.eps, eps_a, eps_b);
  c.lambda = r.lambda;
  c.lambda_a = r.lambda_a;
  return c;
}

}  // namespace resilex
