#pragma once

#include <optional>

#include <Eigen/Dense>

#include "resilex/models.hpp"

namespace resilex {

enum class ConstantsMode { PaperConstants, DerivedConstants };

struct Rates {
  double lambda = 0.0;    // certified decay under the nominal law
  double lambda_a = 0.0;  // worst-case growth under arbitrary bounded input
};

/// Lyapunov certificate V = x' P x and the scalar bounds used by the
/// boundedness conditions. Rates and epsilons are zero until compute_rates.
struct CertificateConstants {
  Eigen::MatrixXd P;
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  double beta1_bar = 0.0;
  double gamma1_bar = 0.0;
  double gamma2_bar = 0.0;
  double beta2_bar = 0.0;
  double eps = 0.0;
  double eps_a = 0.0;
  double eps_b = 0.0;
  double lambda = 0.0;
  double lambda_a = 0.0;
  double w_max = 0.0;
  double u_max = 0.0;
  ConstantsMode mode = ConstantsMode::PaperConstants;

  Rates rates() const { return {lambda, lambda_a}; }
  /// Smallest admissible eps is strictly above this.
  double eps_threshold() const { return beta1_bar * alpha_hi / alpha_lo; }

  /// Per-segment forcing terms of the Gronwall envelope, with mu_1, mu_2 and
  /// gamma_u taken as |.|.
  double forcing_normal() const { return eps / 4.0 * w_max * w_max; }
  double forcing_unpowered() const { return eps_b / 4.0 * w_max * w_max; }
  double forcing_attacked() const { return eps_a / 4.0 * u_max * u_max + forcing_unpowered(); }
};

/// Solves A_c' P + P A_c = -I through the Kronecker-vectorised linear system.
/// Throws Error(NotHurwitz) if any eigenvalue has real part >= -1e-12.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& closed_loop);

/// Bound constants for the linear plant. PaperConstants returns the fixed
/// choices; DerivedConstants computes operator-norm bounds from P.
/// Throws Error(UnsupportedPlant) for plants without a linear structure.
CertificateConstants derive_constants(const Eigen::MatrixXd& P, const PlantModel& plant,
                                      ConstantsMode mode);

/// lambda = alpha_lo - beta1_bar alpha_hi / eps and
/// lambda_a = gamma1_bar + gamma2_bar / eps_a + beta2_bar / eps_b.
/// Throws Error(EpsilonTooSmall) unless eps > beta1_bar alpha_hi / alpha_lo.
Rates compute_rates(const CertificateConstants& constants, double eps, double eps_a, double eps_b);

/// Convenience: solve P for the plant's closed loop, derive the constants and
/// fill in the rates. eps defaults to ten times the admissibility threshold.
CertificateConstants build_certificate(const PlantModel& plant, ConstantsMode mode,
                                       std::optional<double> eps, double eps_a, double eps_b);

}  // namespace resilex
