#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace resilex {

using State = Eigen::VectorXd;

/// Linear part of a plant written as x' = A x + B u + h * g(x) * w with
/// |g(x)| <= 1; lets the certificate builder bound the cross terms.
struct LinearStructure {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd K;
  Eigen::VectorXd disturbance_direction;
  double w_max = 1.0;
};

/// Continuous plant with scalar control and scalar disturbance. Implementations
/// are immutable and safe to share between ensemble workers.
class PlantModel {
 public:
  virtual ~PlantModel() = default;

  virtual std::string_view name() const = 0;
  virtual int state_dim() const = 0;
  virtual State derivative(const State& x, double u, double w, double t) const = 0;
  virtual double disturbance(double t) const = 0;
  virtual double u_max() const = 0;
  /// Unclamped control law. Saturation is applied by the engine.
  virtual double nominal_control(const State& x) const = 0;
  virtual State equilibrium() const = 0;
  virtual State initial_state() const = 0;
  virtual std::optional<LinearStructure> linear_structure() const { return std::nullopt; }
};

/// x1' = x2, x2' = -x2 + sin(0.1 x1) w + x3, x3' = -x3 + u, under u = K x.
struct LinearThirdOrder {
  std::array<double, 9> A = {0, 1, 0,   //
                             0, -1, 1,  //
                             0, 0, -1};  // row-major
  std::array<double, 3> B = {0, 0, 1};
  std::array<double, 3> K = {-27, -19, -7};
  std::array<double, 3> x0 = {5, 2, 2};
  double u_max = 10.0;
  double w_amplitude = 1.0;
  double w_frequency = 0.2;  // rad/s

  bool operator==(const LinearThirdOrder&) const = default;
};

/// Single-machine infinite-bus parameters; state is [delta, omega, E_q1].
struct SmibParams {
  double P_m0 = 0.9;
  double omega0 = 314.159;
  double T_d0 = 6.9;
  double D = 5.0;
  double H = 4.0;
  double V_s = 1.0;
  double x_d = 1.863;
  double x_d1 = 0.257;
  double x_ds = 2.2327;
  double x_ds1 = 0.6267;
  std::array<double, 3> K = {19.3, 6.43, -47.6};
  double delta0 = 1.309;
  double u_max = 2.3;
  std::array<double, 3> x0 = {1, 1, 1};
  double disturbance_amplitude = 0.01;

  bool operator==(const SmibParams&) const = default;
};

/// Throws Error(InvalidArgument) if the closed loop A + B K is not Hurwitz.
std::shared_ptr<const PlantModel> third_order_model(const LinearThirdOrder& params);

/// Throws Error(InvalidArgument) on reactance/inertia invariant violations.
/// nominal_control throws Error(DegenerateAngle) when |sin delta| < 1e-9.
std::shared_ptr<const PlantModel> smib_model(const SmibParams& params);

/// Algebraic SMIB quantities, recomputed from the state on every call.
namespace smib {
double quadrature_emf(const SmibParams& p, double delta, double e_q1);
double electrical_power(const SmibParams& p, double delta, double e_q1);
/// Transient EMF that makes P_e = P_m0 at delta.
double operating_point_emf(const SmibParams& p, double delta);
}  // namespace smib

}  // namespace resilex
