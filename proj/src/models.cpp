#include "resilex/models.hpp"

#include <cmath>
#include <numbers>

#include "resilex/error.hpp"

namespace resilex {
namespace {

class ThirdOrderPlant final : public PlantModel {
 public:
  explicit ThirdOrderPlant(const LinearThirdOrder& p) : params_(p) {
    A_ = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(p.A.data());
    B_ = Eigen::Map<const Eigen::Vector3d>(p.B.data());
    K_ = Eigen::Map<const Eigen::RowVector3d>(p.K.data());
  }

  std::string_view name() const override { return "third_order"; }
  int state_dim() const override { return 3; }

  State derivative(const State& x, double u, double w, double /*t*/) const override {
    State dx = A_ * x + B_ * u;
    dx(1) += std::sin(0.1 * x(0)) * w;
    return dx;
  }

  double disturbance(double t) const override {
    return params_.w_amplitude * std::sin(params_.w_frequency * t);
  }

  double u_max() const override { return params_.u_max; }
  double nominal_control(const State& x) const override { return K_.dot(x); }
  State equilibrium() const override { return State::Zero(3); }
  State initial_state() const override { return Eigen::Map<const Eigen::Vector3d>(params_.x0.data()); }

  std::optional<LinearStructure> linear_structure() const override {
    return LinearStructure{A_, B_, K_, Eigen::Vector3d::UnitY(), std::abs(params_.w_amplitude)};
  }

 private:
  LinearThirdOrder params_;
  Eigen::Matrix3d A_;
  Eigen::Vector3d B_;
  Eigen::RowVector3d K_;
};

class SmibPlant final : public PlantModel {
 public:
  explicit SmibPlant(const SmibParams& p) : p_(p) {}

  std::string_view name() const override { return "smib"; }
  int state_dim() const override { return 3; }

  State derivative(const State& x, double u, double w, double /*t*/) const override {
    const double delta = x(0);
    const double omega = x(1);
    const double e_q1 = x(2);
    const double e_q = smib::quadrature_emf(p_, delta, e_q1);
    const double p_e = p_.V_s * e_q * std::sin(delta) / p_.x_ds;
    State dx(3);
    dx(0) = omega;
    dx(1) = (-p_.D * omega + p_.omega0 * (p_.P_m0 - p_e)) / (2.0 * p_.H);
    dx(2) = (u - e_q - w) / p_.T_d0;
    return dx;
  }

  double disturbance(double t) const override {
    return p_.disturbance_amplitude * std::cos(std::numbers::pi * t / 2.0);
  }

  double u_max() const override { return p_.u_max; }

  double nominal_control(const State& x) const override {
    const double delta = x(0);
    const double omega = x(1);
    const double s = std::sin(delta);
    if (std::abs(s) < 1e-9) {
      throw Error(Errc::DegenerateAngle, "sin(delta) vanishes in the feedback-linearising law");
    }
    const double c = std::cos(delta);
    const double e_q = smib::quadrature_emf(p_, delta, x(2));
    const double p_e = p_.V_s * e_q * s / p_.x_ds;
    const double i_q = p_.V_s * s / p_.x_ds;
    const double t_d01 = p_.x_ds1 / p_.x_ds * p_.T_d0;
    const double v_f =
        p_.K[0] * (delta - p_.delta0) + p_.K[1] * omega + p_.K[2] * (p_e - p_.P_m0) + p_.P_m0;
    return (v_f - (p_.x_d - p_.x_d1) / p_.x_ds1 * t_d01 * i_q * p_.V_s * omega * s -
            p_.V_s * t_d01 / p_.x_ds * e_q * omega * c) /
           i_q;
  }

  State equilibrium() const override {
    State x(3);
    x << p_.delta0, 0.0, smib::operating_point_emf(p_, p_.delta0);
    return x;
  }

  State initial_state() const override { return Eigen::Map<const Eigen::Vector3d>(p_.x0.data()); }

 private:
  SmibParams p_;
};

}  // namespace

std::shared_ptr<const PlantModel> third_order_model(const LinearThirdOrder& params) {
  const auto plant = std::make_shared<ThirdOrderPlant>(params);
  const auto lin = *plant->linear_structure();
  const Eigen::MatrixXd closed = lin.A + lin.B * lin.K;
  const Eigen::VectorXcd poles = closed.eigenvalues();
  for (Eigen::Index i = 0; i < poles.size(); ++i) {
    if (!(poles(i).real() < 0.0)) {
      throw Error(Errc::InvalidArgument, "third-order closed loop A + B K is not Hurwitz");
    }
  }
  if (!(params.u_max > 0.0)) throw Error(Errc::InvalidArgument, "u_max must be positive");
  return plant;
}

std::shared_ptr<const PlantModel> smib_model(const SmibParams& p) {
  if (!(p.x_ds > p.x_ds1 && p.x_ds1 > 0.0)) {
    throw Error(Errc::InvalidArgument, "SMIB reactances require x_ds > x_ds1 > 0");
  }
  if (!(p.H > 0.0) || !(p.T_d0 > 0.0)) {
    throw Error(Errc::InvalidArgument, "SMIB requires H > 0 and T_d0 > 0");
  }
  if (!(p.u_max > 0.0)) throw Error(Errc::InvalidArgument, "u_max must be positive");
  return std::make_shared<SmibPlant>(p);
}

namespace smib {

double quadrature_emf(const SmibParams& p, double delta, double e_q1) {
  return p.x_ds / p.x_ds1 * e_q1 - (p.x_d - p.x_d1) / p.x_ds1 * p.V_s * std::cos(delta);
}

double electrical_power(const SmibParams& p, double delta, double e_q1) {
  return p.V_s * quadrature_emf(p, delta, e_q1) * std::sin(delta) / p.x_ds;
}

double operating_point_emf(const SmibParams& p, double delta) {
  const double e_q = p.P_m0 * p.x_ds / (p.V_s * std::sin(delta));
  return (e_q + (p.x_d - p.x_d1) / p.x_ds1 * p.V_s * std::cos(delta)) * p.x_ds1 / p.x_ds;
}

}  // namespace smib
}  // namespace resilex
