#include "rain/world.hpp"

#include <cmath>

namespace rain::world {

double wrap_angle(double a) {
  double y = std::fmod(a + M_PI, 2.0 * M_PI);
  if (y <= 0.0) y += 2.0 * M_PI;
  return y - M_PI;
}

double sinc(double x) {
  if (std::abs(x) < 1e-7) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

RobotState unicycle_step(const RobotState& s, const ControlInput& u, double tau) {
  const double half = u.omega * tau / 2.0;
  const double arc = u.v * tau * sinc(half);
  RobotState out = s;
  out.x = s.x + arc * std::cos(s.theta + half);
  out.y = s.y + arc * std::sin(s.theta + half);
  out.theta = wrap_angle(s.theta + tau * u.omega);
  return out;
}

RobotState unicycle3d_step(const RobotState& s, const ControlInput& u, double tau) {
  RobotState out = unicycle_step(s, u, tau);
  out.z = s.z;
  return out;
}

DoubleIntegrator double_integrator_model(double tau, double q) {
  DoubleIntegrator m;
  m.F = Eigen::Matrix4d::Identity();
  m.F(0, 2) = tau;
  m.F(1, 3) = tau;
  const Eigen::Matrix2d I2 = Eigen::Matrix2d::Identity();
  m.W.setZero();
  m.W.block<2, 2>(0, 0) = q * tau * tau * tau / 3.0 * I2;
  m.W.block<2, 2>(0, 2) = q * tau * tau / 2.0 * I2;
  m.W.block<2, 2>(2, 0) = q * tau * tau / 2.0 * I2;
  m.W.block<2, 2>(2, 2) = q * tau * I2;
  return m;
}

Eigen::Matrix3d landmark_noise(int k, double q) {
  return q * static_cast<double>(k) * Eigen::Matrix3d::Identity();
}

std::optional<RangeBearing> range_bearing_observe(const RobotState& s,
                                                  const Eigen::Vector2d& target,
                                                  const SensorConfig& cfg) {
  const double dx = target.x() - s.x;
  const double dy = target.y() - s.y;
  const double r = std::hypot(dx, dy);
  if (r < 1e-9) throw_error(ErrorCode::TargetAtSensor, "range below 1e-9");

  const double bearing = wrap_angle(std::atan2(dy, dx) - s.theta);
  if (r > cfg.r_sense || std::abs(bearing) > cfg.psi / 2.0) return std::nullopt;

  RangeBearing rb;
  rb.h << r, bearing;
  const double phi = s.theta + bearing;  // global angle to the target
  rb.H.setZero();
  rb.H(0, 0) = dx / r;
  rb.H(0, 1) = dy / r;
  rb.H(1, 0) = -std::sin(phi) / r;
  rb.H(1, 1) = std::cos(phi) / r;

  const double growth = std::min(r / cfg.r_sense, 1.0);
  rb.V.setZero();
  rb.V(0, 0) = std::max(cfg.sigma_r * cfg.sigma_r * growth, 1e-6);
  rb.V(1, 1) = std::max(cfg.sigma_b * cfg.sigma_b * growth, 1e-6);
  return rb;
}

double beam_likelihood(double d, double z, const BeamSensorConfig& cfg) {
  double center = d;
  if (d < cfg.z_min) {
    center = 0.0;
  } else if (d > cfg.z_max) {
    center = cfg.z_max;
  }
  const double u = (z - center) / cfg.sigma;
  return std::exp(-0.5 * u * u) / (cfg.sigma * std::sqrt(2.0 * M_PI));
}

std::optional<RangeOnly> range_only_observe(const RobotState& s,
                                            const Eigen::Vector3d& landmark,
                                            double r_sense, double sigma) {
  const Eigen::Vector3d d = landmark - Eigen::Vector3d(s.x, s.y, s.z);
  const double r = d.norm();
  if (r < 1e-9) throw_error(ErrorCode::TargetAtSensor, "range below 1e-9");
  if (r > r_sense) return std::nullopt;

  RangeOnly ro;
  ro.h = r;
  ro.H = (d / r).transpose();
  ro.var = sigma * sigma;
  return ro;
}

}  // namespace rain::world
