#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rain/error.hpp"

namespace rain::world {

// Planar pose with an optional fixed altitude (z is only meaningful for the
// 3D variant and is never changed by a step).
struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;  // wrapped to (-pi, pi]
};

struct ControlInput {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s

  bool operator==(const ControlInput&) const = default;
};

// Planned inputs over a horizon; length equals the planning horizon.
using ControlSequence = std::vector<ControlInput>;

struct SensorConfig {
  double r_sense = 10.0;  // m
  double psi = M_PI / 2;  // field of view, rad
  double sigma_r = 0.15;  // m
  double sigma_b = 0.087; // rad
};

struct BeamSensorConfig {
  int num_beams = 16;
  double z_min = 0.0;  // m
  double z_max = 1.5;  // m
  double sigma = 0.01; // m
};

// Wrap an angle into (-pi, pi].
double wrap_angle(double a);

// Unnormalized sinc: sin(x)/x with sinc(0) = 1.
double sinc(double x);

// One discrete step of the SE(2) unicycle. The translation uses the exact
// arc integral v*tau*sinc(omega*tau/2) rotated to the half-step heading.
RobotState unicycle_step(const RobotState& s, const ControlInput& u, double tau);

// 3D variant at fixed altitude: planar projection equals unicycle_step and
// z passes through unchanged.
RobotState unicycle3d_step(const RobotState& s, const ControlInput& u, double tau);

// Discrete double-integrator target model: returns the 4x4 transition F and
// the process-noise covariance W = q * [[tau^3/3 I2, tau^2/2 I2],
// [tau^2/2 I2, tau I2]].
struct DoubleIntegrator {
  Eigen::Matrix4d F;
  Eigen::Matrix4d W;
};
DoubleIntegrator double_integrator_model(double tau, double q);

// Landmark uncertainty growth after k steps without a visit: q*k*I3.
Eigen::Matrix3d landmark_noise(int k, double q);

struct RangeBearing {
  Eigen::Vector2d h;                   // [range, bearing]
  Eigen::Matrix<double, 2, 4> H;       // d h / d target-state (vel columns zero)
  Eigen::Matrix2d V;                   // measurement covariance
};

// Range-bearing observation of a planar target (position block of a 4-state
// target). Absent when the target is out of range or outside the field of
// view. The noise variances grow linearly in range up to sigma_r^2 and
// sigma_b^2, floored at 1e-6 to keep V invertible.
std::optional<RangeBearing> range_bearing_observe(const RobotState& s,
                                                  const Eigen::Vector2d& target,
                                                  const SensorConfig& cfg);

// Density of a beam measurement z given true obstacle distance d: Gaussian
// centered at 0 below z_min, at z_max beyond z_max, at d otherwise.
double beam_likelihood(double d, double z, const BeamSensorConfig& cfg);

struct RangeOnly {
  double h;                            // range
  Eigen::Matrix<double, 1, 3> H;       // unit direction
  double var;                          // fixed measurement variance
};

// 3D range-only observation; absent beyond r_sense.
std::optional<RangeOnly> range_only_observe(const RobotState& s,
                                            const Eigen::Vector3d& landmark,
                                            double r_sense,
                                            double sigma = 0.1);

}  // namespace rain::world
