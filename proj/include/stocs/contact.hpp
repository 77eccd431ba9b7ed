#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "stocs/geometry.hpp"

namespace stocs {

// One instantiated boundary point; id is the index into ObjectModel.boundary_points.
struct IndexPoint {
  int id = -1;
  Vec2 local{0.0, 0.0};
};

// Environment contact force in the contact frame, componentwise nonnegative:
// zn along the normal, zp/zm the two-sided tangential split.
struct ContactForce {
  double zn = 0.0;
  double zp = 0.0;
  double zm = 0.0;
};

enum class ModeKind { OnePointSlide, FixedPoints };

// A manipulator contact state. OnePointSlide: the manipulator pushes anywhere
// on one boundary face, location a decision variable. FixedPoints: rigid
// multi-point contact (grasp), admissible only near the listed orientations.
struct ManipulationMode {
  std::string name;
  ModeKind kind = ModeKind::OnePointSlide;
  Vec2 face_a{0.0, 0.0};
  Vec2 face_b{0.0, 0.0};
  std::vector<Vec2> points;
  std::vector<double> admissible_angles;

  // Control dimension: (location, normal force, tangential force) for a slide
  // face; (normal, tangential) per fixed point.
  int nu() const {
    return kind == ModeKind::OnePointSlide ? 3 : 2 * static_cast<int>(points.size());
  }
  int contact_count() const {
    return kind == ModeKind::OnePointSlide ? 1 : static_cast<int>(points.size());
  }
};

// Everything about one object point touching the environment at pose q that
// the constraint evaluators need: world position, rotated lever arms, the
// closest-feature frame, and the frame's dependence on the world point.
struct ContactKinematics {
  Vec2 world{0.0, 0.0};  // R(theta) * local + (x, y)
  Vec2 r{0.0, 0.0};      // R(theta) * local
  Vec2 rho{0.0, 0.0};    // R(theta) * (local - com), torque arm about the CoM
  DistanceResult feat;
  Eigen::Matrix2d dn_dw = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d dt_dw = Eigen::Matrix2d::Zero();
};

ContactKinematics contact_kinematics(const ObjectModel& obj, const EnvironmentModel& env,
                                     const Pose2& q, const Vec2& local);

struct GapValue {
  double g = 0.0;
  Eigen::RowVector3d dq = Eigen::RowVector3d::Zero();  // d/d(x, y, theta)
};

GapValue gap_value(const ContactKinematics& k);

struct TangentialVelocity {
  double v = 0.0;
  Eigen::RowVector3d dq = Eigen::RowVector3d::Zero();
  Eigen::RowVector3d dqd = Eigen::RowVector3d::Zero();  // d/d(vx, vy, omega)
};

TangentialVelocity tangential_velocity(const ContactKinematics& k, const Twist2& qd);

// Nonnegative split (max(v_t, 0), max(-v_t, 0)) of the tangential speed.
std::pair<double, double> tangential_velocity_pair(const ObjectModel& obj,
                                                   const EnvironmentModel& env, const Pose2& q,
                                                   const Twist2& qd, const Vec2& local);

// Friction cone residual mu*zn - zp - zm; admissible iff >= 0.
double friction_residual(double mu, const ContactForce& z);

// A wrench contribution (Fx, Fy, torque about the world CoM) with partials.
struct WrenchTerm {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  Eigen::Matrix3d dq = Eigen::Matrix3d::Zero();  // columns d/dx, d/dy, d/dtheta
  Eigen::Matrix3d dz = Eigen::Matrix3d::Zero();  // columns d/dzn, d/dzp, d/dzm
  Eigen::Matrix<double, 3, Eigen::Dynamic> du;   // 3 x nu (manipulator terms)
};

WrenchTerm env_contact_wrench(const ContactKinematics& k, double zn, double zp, double zm);

// Manipulator wrench for the mode at control u (layout per ManipulationMode::nu).
// Push-only sign convention: the normal component un >= 0 acts into the face.
WrenchTerm manip_wrench(const ObjectModel& obj, const ManipulationMode& mode, const Pose2& q,
                        const double* u);

Eigen::Vector3d gravity_wrench(const ObjectModel& obj, double gravity);

// Net quasi-static wrench: gravity + manipulator + environment contacts.
// Zero at equilibrium. mode may be null (no manipulator).
Eigen::Vector3d wrench_balance(const ObjectModel& obj, const EnvironmentModel& env,
                               const Pose2& q, const ManipulationMode* mode, const double* u,
                               const std::vector<std::pair<IndexPoint, ContactForce>>& contacts,
                               double gravity);

}  // namespace stocs
