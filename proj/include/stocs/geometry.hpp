#pragma once

#include <Eigen/Core>
#include <vector>

namespace stocs {

using Vec2 = Eigen::Vector2d;

// Wrap an angle into [-pi, pi).
double wrap_angle(double a);

// 90 degree counter-clockwise rotation of v: (-vy, vx).
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

// 2D cross product a x b.
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Planar rigid-body pose; theta is always stored normalized to [-pi, pi).
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(wrap_angle(theta_)) {}

  Vec2 translation() const { return Vec2(x, y); }
};

Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& p);

Vec2 rotate(double theta, const Vec2& p);
Vec2 transform_point(const Pose2& pose, const Vec2& p);

// Generalized planar velocity (world-frame linear part + angular rate).
struct Twist2 {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
};

// World velocity of the material point p (object frame) under (pose, twist).
Vec2 point_velocity(const Pose2& pose, const Twist2& twist, const Vec2& p);

// Rigid object: discrete boundary point set (the index domain Y), CCW polygon order.
struct ObjectModel {
  std::vector<Vec2> boundary_points;
  Vec2 com{0.0, 0.0};
  double mass = 1.0;
  double mu_env = 0.0;
  double mu_mnp = 0.0;

  // Outward unit normal of the boundary segment nearest to the object-frame
  // point p (segments connect consecutive boundary points).
  Vec2 boundary_normal_at(const Vec2& p) const;
};

// One solid convex obstacle, CCW vertex order. finalize() precomputes edge frames.
struct ConvexRegion {
  std::vector<Vec2> verts;
  std::vector<Vec2> edge_dir;     // unit, v[i] -> v[i+1]
  std::vector<Vec2> edge_normal;  // outward unit
  std::vector<double> edge_len;

  void finalize();
  double area() const;
};

struct EnvironmentModel {
  std::vector<ConvexRegion> regions;
  // y coordinate of the designated flat support surface (stable-pose queries).
  double ground_height = 0.0;
};

// Closest-feature query result. distance > 0 outside, < 0 inside; normal points
// out of the nearest region surface; tangent = normal rotated by -pi/2.
struct DistanceResult {
  double distance = 0.0;
  Vec2 normal{0.0, 1.0};
  Vec2 tangent{1.0, 0.0};
  Vec2 closest{0.0, 0.0};
  int region = -1;
  int edge = -1;
  bool vertex_feature = false;  // closest feature is a polygon vertex (query outside)
  Vec2 vertex{0.0, 0.0};
};

DistanceResult signed_distance(const EnvironmentModel& env, const Vec2& p);

// d(normal)/d(query point). Zero on edge features; (I - n n^T)/distance on
// outside vertex features (the deterministic subgradient choice used everywhere).
Eigen::Matrix2d normal_jacobian(const DistanceResult& r);

// A flat-ground resting orientation together with the pose height that puts the
// supporting hull edge exactly on the support surface.
struct StablePose {
  double theta;
  double height;  // pose y such that (x, height, theta) rests on the ground
};

// Every orientation at which the object is in static equilibrium flat on the
// support surface: the CoM projects strictly inside the supporting hull edge.
// Empty result is reported (not fatal) by returning an empty vector.
std::vector<StablePose> stable_poses(const ObjectModel& obj, const EnvironmentModel& env);

}  // namespace stocs
