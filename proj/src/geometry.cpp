#include "stocs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stocs {

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);  // (-pi, pi]
  if (w >= M_PI) w -= 2.0 * M_PI;
  return w == -0.0 ? 0.0 : w;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const Vec2 t = transform_point(a, Vec2(b.x, b.y));
  return Pose2(t.x(), t.y(), a.theta + b.theta);
}

Pose2 inverse(const Pose2& p) {
  const Vec2 t = rotate(-p.theta, Vec2(-p.x, -p.y));
  return Pose2(t.x(), t.y(), -p.theta);
}

Vec2 rotate(double theta, const Vec2& p) {
  const double c = std::cos(theta), s = std::sin(theta);
  return Vec2(c * p.x() - s * p.y(), s * p.x() + c * p.y());
}

Vec2 transform_point(const Pose2& pose, const Vec2& p) {
  return rotate(pose.theta, p) + Vec2(pose.x, pose.y);
}

Vec2 point_velocity(const Pose2& pose, const Twist2& twist, const Vec2& p) {
  const Vec2 r = rotate(pose.theta, p);
  return Vec2(twist.vx, twist.vy) + twist.omega * perp(r);
}

Vec2 ObjectModel::boundary_normal_at(const Vec2& p) const {
  const int n = static_cast<int>(boundary_points.size());
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_normal(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const Vec2& a = boundary_points[i];
    const Vec2& b = boundary_points[(i + 1) % n];
    const Vec2 e = b - a;
    const double len2 = e.squaredNorm();
    if (len2 <= 0.0) continue;
    const double t = std::clamp((p - a).dot(e) / len2, 0.0, 1.0);
    const double d2 = (p - (a + t * e)).squaredNorm();
    if (d2 < best) {
      best = d2;
      best_normal = Vec2(e.y(), -e.x()).normalized();  // outward for CCW order
    }
  }
  return best_normal;
}

void ConvexRegion::finalize() {
  const int n = static_cast<int>(verts.size());
  edge_dir.resize(n);
  edge_normal.resize(n);
  edge_len.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 d = verts[(i + 1) % n] - verts[i];
    edge_len[i] = d.norm();
    edge_dir[i] = d / edge_len[i];
    edge_normal[i] = Vec2(edge_dir[i].y(), -edge_dir[i].x());  // outward for CCW
  }
}

double ConvexRegion::area() const {
  double a = 0.0;
  const int n = static_cast<int>(verts.size());
  for (int i = 0; i < n; ++i) a += cross2(verts[i], verts[(i + 1) % n]);
  return 0.5 * a;
}

namespace {

// Signed distance of p to one convex region. Inside: the largest (least
// negative) plane distance identifies the nearest edge. Outside: nearest point
// on the edge segments, ties broken by lower edge index.
DistanceResult region_distance(const ConvexRegion& reg, int region_index, const Vec2& p) {
  const int n = static_cast<int>(reg.verts.size());
  double max_plane = -std::numeric_limits<double>::infinity();
  int max_plane_edge = -1;
  double best_out = std::numeric_limits<double>::infinity();
  int best_edge = -1;
  double best_t = 0.0;
  bool inside = true;

  for (int i = 0; i < n; ++i) {
    const Vec2 rel = p - reg.verts[i];
    const double d = reg.edge_normal[i].dot(rel);
    if (d > max_plane) {
      max_plane = d;
      max_plane_edge = i;
    }
    if (d > 0.0) inside = false;
    const double t = std::clamp(rel.dot(reg.edge_dir[i]), 0.0, reg.edge_len[i]);
    const double seg = (p - (reg.verts[i] + t * reg.edge_dir[i])).norm();
    if (seg < best_out) {
      best_out = seg;
      best_edge = i;
      best_t = t;
    }
  }

  DistanceResult r;
  r.region = region_index;
  if (inside) {
    r.distance = max_plane;  // <= 0
    r.edge = max_plane_edge;
    r.normal = reg.edge_normal[max_plane_edge];
    r.closest = p - max_plane * r.normal;
  } else {
    r.distance = best_out;
    r.edge = best_edge;
    r.closest = reg.verts[best_edge] + best_t * reg.edge_dir[best_edge];
    const bool at_vertex = best_t <= 0.0 || best_t >= reg.edge_len[best_edge];
    if (at_vertex && best_out > 0.0) {
      r.vertex_feature = true;
      r.vertex = r.closest;
      r.normal = (p - r.closest) / best_out;
    } else {
      r.normal = reg.edge_normal[best_edge];
    }
  }
  r.tangent = Vec2(r.normal.y(), -r.normal.x());
  return r;
}

}  // namespace

DistanceResult signed_distance(const EnvironmentModel& env, const Vec2& p) {
  DistanceResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(env.regions.size()); ++i) {
    DistanceResult r = region_distance(env.regions[i], i, p);
    if (r.distance < best.distance) best = r;
  }
  return best;
}

Eigen::Matrix2d normal_jacobian(const DistanceResult& r) {
  if (!r.vertex_feature || r.distance <= 0.0) return Eigen::Matrix2d::Zero();
  return (Eigen::Matrix2d::Identity() - r.normal * r.normal.transpose()) / r.distance;
}

std::vector<StablePose> stable_poses(const ObjectModel& obj, const EnvironmentModel& env) {
  // Convex hull of the boundary points (Andrew monotone chain, CCW).
  std::vector<Vec2> pts = obj.boundary_points;
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());
  auto half = [&](auto begin, auto end, std::vector<Vec2>& out) {
    for (auto it = begin; it != end; ++it) {
      while (out.size() >= 2 &&
             cross2(out[out.size() - 1] - out[out.size() - 2], *it - out[out.size() - 2]) <= 1e-15)
        out.pop_back();
      out.push_back(*it);
    }
  };
  std::vector<Vec2> lower, upper;
  half(pts.begin(), pts.end(), lower);
  half(pts.rbegin(), pts.rend(), upper);
  lower.pop_back();
  upper.pop_back();
  std::vector<Vec2> hull = lower;
  hull.insert(hull.end(), upper.begin(), upper.end());

  std::vector<StablePose> out;
  const int h = static_cast<int>(hull.size());
  if (h < 2) return out;
  for (int i = 0; i < h; ++i) {
    const Vec2 a = hull[i];
    const Vec2 b = hull[(i + 1) % h];
    const Vec2 e = b - a;
    const double len = e.norm();
    if (len <= 1e-12) continue;
    // Rotate so this hull edge's outward normal points straight down.
    const Vec2 n(e.y() / len, -e.x() / len);
    const double theta = wrap_angle(-M_PI / 2.0 - std::atan2(n.y(), n.x()));
    const Vec2 ra = rotate(theta, a), rb = rotate(theta, b);
    const Vec2 rc = rotate(theta, obj.com);
    const double lo = std::min(ra.x(), rb.x());
    const double hi = std::max(ra.x(), rb.x());
    if (rc.x() <= lo || rc.x() >= hi) continue;  // CoM must project strictly inside
    double min_y = std::numeric_limits<double>::infinity();
    for (const Vec2& p : obj.boundary_points) min_y = std::min(min_y, rotate(theta, p).y());
    out.push_back({theta, env.ground_height - min_y});
  }
  std::sort(out.begin(), out.end(),
            [](const StablePose& a, const StablePose& b) { return a.theta < b.theta; });
  return out;
}

}  // namespace stocs
