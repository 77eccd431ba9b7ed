#include "stocs/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stocs {

namespace {

std::string f6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct Mapper {
  double min_x = 0.0, max_y = 0.0, scale = 1.0, pad = 20.0;
  double width = 0.0, height = 0.0;

  double sx(double x) const { return pad + (x - min_x) * scale; }
  double sy(double y) const { return pad + (max_y - y) * scale; }
};

Mapper fit(double min_x, double min_y, double max_x, double max_y, double width_px) {
  Mapper m;
  const double margin = 0.05 * std::max({max_x - min_x, max_y - min_y, 1e-3});
  m.min_x = min_x - margin;
  m.max_y = max_y + margin;
  const double dx = (max_x + margin) - m.min_x;
  const double dy = m.max_y - (min_y - margin);
  m.scale = (width_px - 2.0 * m.pad) / std::max(dx, 1e-9);
  m.width = width_px;
  m.height = dy * m.scale + 2.0 * m.pad;
  return m;
}

void grow(double& min_x, double& min_y, double& max_x, double& max_y, const Vec2& p) {
  min_x = std::min(min_x, p.x());
  min_y = std::min(min_y, p.y());
  max_x = std::max(max_x, p.x());
  max_y = std::max(max_y, p.y());
}

std::string polygon_path(const Mapper& m, const std::vector<Vec2>& pts) {
  std::string d;
  for (size_t i = 0; i < pts.size(); ++i) {
    d += (i == 0 ? "M" : "L");
    d += f6(m.sx(pts[i].x()));
    d += ",";
    d += f6(m.sy(pts[i].y()));
  }
  d += "Z";
  return d;
}

std::vector<Vec2> object_outline(const Scenario& scn, const Pose2& q) {
  std::vector<Vec2> out;
  out.reserve(scn.object.boundary_points.size());
  for (const Vec2& p : scn.object.boundary_points) out.push_back(transform_point(q, p));
  return out;
}

void emit_env(std::ostringstream& o, const Mapper& m, const Scenario& scn) {
  for (const ConvexRegion& r : scn.environment.regions) {
    o << "<path d=\"" << polygon_path(m, r.verts)
      << "\" fill=\"#d9d4cc\" stroke=\"#6b675f\" stroke-width=\"1\"/>\n";
  }
}

void emit_arrow(std::ostringstream& o, const Mapper& m, const Vec2& from, const Vec2& vec,
                const char* color) {
  const Vec2 to = from + vec;
  const double x0 = m.sx(from.x()), y0 = m.sy(from.y());
  const double x1 = m.sx(to.x()), y1 = m.sy(to.y());
  o << "<line x1=\"" << f6(x0) << "\" y1=\"" << f6(y0) << "\" x2=\"" << f6(x1) << "\" y2=\""
    << f6(y1) << "\" stroke=\"" << color << "\" stroke-width=\"1.2\"/>\n";
  // small head
  const double hx = x1 - x0, hy = y1 - y0;
  const double len = std::sqrt(hx * hx + hy * hy);
  if (len > 1e-9) {
    const double ux = hx / len, uy = hy / len;
    const double s = 4.0;
    o << "<path d=\"M" << f6(x1) << "," << f6(y1) << "L" << f6(x1 - s * ux + 0.5 * s * uy) << ","
      << f6(y1 - s * uy - 0.5 * s * ux) << "L" << f6(x1 - s * ux - 0.5 * s * uy) << ","
      << f6(y1 - s * uy + 0.5 * s * ux) << "Z\" fill=\"" << color << "\"/>\n";
  }
}

}  // namespace

std::string render_trajectory_svg(const Scenario& scn, const std::vector<TrajectoryState>& traj,
                                  const IndexSet& index_set) {
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  for (const ConvexRegion& r : scn.environment.regions)
    for (const Vec2& v : r.verts) grow(min_x, min_y, max_x, max_y, v);
  for (const TrajectoryState& s : traj)
    for (const Vec2& w : object_outline(scn, s.q)) grow(min_x, min_y, max_x, max_y, w);
  if (traj.empty()) {
    min_x = std::min(min_x, -1.0);
    min_y = std::min(min_y, -1.0);
    max_x = std::max(max_x, 1.0);
    max_y = std::max(max_y, 1.0);
  }
  const Mapper m = fit(min_x, min_y, max_x, max_y, 800.0);

  // force arrow scaling from the largest environment force on the trajectory
  double fmax = 0.0;
  for (const TrajectoryState& s : traj)
    for (const ContactForce& f : s.forces)
      fmax = std::max(fmax, std::sqrt(f.zn * f.zn + (f.zp - f.zm) * (f.zp - f.zm)));
  const double extent = std::max(max_x - min_x, max_y - min_y);
  const double fscale = fmax > 1e-9 ? 0.2 * extent / fmax : 0.0;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f6(m.width) << "\" height=\""
    << f6(m.height) << "\" viewBox=\"0 0 " << f6(m.width) << ' ' << f6(m.height) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  emit_env(o, m, scn);

  const size_t n = traj.size();
  for (size_t t = 0; t < n; ++t) {
    const double a = n > 1 ? 0.2 + 0.8 * static_cast<double>(t) / (n - 1) : 1.0;
    o << "<path d=\"" << polygon_path(m, object_outline(scn, traj[t].q))
      << "\" fill=\"none\" stroke=\"#2563a8\" stroke-width=\"1\" opacity=\"" << f6(a)
      << "\"/>\n";
  }
  if (fscale > 0.0) {
    for (size_t t = 0; t + 1 < n; ++t) {
      const TrajectoryState& s = traj[t];
      for (size_t j = 0; j < s.forces.size() && j < index_set.points.size(); ++j) {
        const ContactForce& f = s.forces[j];
        if (f.zn + f.zp + f.zm <= 1e-6) continue;
        const Vec2 w = transform_point(s.q, index_set.points[j].local);
        const DistanceResult d = signed_distance(scn.environment, w);
        const Vec2 force = f.zn * d.normal + (f.zp - f.zm) * d.tangent;
        emit_arrow(o, m, w, fscale * force, "#c23b22");
      }
    }
  }
  // start and goal-most poses emphasized
  if (!traj.empty()) {
    o << "<path d=\"" << polygon_path(m, object_outline(scn, traj.front().q))
      << "\" fill=\"none\" stroke=\"#3f8f3f\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"/>\n";
    o << "<path d=\"" << polygon_path(m, object_outline(scn, traj.back().q))
      << "\" fill=\"none\" stroke=\"#1d3f73\" stroke-width=\"1.5\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string render_tree_svg(const Scenario& scn, const PlannerResult& result) {
  static const char* kPalette[8] = {"#2563a8", "#c23b22", "#3f8f3f", "#8a5fb0",
                                    "#b8860b", "#2a9d8f", "#c05780", "#5f6f52"};
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  for (const ConvexRegion& r : scn.environment.regions)
    for (const Vec2& v : r.verts) grow(min_x, min_y, max_x, max_y, v);
  for (const TreeNode& nd : result.nodes)
    grow(min_x, min_y, max_x, max_y, Vec2(nd.q.x, nd.q.y));
  if (result.nodes.empty()) {
    min_x = -1.0;
    min_y = -1.0;
    max_x = 1.0;
    max_y = 1.0;
  }
  const Mapper m = fit(min_x, min_y, max_x, max_y, 800.0);

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f6(m.width) << "\" height=\""
    << f6(m.height) << "\" viewBox=\"0 0 " << f6(m.width) << ' ' << f6(m.height) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  emit_env(o, m, scn);

  auto edge_points = [&](const TreeNode& nd) {
    std::string pts;
    for (const TrajectoryState& s : nd.incoming.trajectory) {
      if (!pts.empty()) pts += " ";
      pts += f6(m.sx(s.q.x)) + "," + f6(m.sy(s.q.y));
    }
    return pts;
  };
  for (const TreeNode& nd : result.nodes) {
    if (nd.parent < 0) continue;
    const char* color = kPalette[nd.mode_index >= 0 ? nd.mode_index % 8 : 0];
    o << "<polyline points=\"" << edge_points(nd) << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1\" opacity=\"0.7\"/>\n";
  }
  for (int id : result.path) {
    const TreeNode& nd = result.nodes[static_cast<size_t>(id)];
    if (nd.parent < 0) continue;
    o << "<polyline points=\"" << edge_points(nd)
      << "\" fill=\"none\" stroke=\"#111111\" stroke-width=\"2.5\"/>\n";
  }
  for (const TreeNode& nd : result.nodes) {
    const char* fill = nd.parent < 0 ? "#3f8f3f" : "#c23b22";
    o << "<circle cx=\"" << f6(m.sx(nd.q.x)) << "\" cy=\"" << f6(m.sy(nd.q.y))
      << "\" r=\"3\" fill=\"" << fill << "\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace stocs
