#include <limits>

#include "kernel_point.hpp"
#include "stocs/kernels.hpp"

namespace stocs::kernels {

EnvData EnvData::build(const EnvironmentModel& env) {
  EnvData d;
  d.nregions = static_cast<int>(env.regions.size());
  d.region_first.push_back(0);
  for (const ConvexRegion& reg : env.regions) {
    for (int i = 0; i < static_cast<int>(reg.verts.size()); ++i) {
      d.ax.push_back(reg.verts[i].x());
      d.ay.push_back(reg.verts[i].y());
      d.ex.push_back(reg.edge_dir[i].x());
      d.ey.push_back(reg.edge_dir[i].y());
      d.nx.push_back(reg.edge_normal[i].x());
      d.ny.push_back(reg.edge_normal[i].y());
      d.len.push_back(reg.edge_len[i]);
    }
    d.region_first.push_back(d.nedges());
  }
  return d;
}

PointsSoA PointsSoA::build(const std::vector<Vec2>& pts) {
  PointsSoA p;
  p.x.reserve(pts.size());
  p.y.reserve(pts.size());
  for (const Vec2& v : pts) {
    p.x.push_back(v.x());
    p.y.push_back(v.y());
  }
  return p;
}

ScanResult scan_gaps_scalar(const EnvData& env, const double* px, const double* py, int n,
                            double c, double s, double tx, double ty, double* out_gaps) {
  ScanResult r{std::numeric_limits<double>::infinity(), -1};
  for (int i = 0; i < n; ++i) {
    const double wx = detail::transform_x(c, s, px[i], py[i], tx);
    const double wy = detail::transform_y(c, s, px[i], py[i], ty);
    const double g = detail::point_gap(env, wx, wy);
    if (out_gaps) out_gaps[i] = g;
    if (g < r.min_gap) {
      r.min_gap = g;
      r.argmin = i;
    }
  }
  return r;
}

}  // namespace stocs::kernels
