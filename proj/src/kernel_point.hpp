#pragma once

#include <cmath>

#include "stocs/kernels.hpp"

namespace stocs::kernels::detail {

// Selection helpers with the exact semantics of _mm256_min_pd/_mm256_max_pd:
// the second operand wins ties. The scalar and AVX2 kernels promise bit-equal
// results, so every select and every fma below must keep this operand order.
inline double min_sel(double a, double b) { return a < b ? a : b; }
inline double max_sel(double a, double b) { return a > b ? a : b; }

// Signed distance of the world point (wx, wy) to the union of solid regions.
inline double point_gap(const EnvData& env, double wx, double wy) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < env.nregions; ++r) {
    double max_plane = -std::numeric_limits<double>::infinity();
    double seg_min = std::numeric_limits<double>::infinity();
    for (int i = env.region_first[r]; i < env.region_first[r + 1]; ++i) {
      const double relx = wx - env.ax[i];
      const double rely = wy - env.ay[i];
      const double plane = std::fma(env.nx[i], relx, env.ny[i] * rely);
      max_plane = max_sel(max_plane, plane);
      double t = std::fma(env.ex[i], relx, env.ey[i] * rely);
      t = min_sel(max_sel(t, 0.0), env.len[i]);
      const double dx = relx - t * env.ex[i];
      const double dy = rely - t * env.ey[i];
      const double seg = std::sqrt(std::fma(dx, dx, dy * dy));
      seg_min = min_sel(seg_min, seg);
    }
    const double sd = max_plane <= 0.0 ? max_plane : seg_min;
    best = min_sel(best, sd);
  }
  return best;
}

inline double transform_x(double c, double s, double px, double py, double tx) {
  return std::fma(c, px, std::fma(-s, py, tx));
}

inline double transform_y(double c, double s, double px, double py, double ty) {
  return std::fma(s, px, std::fma(c, py, ty));
}

}  // namespace stocs::kernels::detail
