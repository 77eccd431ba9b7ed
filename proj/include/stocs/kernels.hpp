#pragma once

#include <cstdint>
#include <vector>

#include "stocs/geometry.hpp"

namespace stocs::kernels {

// Environment flattened to structure-of-arrays edge lists for batch scans.
struct EnvData {
  std::vector<double> ax, ay;  // edge start vertex
  std::vector<double> ex, ey;  // unit edge direction
  std::vector<double> nx, ny;  // outward unit normal
  std::vector<double> len;
  std::vector<int> region_first;  // size nregions+1, edge range per region
  int nregions = 0;

  int nedges() const { return static_cast<int>(ax.size()); }
  static EnvData build(const EnvironmentModel& env);
};

// Object boundary points as SoA.
struct PointsSoA {
  std::vector<double> x, y;
  int size() const { return static_cast<int>(x.size()); }
  static PointsSoA build(const std::vector<Vec2>& pts);
};

struct ScanResult {
  double min_gap;
  int argmin;  // lowest index attaining min_gap
};

// Signed distance of every transformed point R(c,s)*p + t to the environment.
// out_gaps may be null; the min/argmin (ties -> lowest index) is always returned.
ScanResult scan_gaps_scalar(const EnvData& env, const double* px, const double* py, int n,
                            double c, double s, double tx, double ty, double* out_gaps);

// Falls back to the scalar kernel in builds without AVX2 support; check
// avx2_available() to know whether the vector path is really in play.
ScanResult scan_gaps_avx2(const EnvData& env, const double* px, const double* py, int n,
                          double c, double s, double tx, double ty, double* out_gaps);

// Compiled in and supported by the running CPU.
bool avx2_available();

enum class Kind { Auto, Scalar, Avx2 };

// Select the active kernel (Auto re-probes the CPU). Returns the kind in effect.
Kind select(Kind k);
Kind active();
const char* kind_name(Kind k);

// Dispatch through the active kernel.
ScanResult scan_gaps(const EnvData& env, const PointsSoA& pts, const Pose2& pose,
                     double* out_gaps = nullptr);

}  // namespace stocs::kernels
