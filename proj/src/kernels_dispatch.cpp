#include <cmath>

#include "stocs/kernels.hpp"

namespace stocs::kernels {

#if !defined(STOCS_HAVE_AVX2)
ScanResult scan_gaps_avx2(const EnvData& env, const double* px, const double* py, int n,
                          double c, double s, double tx, double ty, double* out_gaps) {
  return scan_gaps_scalar(env, px, py, n, c, s, tx, ty, out_gaps);
}
#endif

bool avx2_available() {
#if defined(STOCS_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {
Kind probe() { return avx2_available() ? Kind::Avx2 : Kind::Scalar; }
Kind& active_kind() {
  static Kind k = probe();
  return k;
}
}  // namespace

Kind select(Kind k) {
  Kind chosen = k;
  if (k == Kind::Auto) chosen = probe();
  if (chosen == Kind::Avx2 && !avx2_available()) chosen = Kind::Scalar;
  active_kind() = chosen;
  return chosen;
}

Kind active() { return active_kind(); }

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Auto: return "auto";
    case Kind::Scalar: return "scalar";
    case Kind::Avx2: return "avx2";
  }
  return "?";
}

ScanResult scan_gaps(const EnvData& env, const PointsSoA& pts, const Pose2& pose,
                     double* out_gaps) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  if (active_kind() == Kind::Avx2)
    return scan_gaps_avx2(env, pts.x.data(), pts.y.data(), pts.size(), c, s, pose.x, pose.y,
                          out_gaps);
  return scan_gaps_scalar(env, pts.x.data(), pts.y.data(), pts.size(), c, s, pose.x, pose.y,
                          out_gaps);
}

}  // namespace stocs::kernels
