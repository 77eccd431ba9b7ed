#include <immintrin.h>

#include <limits>

#include "kernel_point.hpp"
#include "stocs/kernels.hpp"

namespace stocs::kernels {

// Vector twin of point_gap: lanes are points, the edge/region loops and every
// operand order mirror the scalar kernel exactly so results are bit-equal.
ScanResult scan_gaps_avx2(const EnvData& env, const double* px, const double* py, int n,
                          double c, double s, double tx, double ty, double* out_gaps) {
  const double inf = std::numeric_limits<double>::infinity();
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vs = _mm256_set1_pd(s);
  const __m256d vns = _mm256_set1_pd(-s);
  const __m256d vtx = _mm256_set1_pd(tx);
  const __m256d vty = _mm256_set1_pd(ty);
  const __m256d vzero = _mm256_setzero_pd();

  __m256d lane_gap = _mm256_set1_pd(inf);
  __m256i lane_idx = _mm256_set1_epi64x(-1);

  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vpx = _mm256_loadu_pd(px + i);
    const __m256d vpy = _mm256_loadu_pd(py + i);
    const __m256d wx = _mm256_fmadd_pd(vc, vpx, _mm256_fmadd_pd(vns, vpy, vtx));
    const __m256d wy = _mm256_fmadd_pd(vs, vpx, _mm256_fmadd_pd(vc, vpy, vty));

    __m256d best = _mm256_set1_pd(inf);
    for (int r = 0; r < env.nregions; ++r) {
      __m256d max_plane = _mm256_set1_pd(-inf);
      __m256d seg_min = _mm256_set1_pd(inf);
      for (int e = env.region_first[r]; e < env.region_first[r + 1]; ++e) {
        const __m256d relx = _mm256_sub_pd(wx, _mm256_set1_pd(env.ax[e]));
        const __m256d rely = _mm256_sub_pd(wy, _mm256_set1_pd(env.ay[e]));
        const __m256d plane = _mm256_fmadd_pd(_mm256_set1_pd(env.nx[e]), relx,
                                              _mm256_mul_pd(_mm256_set1_pd(env.ny[e]), rely));
        max_plane = _mm256_max_pd(max_plane, plane);
        __m256d t = _mm256_fmadd_pd(_mm256_set1_pd(env.ex[e]), relx,
                                    _mm256_mul_pd(_mm256_set1_pd(env.ey[e]), rely));
        t = _mm256_min_pd(_mm256_max_pd(t, vzero), _mm256_set1_pd(env.len[e]));
        const __m256d dx = _mm256_sub_pd(relx, _mm256_mul_pd(t, _mm256_set1_pd(env.ex[e])));
        const __m256d dy = _mm256_sub_pd(rely, _mm256_mul_pd(t, _mm256_set1_pd(env.ey[e])));
        const __m256d seg = _mm256_sqrt_pd(_mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy)));
        seg_min = _mm256_min_pd(seg_min, seg);
      }
      const __m256d inside = _mm256_cmp_pd(max_plane, vzero, _CMP_LE_OQ);
      const __m256d sd = _mm256_blendv_pd(seg_min, max_plane, inside);
      best = _mm256_min_pd(best, sd);
    }

    if (out_gaps) _mm256_storeu_pd(out_gaps + i, best);
    const __m256d lt = _mm256_cmp_pd(best, lane_gap, _CMP_LT_OQ);
    lane_gap = _mm256_blendv_pd(lane_gap, best, lt);
    const __m256i idx = _mm256_set_epi64x(i + 3, i + 2, i + 1, i);
    lane_idx = _mm256_blendv_epi8(lane_idx, idx, _mm256_castpd_si256(lt));
  }

  alignas(32) double g4[4];
  alignas(32) long long i4[4];
  _mm256_store_pd(g4, lane_gap);
  _mm256_store_si256(reinterpret_cast<__m256i*>(i4), lane_idx);

  ScanResult r{inf, -1};
  for (int l = 0; l < 4; ++l) {
    if (i4[l] < 0) continue;
    const int idx = static_cast<int>(i4[l]);
    if (g4[l] < r.min_gap || (g4[l] == r.min_gap && idx < r.argmin)) {
      r.min_gap = g4[l];
      r.argmin = idx;
    }
  }
  for (; i < n; ++i) {
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
