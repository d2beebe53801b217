#include "aif/kernels.hpp"

#include <atomic>

#include "aif/gencoords.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define AIF_X86 1
#endif
#if defined(__aarch64__)
#include <arm_neon.h>
#define AIF_NEON 1
#endif

namespace aif::kernels {
namespace {

struct Coords {
    alignas(32) double x[kPixels];
    alignas(32) double y[kPixels];
    Coords() {
        for (int p = 0; p < kPixels; ++p) {
            x[p] = pixel_center(p % kImageSize);
            y[p] = pixel_center(p / kImageSize);
        }
    }
};
const Coords& coords() {
    static const Coords c;
    return c;
}

std::atomic<bool> g_force_scalar{false};

}  // namespace

void redness_scalar(const double* img, double out[3]) {
    const Coords& C = coords();
    const double* R = img;
    const double* G = img + kPixels;
    const double* B = img + 2 * kPixels;
    double sw = 0, sx = 0, sy = 0;
    for (int p = 0; p < kPixels; ++p) {
        double mx = G[p] > B[p] ? G[p] : B[p];
        double w = R[p] - mx;
        if (!(w > 0)) continue;
        sw += w;
        sx += w * C.x[p];
        sy += w * C.y[p];
    }
    out[0] = sw; out[1] = sx; out[2] = sy;
}

void visual_reduce_scalar(const VisualReduceIn& in, VisualReduceOut& out) {
    out = VisualReduceOut{};
    const int nc = in.ncols;
    for (int p = 0; p < kPixels; ++p) {
        const double e0 = in.s[p] - in.pred[p];
        const double e1 = in.s[kPixels + p] - in.pred[kPixels + p];
        const double e2 = in.s[2 * kPixels + p] - in.pred[2 * kPixels + p];
        const double E2 = e0 * e0 + e1 * e1 + e2 * e2;
        const double pi = in.pi[p];
        const double ip = 1.0 / pi;
        out.pi_e2 += pi * E2;
        for (int k = 0; k < nc; ++k) {
            const double* J = in.jac + static_cast<long>(k) * kVisualLen;
            out.grad[k] += pi * (e0 * J[p] + e1 * J[kPixels + p] + e2 * J[2 * kPixels + p]);
        }
        for (int j = 0; j < 3; ++j) {
            const double d = in.dpi_f[j * kPixels + p];
            out.tr_f[j] += d * ip;
            out.q_f[j] += E2 * d;
        }
        for (int j = 0; j < 2; ++j) {
            const double d = in.dpi_r[j * kPixels + p];
            out.tr_r[j] += d * ip;
            out.q_r[j] += E2 * d;
        }
    }
    for (int k = 0; k < nc; ++k) out.grad[k] *= in.gamma;
}

#ifdef AIF_X86
namespace {
__attribute__((target("avx2,fma"))) inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}
}  // namespace

__attribute__((target("avx2,fma"))) void redness_avx2(const double* img, double out[3]) {
    const Coords& C = coords();
    const double* R = img;
    const double* G = img + kPixels;
    const double* B = img + 2 * kPixels;
    const __m256d zero = _mm256_setzero_pd();
    __m256d sw = zero, sx = zero, sy = zero;
    for (int p = 0; p < kPixels; p += 4) {
        __m256d mx = _mm256_max_pd(_mm256_loadu_pd(G + p), _mm256_loadu_pd(B + p));
        __m256d w = _mm256_max_pd(_mm256_sub_pd(_mm256_loadu_pd(R + p), mx), zero);
        sw = _mm256_add_pd(sw, w);
        sx = _mm256_fmadd_pd(w, _mm256_load_pd(C.x + p), sx);
        sy = _mm256_fmadd_pd(w, _mm256_load_pd(C.y + p), sy);
    }
    out[0] = hsum(sw); out[1] = hsum(sx); out[2] = hsum(sy);
}

__attribute__((target("avx2,fma"))) void visual_reduce_avx2(const VisualReduceIn& in, VisualReduceOut& out) {
    out = VisualReduceOut{};
    const int nc = in.ncols;
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc_pe = _mm256_setzero_pd();
    __m256d acc_g[kMaxCols], acc_tf[3], acc_qf[3], acc_tr[2], acc_qr[2];
    for (int k = 0; k < kMaxCols; ++k) acc_g[k] = _mm256_setzero_pd();
    for (int j = 0; j < 3; ++j) acc_tf[j] = acc_qf[j] = _mm256_setzero_pd();
    for (int j = 0; j < 2; ++j) acc_tr[j] = acc_qr[j] = _mm256_setzero_pd();

    for (int p = 0; p < kPixels; p += 4) {
        __m256d e0 = _mm256_sub_pd(_mm256_loadu_pd(in.s + p), _mm256_loadu_pd(in.pred + p));
        __m256d e1 = _mm256_sub_pd(_mm256_loadu_pd(in.s + kPixels + p), _mm256_loadu_pd(in.pred + kPixels + p));
        __m256d e2 = _mm256_sub_pd(_mm256_loadu_pd(in.s + 2 * kPixels + p),
                                   _mm256_loadu_pd(in.pred + 2 * kPixels + p));
        __m256d E2 = _mm256_fmadd_pd(e2, e2, _mm256_fmadd_pd(e1, e1, _mm256_mul_pd(e0, e0)));
        __m256d pi = _mm256_loadu_pd(in.pi + p);
        __m256d ip = _mm256_div_pd(one, pi);
        acc_pe = _mm256_fmadd_pd(pi, E2, acc_pe);
        for (int k = 0; k < nc; ++k) {
            const double* J = in.jac + static_cast<long>(k) * kVisualLen;
            __m256d t = _mm256_mul_pd(e0, _mm256_loadu_pd(J + p));
            t = _mm256_fmadd_pd(e1, _mm256_loadu_pd(J + kPixels + p), t);
            t = _mm256_fmadd_pd(e2, _mm256_loadu_pd(J + 2 * kPixels + p), t);
            acc_g[k] = _mm256_fmadd_pd(pi, t, acc_g[k]);
        }
        for (int j = 0; j < 3; ++j) {
            __m256d d = _mm256_loadu_pd(in.dpi_f + j * kPixels + p);
            acc_tf[j] = _mm256_fmadd_pd(d, ip, acc_tf[j]);
            acc_qf[j] = _mm256_fmadd_pd(E2, d, acc_qf[j]);
        }
        for (int j = 0; j < 2; ++j) {
            __m256d d = _mm256_loadu_pd(in.dpi_r + j * kPixels + p);
            acc_tr[j] = _mm256_fmadd_pd(d, ip, acc_tr[j]);
            acc_qr[j] = _mm256_fmadd_pd(E2, d, acc_qr[j]);
        }
    }
    out.pi_e2 = hsum(acc_pe);
    for (int k = 0; k < nc; ++k) out.grad[k] = in.gamma * hsum(acc_g[k]);
    for (int j = 0; j < 3; ++j) { out.tr_f[j] = hsum(acc_tf[j]); out.q_f[j] = hsum(acc_qf[j]); }
    for (int j = 0; j < 2; ++j) { out.tr_r[j] = hsum(acc_tr[j]); out.q_r[j] = hsum(acc_qr[j]); }
}
#endif

#ifdef AIF_NEON
void redness_neon(const double* img, double out[3]) {
    const Coords& C = coords();
    const double* R = img;
    const double* G = img + kPixels;
    const double* B = img + 2 * kPixels;
    const float64x2_t zero = vdupq_n_f64(0.0);
    float64x2_t sw = zero, sx = zero, sy = zero;
    for (int p = 0; p < kPixels; p += 2) {
        float64x2_t mx = vmaxq_f64(vld1q_f64(G + p), vld1q_f64(B + p));
        float64x2_t w = vmaxq_f64(vsubq_f64(vld1q_f64(R + p), mx), zero);
        sw = vaddq_f64(sw, w);
        sx = vfmaq_f64(sx, w, vld1q_f64(C.x + p));
        sy = vfmaq_f64(sy, w, vld1q_f64(C.y + p));
    }
    out[0] = vaddvq_f64(sw); out[1] = vaddvq_f64(sx); out[2] = vaddvq_f64(sy);
}

void visual_reduce_neon(const VisualReduceIn& in, VisualReduceOut& out) {
    out = VisualReduceOut{};
    const int nc = in.ncols;
    const float64x2_t one = vdupq_n_f64(1.0);
    const float64x2_t zero = vdupq_n_f64(0.0);
    float64x2_t acc_pe = zero, acc_g[kMaxCols], acc_tf[3], acc_qf[3], acc_tr[2], acc_qr[2];
    for (int k = 0; k < kMaxCols; ++k) acc_g[k] = zero;
    for (int j = 0; j < 3; ++j) acc_tf[j] = acc_qf[j] = zero;
    for (int j = 0; j < 2; ++j) acc_tr[j] = acc_qr[j] = zero;
    for (int p = 0; p < kPixels; p += 2) {
        float64x2_t e0 = vsubq_f64(vld1q_f64(in.s + p), vld1q_f64(in.pred + p));
        float64x2_t e1 = vsubq_f64(vld1q_f64(in.s + kPixels + p), vld1q_f64(in.pred + kPixels + p));
        float64x2_t e2 = vsubq_f64(vld1q_f64(in.s + 2 * kPixels + p), vld1q_f64(in.pred + 2 * kPixels + p));
        float64x2_t E2 = vfmaq_f64(vfmaq_f64(vmulq_f64(e0, e0), e1, e1), e2, e2);
        float64x2_t pi = vld1q_f64(in.pi + p);
        float64x2_t ip = vdivq_f64(one, pi);
        acc_pe = vfmaq_f64(acc_pe, pi, E2);
        for (int k = 0; k < nc; ++k) {
            const double* J = in.jac + static_cast<long>(k) * kVisualLen;
            float64x2_t t = vmulq_f64(e0, vld1q_f64(J + p));
            t = vfmaq_f64(t, e1, vld1q_f64(J + kPixels + p));
            t = vfmaq_f64(t, e2, vld1q_f64(J + 2 * kPixels + p));
            acc_g[k] = vfmaq_f64(acc_g[k], pi, t);
        }
        for (int j = 0; j < 3; ++j) {
            float64x2_t d = vld1q_f64(in.dpi_f + j * kPixels + p);
            acc_tf[j] = vfmaq_f64(acc_tf[j], d, ip);
            acc_qf[j] = vfmaq_f64(acc_qf[j], E2, d);
        }
        for (int j = 0; j < 2; ++j) {
            float64x2_t d = vld1q_f64(in.dpi_r + j * kPixels + p);
            acc_tr[j] = vfmaq_f64(acc_tr[j], d, ip);
            acc_qr[j] = vfmaq_f64(acc_qr[j], E2, d);
        }
    }
    out.pi_e2 = vaddvq_f64(acc_pe);
    for (int k = 0; k < nc; ++k) out.grad[k] = in.gamma * vaddvq_f64(acc_g[k]);
    for (int j = 0; j < 3; ++j) { out.tr_f[j] = vaddvq_f64(acc_tf[j]); out.q_f[j] = vaddvq_f64(acc_qf[j]); }
    for (int j = 0; j < 2; ++j) { out.tr_r[j] = vaddvq_f64(acc_tr[j]); out.q_r[j] = vaddvq_f64(acc_qr[j]); }
}
#endif

bool vector_available() {
#if defined(AIF_X86)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#elif defined(AIF_NEON)
    return true;
#else
    return false;
#endif
}

std::string active_backend() {
    if (g_force_scalar.load() || !vector_available()) return "scalar";
#if defined(AIF_X86)
    return "avx2";
#else
    return "neon";
#endif
}

void force_scalar(bool on) { g_force_scalar.store(on); }

void redness(const double* img, double out[3]) {
    if (!g_force_scalar.load(std::memory_order_relaxed) && vector_available()) {
#if defined(AIF_X86)
        return redness_avx2(img, out);
#elif defined(AIF_NEON)
        return redness_neon(img, out);
#endif
    }
    redness_scalar(img, out);
}

void visual_reduce(const VisualReduceIn& in, VisualReduceOut& out) {
    if (!g_force_scalar.load(std::memory_order_relaxed) && vector_available()) {
#if defined(AIF_X86)
        return visual_reduce_avx2(in, out);
#elif defined(AIF_NEON)
        return visual_reduce_neon(in, out);
#endif
    }
    visual_reduce_scalar(in, out);
}

}  // namespace aif::kernels
