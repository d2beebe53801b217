#pragma once
// Per-pixel reduction kernels. Each has a scalar reference and a vector
// variant; dispatch picks the vector one when the CPU supports it.

#include <string>

namespace aif::kernels {

// Sums of the redness weight w = max(0, R - max(G,B)) over a planar 32x32x3 image:
// out = {sum w, sum w*x, sum w*y}
using RednessFn = void (*)(const double* img, double out[3]);

struct VisualReduceIn {
    const double* pi;      // kPixels
    const double* dpi_f;   // 3 x kPixels  (amp, u, v)
    const double* dpi_r;   // 2 x kPixels  (r_u, r_v)
    const double* s;       // kVisualLen
    const double* pred;    // kVisualLen
    const double* jac;     // ncols x kVisualLen
    int ncols;             // <= kMaxCols
    double gamma;
};

constexpr int kMaxCols = 8;

struct VisualReduceOut {
    double pi_e2 = 0;              // sum_pix pi * |e|^2
    double grad[kMaxCols] = {};    // gamma * sum_i pi e_i J_ik
    double tr_f[3] = {};           // sum dpi_f / pi
    double q_f[3] = {};            // sum |e|^2 dpi_f
    double tr_r[2] = {};
    double q_r[2] = {};
};

using VisualReduceFn = void (*)(const VisualReduceIn&, VisualReduceOut&);

void redness_scalar(const double* img, double out[3]);
void visual_reduce_scalar(const VisualReduceIn& in, VisualReduceOut& out);

#if defined(__x86_64__) || defined(__i386__)
void redness_avx2(const double* img, double out[3]);
void visual_reduce_avx2(const VisualReduceIn& in, VisualReduceOut& out);
#endif
#if defined(__aarch64__)
void redness_neon(const double* img, double out[3]);
void visual_reduce_neon(const VisualReduceIn& in, VisualReduceOut& out);
#endif

bool vector_available();
// "scalar", "avx2" or "neon"
std::string active_backend();
// force the scalar path (tests, reproducibility across machines)
void force_scalar(bool on);

void redness(const double* img, double out[3]);
void visual_reduce(const VisualReduceIn& in, VisualReduceOut& out);

}  // namespace aif::kernels
