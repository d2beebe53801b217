#include "aif/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aif/kernels.hpp"

namespace aif {

void AttentionConfig::validate() const {
    if (!(b > 0)) throw std::invalid_argument("attention: b must be positive");
    if (!(eps_ln > 0 && eps_ln < 1)) throw std::invalid_argument("attention: eps_ln must lie in (0,1)");
    if (!(floor > 0)) throw std::invalid_argument("attention: floor must be positive");
    if (!(tau_mass > 0)) throw std::invalid_argument("attention: tau_mass must be positive");
}

RedCentroid red_centroid(const std::vector<double>& image, const AttentionConfig& cfg) {
    if (image.size() != static_cast<std::size_t>(kVisualLen)) throw std::invalid_argument("red_centroid: bad image size");
    double m[3];
    kernels::redness(image.data(), m);
    RedCentroid r;
    r.mass = m[0];
    if (m[0] >= cfg.tau_mass) {
        r.present = true;
        r.u = m[1] / m[0];
        r.v = m[2] / m[0];
    }
    return r;
}

RedCentroid largest_component_centroid(const std::vector<double>& image, double threshold) {
    std::vector<char> on(kPixels, 0);
    for (int p = 0; p < kPixels; ++p) {
        double w = image[p] - std::max(image[kPixels + p], image[2 * kPixels + p]);
        on[p] = w > threshold;
    }
    std::vector<int> label(kPixels, -1), stack;
    int best = -1, best_n = 0;
    double best_sx = 0, best_sy = 0;
    for (int seed = 0; seed < kPixels; ++seed) {
        if (!on[seed] || label[seed] >= 0) continue;
        int n = 0;
        double sx = 0, sy = 0;
        stack.push_back(seed);
        label[seed] = seed;
        while (!stack.empty()) {
            int p = stack.back();
            stack.pop_back();
            int row = p / kImageSize, col = p % kImageSize;
            ++n;
            sx += pixel_center(col);
            sy += pixel_center(row);
            const int nb[4][2] = {{row - 1, col}, {row + 1, col}, {row, col - 1}, {row, col + 1}};
            for (auto& q : nb) {
                if (q[0] < 0 || q[0] >= kImageSize || q[1] < 0 || q[1] >= kImageSize) continue;
                int k = q[0] * kImageSize + q[1];
                if (on[k] && label[k] < 0) { label[k] = seed; stack.push_back(k); }
            }
        }
        if (n > best_n) { best_n = n; best = seed; best_sx = sx; best_sy = sy; }
    }
    RedCentroid r;
    if (best >= 0) {
        r.present = true;
        r.mass = best_n;
        r.u = best_sx / best_n;
        r.v = best_sy / best_n;
    }
    return r;
}

namespace {
// ln(max(1 - d2/b2, eps)); active == the clamp is not engaged
inline double clamped_log(double d2, double b2, double eps, double& q, bool& active) {
    q = 1.0 - d2 / b2;
    active = q > eps;
    return std::log(active ? q : eps);
}
}  // namespace

double precision_at(double x, double y, const CovertFocus& f, const RedCentroid& r, const AttentionConfig& cfg) {
    const double b2 = cfg.b * cfg.b;
    double q;
    bool act;
    double l1 = clamped_log((x - f.u) * (x - f.u) + (y - f.v) * (y - f.v), b2, cfg.eps_ln, q, act);
    double pi = 0.5 * f.amp * (l1 + cfg.c);
    if (r.present) {
        double l2 = clamped_log((x - r.u) * (x - r.u) + (y - r.v) * (y - r.v), b2, cfg.eps_ln, q, act);
        pi += 0.5 * (l2 + cfg.c);
    } else {
        pi += 0.5 * cfg.c;
    }
    return std::max(pi, cfg.floor);
}

PrecisionField precision_field(const CovertFocus& f, const RedCentroid& r, const AttentionConfig& cfg) {
    PrecisionField out;
    out.centroid = r;
    out.pi.resize(kPixels);
    out.dpi_dmu.assign(3 * kPixels, 0.0);
    out.dpi_dr.assign(2 * kPixels, 0.0);
    const double b2 = cfg.b * cfg.b;
    double* d_amp = out.dpi_dmu.data();
    double* d_u = d_amp + kPixels;
    double* d_v = d_u + kPixels;
    double* d_ru = out.dpi_dr.data();
    double* d_rv = d_ru + kPixels;

    for (int p = 0; p < kPixels; ++p) {
        const double x = pixel_center(p % kImageSize);
        const double y = pixel_center(p / kImageSize);
        double q1, q2;
        bool a1, a2 = false;
        const double l1 = clamped_log((x - f.u) * (x - f.u) + (y - f.v) * (y - f.v), b2, cfg.eps_ln, q1, a1);
        double pi = 0.5 * f.amp * (l1 + cfg.c);
        if (a1) {
            d_amp[p] = 0.5 * (l1 + cfg.c);
            d_u[p] = f.amp * (x - f.u) / (b2 * q1);
            d_v[p] = f.amp * (y - f.v) / (b2 * q1);
        }
        if (r.present) {
            const double l2 = clamped_log((x - r.u) * (x - r.u) + (y - r.v) * (y - r.v), b2, cfg.eps_ln, q2, a2);
            pi += 0.5 * (l2 + cfg.c);
            if (a2) {
                d_ru[p] = (x - r.u) / (b2 * q2);
                d_rv[p] = (y - r.v) / (b2 * q2);
            }
        } else {
            pi += 0.5 * cfg.c;
        }
        if (!a1 || (r.present && !a2)) ++out.clamped_pixels;
        if (pi < cfg.floor) {
            pi = cfg.floor;
            d_amp[p] = d_u[p] = d_v[p] = d_ru[p] = d_rv[p] = 0.0;
        }
        out.pi[p] = pi;
        out.sum_log_pi += std::log(pi);
    }
    return out;
}

PrecisionField precision_field(const CovertFocus& f, const std::vector<double>& image, const AttentionConfig& cfg) {
    return precision_field(f, red_centroid(image, cfg), cfg);
}

void PrecisionField::dr_ds(int j, const std::vector<double>& image, double out[2]) const {
    out[0] = out[1] = 0.0;
    if (!centroid.present) return;
    const int c = j / kPixels, p = j % kPixels;
    const double R = image[p], G = image[kPixels + p], B = image[2 * kPixels + p];
    if (!(R - std::max(G, B) > 0)) return;
    double dw;
    if (c == 0) dw = 1.0;
    else if (G == B) dw = -0.5;  // tie: symmetric subgradient of max
    else if ((c == 1) == (G > B)) dw = -1.0;
    else return;
    const double x = pixel_center(p % kImageSize), y = pixel_center(p / kImageSize);
    out[0] = dw * (x - centroid.u) / centroid.mass;
    out[1] = dw * (y - centroid.v) / centroid.mass;
}

double PrecisionField::dpi_ds(int pix, int j, const std::vector<double>& image) const {
    double dr[2];
    dr_ds(j, image, dr);
    return dpi_dr[pix] * dr[0] + dpi_dr[kPixels + pix] * dr[1];
}

DiagonalPrecision PrecisionField::visual_precision(double gamma) const {
    std::vector<double> d(kVisualLen);
    for (int c = 0; c < kChannels; ++c)
        for (int p = 0; p < kPixels; ++p) d[c * kPixels + p] = gamma * pi[p];
    double fl = gamma * *std::min_element(pi.begin(), pi.end());
    return DiagonalPrecision(std::move(d), std::min(fl, 1e-3));
}

}  // namespace aif
