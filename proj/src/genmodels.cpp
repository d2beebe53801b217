#include "aif/genmodels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aif {

void BlobRendererConfig::validate() const {
    if (image_size != kImageSize) throw std::invalid_argument("renderer: image size is fixed at 32");
    if (!(blob_sigma > 0)) throw std::invalid_argument("renderer: blob_sigma must be positive");
    for (int c = 0; c < 3; ++c)
        if (background[c] < 0 || background[c] > 1 || blob_color[c] < 0 || blob_color[c] > 1)
            throw std::invalid_argument("renderer: colors must lie in [0,1]");
}

VisualPrediction render(std::span<const double> vb, const BlobRendererConfig& cfg) {
    if (vb.size() < 3) throw std::invalid_argument("render: visual belief needs u, v, presence");
    VisualPrediction out;
    double u = std::clamp(vb[0], -1.0, 1.0);
    double v = std::clamp(vb[1], -1.0, 1.0);
    double p = std::clamp(vb[2], 0.0, 1.0);
    out.clamped = u != vb[0] || v != vb[1] || p != vb[2];
    out.cols = static_cast<int>(vb.size());
    out.pixels.assign(kVisualLen, 0.0);
    out.jacobian.assign(static_cast<std::size_t>(out.cols) * kVisualLen, 0.0);

    const double s2 = cfg.blob_sigma * cfg.blob_sigma;
    double diff[3];
    for (int c = 0; c < 3; ++c) diff[c] = cfg.blob_color[c] - cfg.background[c];
    double* Ju = out.jacobian.data();
    double* Jv = Ju + kVisualLen;
    double* Jp = Jv + kVisualLen;

    for (int row = 0; row < kImageSize; ++row) {
        const double dy = pixel_center(row) - v;
        for (int col = 0; col < kImageSize; ++col) {
            const double dx = pixel_center(col) - u;
            const double G = std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
            const int pix = row * kImageSize + col;
            for (int c = 0; c < 3; ++c) {
                const int i = c * kPixels + pix;
                out.pixels[i] = cfg.background[c] + p * G * diff[c];
                Ju[i] = p * G * dx / s2 * diff[c];
                Jv[i] = p * G * dy / s2 * diff[c];
                Jp[i] = G * diff[c];
            }
        }
    }
    return out;
}

std::vector<double> render_image(double u, double v, double presence, const BlobRendererConfig& cfg) {
    // no clamping of the center here: a target just outside the frame still bleeds in
    std::vector<double> img(kVisualLen);
    const double s2 = cfg.blob_sigma * cfg.blob_sigma;
    for (int row = 0; row < kImageSize; ++row) {
        const double dy = pixel_center(row) - v;
        for (int col = 0; col < kImageSize; ++col) {
            const double dx = pixel_center(col) - u;
            const double G = presence * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
            for (int c = 0; c < 3; ++c)
                img[c * kPixels + row * kImageSize + col] =
                    cfg.background[c] + G * (cfg.blob_color[c] - cfg.background[c]);
        }
    }
    return img;
}

IdentityPrediction proprio_predict(std::array<double, 2> b) { return IdentityPrediction{b}; }
IdentityPrediction intero_predict(std::array<double, 2> b) { return IdentityPrediction{b}; }

}  // namespace aif
