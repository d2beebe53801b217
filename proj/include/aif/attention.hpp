#pragma once
// Visual sensory precision: redness centroid, the two-term RBF precision
// field, and its gradients w.r.t. the covert focus and the pixels.

#include <vector>

#include "aif/gencoords.hpp"

namespace aif {

struct AttentionConfig {
    double b = 2.6;
    double c = 1.0;
    double eps_ln = 1e-3;   // clamp on the log argument
    double floor = 1e-3;    // precision floor
    double tau_mass = 0.5;  // summed redness needed for a centroid

    void validate() const;
};

struct CovertFocus {
    double amp = 1.0;
    double u = 0.0;
    double v = 0.0;
};

struct RedCentroid {
    double u = 0.0;
    double v = 0.0;
    double mass = 0.0;
    bool present = false;
};

// soft weighted-mean centroid of w = max(0, R - max(G,B))
RedCentroid red_centroid(const std::vector<double>& image, const AttentionConfig& cfg = {});

// Reference: centroid of the largest 4-connected component of pixels with
// w > threshold (unweighted pixel-center mean). Not differentiable.
RedCentroid largest_component_centroid(const std::vector<double>& image, double threshold = 0.25);

double precision_at(double x, double y, const CovertFocus& f, const RedCentroid& r, const AttentionConfig& cfg = {});

struct PrecisionField {
    std::vector<double> pi;       // per pixel, shared by the three channels
    std::vector<double> dpi_dmu;  // 3 x kPixels: d/d(amp, u, v)
    std::vector<double> dpi_dr;   // 2 x kPixels: d/d(r_u, r_v)
    RedCentroid centroid;
    double sum_log_pi = 0.0;      // over pixels (one channel)
    int clamped_pixels = 0;

    // d pi_pix / d s_j through the soft centroid; j indexes the planar image
    double dpi_ds(int pix, int j, const std::vector<double>& image) const;
    // d (r_u, r_v) / d s_j
    void dr_ds(int j, const std::vector<double>& image, double out[2]) const;

    // diag(gamma * pi) replicated over channels: the precision of the visual channel
    DiagonalPrecision visual_precision(double gamma) const;
};

PrecisionField precision_field(const CovertFocus& f, const RedCentroid& r, const AttentionConfig& cfg = {});
PrecisionField precision_field(const CovertFocus& f, const std::vector<double>& image, const AttentionConfig& cfg = {});

}  // namespace aif
