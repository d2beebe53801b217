#pragma once
// Generative sensor models g(mu) with analytic Jacobians.

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "aif/gencoords.hpp"

namespace aif {

struct BlobRendererConfig {
    int image_size = kImageSize;
    double blob_sigma = 0.12;
    std::array<double, 3> background{0.5, 0.5, 0.5};
    std::array<double, 3> blob_color{1.0, 0.0, 0.0};

    void validate() const;
};

struct VisualPrediction {
    std::vector<double> pixels;    // L, planar
    std::vector<double> jacobian;  // visual_dim columns of length L: jacobian[k*L + i]
    int cols = 0;
    bool clamped = false;

    double jac(int i, int k) const { return jacobian[static_cast<std::size_t>(k) * kVisualLen + i]; }
};

// Anything that maps the visual belief block to an image plus Jacobian.
class VisualModel {
public:
    virtual ~VisualModel() = default;
    virtual VisualPrediction predict(std::span<const double> visual_belief) const = 0;
};

VisualPrediction render(std::span<const double> visual_belief, const BlobRendererConfig& cfg);

// Scene-side rendering with no Jacobian: presence p blob centered at (u,v).
std::vector<double> render_image(double u, double v, double presence, const BlobRendererConfig& cfg);

class BlobRenderer final : public VisualModel {
public:
    explicit BlobRenderer(BlobRendererConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }
    VisualPrediction predict(std::span<const double> visual_belief) const override {
        return render(visual_belief, cfg_);
    }
    const BlobRendererConfig& config() const { return cfg_; }

private:
    BlobRendererConfig cfg_;
};

struct IdentityPrediction {
    std::array<double, 2> value;
    std::array<std::array<double, 2>, 2> jacobian{{{1.0, 0.0}, {0.0, 1.0}}};
};

IdentityPrediction proprio_predict(std::array<double, 2> proprio_belief);
IdentityPrediction intero_predict(std::array<double, 2> cue_belief);

}  // namespace aif
