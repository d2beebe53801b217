#pragma once
// Generalized belief state, sensory bundle, diagonal precisions and the
// free-energy bookkeeping shared by the rest of the library.

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace aif {

constexpr int kImageSize = 32;
constexpr int kPixels = kImageSize * kImageSize;
constexpr int kChannels = 3;
constexpr int kVisualLen = kPixels * kChannels;   // L
constexpr double kPixelWidth = 2.0 / kImageSize;  // one pixel in normalized units

// normalized center of pixel i along one axis
inline double pixel_center(int i) { return (2.0 * i + 1.0) / kImageSize - 1.0; }

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BeliefLayout {
    int cue_dim = 2;
    int proprio_dim = 2;
    int visual_dim = 3;  // u, v, presence, then free latents
    int focus_dim = 3;   // amp, u, v

    explicit BeliefLayout(int visual = 3);

    int size() const { return cue_dim + proprio_dim + visual_dim + focus_dim; }
    int cue() const { return 0; }
    int proprio() const { return cue_dim; }            // pitch, yaw
    int visual() const { return cue_dim + proprio_dim; }
    int vis_u() const { return visual(); }
    int vis_v() const { return visual() + 1; }
    int presence() const { return visual() + 2; }
    int focus() const { return visual() + visual_dim; }
    int amp() const { return focus(); }
    int foc_u() const { return focus() + 1; }
    int foc_v() const { return focus() + 2; }

    std::array<std::vector<double>, 4> split(std::span<const double> mu) const;
    std::vector<double> join(const std::array<std::vector<double>, 4>& blocks) const;
};

struct GeneralizedBelief {
    BeliefLayout layout;
    std::vector<double> mu;
    std::vector<double> mu_prime;

    explicit GeneralizedBelief(const BeliefLayout& l = BeliefLayout{})
        : layout(l), mu(l.size(), 0.0), mu_prime(l.size(), 0.0) {}

    // presence into [0,1], amp >= 0, positions into the frame
    void enforce_bounds();
    bool finite() const;
};

struct SensoryBundle {
    std::array<double, 2> proprio{0.0, 0.0};  // pitch, yaw
    std::array<double, 2> cue{-2.0, -2.0};
    std::vector<double> visual = std::vector<double>(kVisualLen, 0.5);  // planar: c*kPixels + pixel
};

constexpr double kCueSentinel = -2.0;

struct DiagonalPrecision {
    std::vector<double> diag;
    double floor = 1e-3;

    DiagonalPrecision() = default;
    DiagonalPrecision(std::vector<double> d, double fl = 1e-3);
    std::size_t size() const { return diag.size(); }
    double log_det() const;
};

struct PredictionError {
    std::vector<double> e_cue, e_proprio, e_visual;
    std::vector<double> e_mu;
};

// order-0 slot of the shifted state; higher orders are truncated
std::vector<double> shift(const GeneralizedBelief& gb);

double weighted_sq_error(std::span<const double> e, const DiagonalPrecision& pi);

// Precisions per channel: cue, proprio, visual, dynamics. Up to a constant.
double free_energy(const GeneralizedBelief& gb, const SensoryBundle& s,
                   const DiagonalPrecision& pi_cue, const DiagonalPrecision& pi_proprio,
                   const DiagonalPrecision& pi_visual, const DiagonalPrecision& pi_mu,
                   const PredictionError& preds);

}  // namespace aif
