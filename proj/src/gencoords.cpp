#include "aif/gencoords.hpp"

#include <algorithm>
#include <cmath>

namespace aif {

BeliefLayout::BeliefLayout(int visual) : visual_dim(visual) {
    if (visual < 3) throw std::invalid_argument("visual block needs at least u, v, presence");
}

std::array<std::vector<double>, 4> BeliefLayout::split(std::span<const double> mu) const {
    if (static_cast<int>(mu.size()) != size()) throw std::invalid_argument("belief size mismatch");
    auto take = [&](int off, int n) { return std::vector<double>(mu.begin() + off, mu.begin() + off + n); };
    return {take(cue(), cue_dim), take(proprio(), proprio_dim), take(visual(), visual_dim),
            take(focus(), focus_dim)};
}

std::vector<double> BeliefLayout::join(const std::array<std::vector<double>, 4>& blocks) const {
    const int dims[4] = {cue_dim, proprio_dim, visual_dim, focus_dim};
    std::vector<double> out;
    out.reserve(size());
    for (int b = 0; b < 4; ++b) {
        if (static_cast<int>(blocks[b].size()) != dims[b]) throw std::invalid_argument("block size mismatch");
        out.insert(out.end(), blocks[b].begin(), blocks[b].end());
    }
    return out;
}

void GeneralizedBelief::enforce_bounds() {
    auto& L = layout;
    mu[L.presence()] = std::clamp(mu[L.presence()], 0.0, 1.0);
    mu[L.amp()] = std::max(mu[L.amp()], 0.0);
    for (int i : {L.vis_u(), L.vis_v(), L.foc_u(), L.foc_v()}) mu[i] = std::clamp(mu[i], -1.0, 1.0);
}

bool GeneralizedBelief::finite() const {
    auto ok = [](double x) { return std::isfinite(x); };
    return std::all_of(mu.begin(), mu.end(), ok) && std::all_of(mu_prime.begin(), mu_prime.end(), ok);
}

DiagonalPrecision::DiagonalPrecision(std::vector<double> d, double fl) : diag(std::move(d)), floor(fl) {
    if (!(fl > 0)) throw std::invalid_argument("precision floor must be positive");
    for (double& x : diag) x = std::max(x, fl);
}

double DiagonalPrecision::log_det() const {
    double s = 0.0;
    for (double x : diag) s += std::log(x);
    return s;
}

std::vector<double> shift(const GeneralizedBelief& gb) { return gb.mu_prime; }

double weighted_sq_error(std::span<const double> e, const DiagonalPrecision& pi) {
    if (e.size() != pi.size()) throw std::invalid_argument("weighted_sq_error: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) s += pi.diag[i] * e[i] * e[i];
    return s;
}

double free_energy(const GeneralizedBelief& gb, const SensoryBundle& s,
                   const DiagonalPrecision& pi_cue, const DiagonalPrecision& pi_proprio,
                   const DiagonalPrecision& pi_visual, const DiagonalPrecision& pi_mu,
                   const PredictionError& preds) {
    if (!gb.finite()) throw NumericError("free_energy: non-finite belief");
    for (double x : s.visual)
        if (!std::isfinite(x)) throw NumericError("free_energy: non-finite sensory input");
    double F = weighted_sq_error(preds.e_cue, pi_cue) - pi_cue.log_det()
             + weighted_sq_error(preds.e_proprio, pi_proprio) - pi_proprio.log_det()
             + weighted_sq_error(preds.e_visual, pi_visual) - pi_visual.log_det()
             + weighted_sq_error(preds.e_mu, pi_mu) - pi_mu.log_det();
    F *= 0.5;
    if (!std::isfinite(F)) throw NumericError("free_energy: non-finite result");
    return F;
}

}  // namespace aif
