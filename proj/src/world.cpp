#include "aif/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aif/attention.hpp"

namespace aif {

void CameraModel::validate() const {
    if (!(focal > 0)) throw std::invalid_argument("camera: focal must be positive");
    if (!(pitch_limit > 0 && yaw_limit > 0)) throw std::invalid_argument("camera: limits must be positive");
    if (image_size != kImageSize) throw std::invalid_argument("camera: image size is fixed at 32");
}

std::array<double, 2> project(const SceneState& st, const CameraModel& cam) {
    return {cam.focal * (st.target_dir[1] - st.camera[1]), cam.focal * (st.target_dir[0] - st.camera[0])};
}

std::array<double, 2> direction_for(double u, double v, const CameraModel& cam) {
    return {v / cam.focal, u / cam.focal};
}

SensoryBundle observe(const SceneState& st, const CameraModel& cam, const BlobRendererConfig& renderer) {
    SensoryBundle s;
    s.proprio = st.camera;
    if (st.cue_pos) s.cue = *st.cue_pos;
    auto uv = project(st, cam);
    bool in_frame = std::abs(uv[0]) <= 1.0 && std::abs(uv[1]) <= 1.0;
    if (st.target_visible && in_frame) s.visual = render_image(uv[0], uv[1], 1.0, renderer);
    else s.visual = render_image(0.0, 0.0, 0.0, renderer);
    return s;
}

ActionResult apply_action(const SceneState& st, std::array<double, 2> a_dot, const CameraModel& cam, double dt) {
    ActionResult r{st, false};
    const double lim[2] = {cam.pitch_limit, cam.yaw_limit};
    for (int k = 0; k < 2; ++k) {
        double x = st.camera[k] + dt * a_dot[k];
        double c = std::clamp(x, -lim[k], lim[k]);
        r.clipped = r.clipped || c != x;
        r.state.camera[k] = c;
    }
    return r;
}

SensoryActionJacobian sensory_action_jacobian(const SensoryBundle& s, const CameraModel& cam, double dt,
                                              double tau_mass) {
    SensoryActionJacobian J;
    J.proprio = {{{dt, 0.0}, {0.0, dt}}};
    AttentionConfig ac;
    ac.tau_mass = tau_mass;
    J.visual_present = red_centroid(s.visual, ac).present;
    if (J.visual_present) J.centroid = {{{-cam.focal, 0.0}, {0.0, -cam.focal}}};
    else J.centroid = {{{0.0, 0.0}, {0.0, 0.0}}};
    return J;
}

}  // namespace aif
