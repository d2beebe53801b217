#pragma once
// Pitch/yaw pinhole camera looking at a scene with at most one red sphere.

#include <array>
#include <optional>

#include "aif/gencoords.hpp"
#include "aif/genmodels.hpp"

namespace aif {

struct CameraModel {
    double focal = 1.0 / 0.3;  // normalized image units per radian
    double pitch_limit = 0.35;
    double yaw_limit = 0.35;
    int image_size = kImageSize;

    void validate() const;
};

struct SceneState {
    std::array<double, 2> target_dir{0.0, 0.0};  // pitch, yaw (world frame)
    bool target_visible = false;
    std::optional<std::array<double, 2>> cue_pos;
    std::array<double, 2> camera{0.0, 0.0};      // pitch, yaw
};

// image-plane position of the target for the current camera
std::array<double, 2> project(const SceneState& st, const CameraModel& cam);
// world direction that lands on image point (u,v) when the camera is at rest
std::array<double, 2> direction_for(double u, double v, const CameraModel& cam);

SensoryBundle observe(const SceneState& st, const CameraModel& cam, const BlobRendererConfig& renderer);

struct ActionResult {
    SceneState state;
    bool clipped = false;
};
ActionResult apply_action(const SceneState& st, std::array<double, 2> a_dot, const CameraModel& cam, double dt);

struct SensoryActionJacobian {
    std::array<std::array<double, 2>, 2> proprio;   // d proprio / d(pitch, yaw)
    bool visual_present = false;
    std::array<std::array<double, 2>, 2> centroid;  // d(r_u, r_v) / d(yaw, pitch)
};
SensoryActionJacobian sensory_action_jacobian(const SensoryBundle& s, const CameraModel& cam, double dt,
                                              double tau_mass = 0.5);

}  // namespace aif
