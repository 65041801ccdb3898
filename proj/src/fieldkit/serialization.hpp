#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "fieldkit/ball_planner.hpp"
#include "fieldkit/camera.hpp"
#include "fieldkit/line_vision.hpp"
#include "fieldkit/localization.hpp"
#include "fieldkit/render.hpp"
#include "fieldkit/stereo.hpp"
#include "fieldkit/trajectory.hpp"

// JSON forms of the public types. Readers start from defaults and override
// whatever keys are present; malformed documents throw Parse.
namespace fieldkit::io {

using nlohmann::json;

json parse(const std::string& text);

json to_json(const Vec2& v);
json to_json(const Vec3& v);
Vec2 vec2_from_json(const json& j);
Vec3 vec3_from_json(const json& j);

json to_json(const FieldPose& p);
FieldPose pose_from_json(const json& j);

json to_json(const FieldSpec& spec);
FieldSpec field_from_json(const json& j);

/// Plan request: game state plus the optional "field" and "use_heuristic".
PlanContext plan_context_from_json(const json& j);
json to_json(const PlanContext& ctx);
json to_json(const BallPlan& plan);

json to_json(const CameraIntrinsics& in);
CameraIntrinsics intrinsics_from_json(const json& j);
json to_json(const CameraExtrinsics& ex);
CameraExtrinsics extrinsics_from_json(const json& j);
json to_json(const BirdviewSpec& spec);
BirdviewSpec birdview_from_json(const json& j);

lines::DetectorConfig detector_config_from_json(const json& j);
json to_json(const lines::Detections& d);

json to_json(const RobotObservation& obs);
RobotObservation observation_from_json(const json& j);
ObservationSigmas sigmas_from_json(const json& j);
json to_json(const ObservationSigmas& s);
OdometryNoise odometry_noise_from_json(const json& j);
FilterConfig filter_config_from_json(const json& j);
json to_json(const PoseEstimate& e);

json trajectory_to_json(const std::vector<TrajectoryStep>& steps);
std::vector<TrajectoryStep> trajectory_from_json(const json& j);
TrajectoryConfig trajectory_config_from_json(const json& j);

json to_json(const stereo::StereoRig& rig);
stereo::StereoRig rig_from_json(const json& j);
stereo::ObstacleParams obstacle_params_from_json(const json& j);
json to_json(const stereo::ObstacleResult& r);

json to_json(const Scene& scene);
Scene scene_from_json(const json& j);

}  // namespace fieldkit::io
