#include "fieldkit/serialization.hpp"

#include <cmath>

#include "fieldkit/error.hpp"

namespace fieldkit::io {

namespace {

template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, std::string(what) + " must be a JSON object");
}

json segment_json(const Vec2& a, const Vec2& b) { return json::array({a.x(), a.y(), b.x(), b.y()}); }

}  // namespace

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec2 vec2_from_json(const json& j) {
  return guarded([&] {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Parse, "expected [x, y]");
    return Vec2(j[0].get<double>(), j[1].get<double>());
  });
}

Vec3 vec3_from_json(const json& j) {
  return guarded([&] {
    if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Parse, "expected [x, y, z]");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  });
}

json to_json(const FieldPose& p) { return {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

FieldPose pose_from_json(const json& j) {
  return guarded([&] {
    require_object(j, "pose");
    FieldPose p;
    read(j, "x", p.x);
    read(j, "y", p.y);
    read(j, "theta", p.theta);
    return p;
  });
}

json to_json(const FieldSpec& spec) {
  json segs = json::array();
  for (const auto& s : spec.line_segments) segs.push_back(segment_json(s.a, s.b));
  return {{"length", spec.length},
          {"width", spec.width},
          {"cell_size", spec.cell_size},
          {"line_width", spec.line_width},
          {"goal_width", spec.goal_width},
          {"goal_center_left", to_json(spec.goal_center_left)},
          {"goal_center_right", to_json(spec.goal_center_right)},
          {"circle", {{"center", to_json(spec.circle.center)}, {"radius", spec.circle.radius}}},
          {"line_segments", segs}};
}

FieldSpec field_from_json(const json& j) {
  FieldSpec spec = FieldSpec::kidsize();
  guarded([&] {
    require_object(j, "field");
    read(j, "length", spec.length);
    read(j, "width", spec.width);
    read(j, "cell_size", spec.cell_size);
    read(j, "line_width", spec.line_width);
    read(j, "goal_width", spec.goal_width);
    if (j.contains("goal_center_left")) spec.goal_center_left = vec2_from_json(j.at("goal_center_left"));
    if (j.contains("goal_center_right")) spec.goal_center_right = vec2_from_json(j.at("goal_center_right"));
    if (j.contains("circle")) {
      const json& c = j.at("circle");
      if (c.contains("center")) spec.circle.center = vec2_from_json(c.at("center"));
      read(c, "radius", spec.circle.radius);
    }
    if (j.contains("line_segments")) {
      spec.line_segments.clear();
      for (const auto& s : j.at("line_segments")) {
        if (!s.is_array() || s.size() != 4) throw Error(ErrorKind::Parse, "line segment must be [ax, ay, bx, by]");
        spec.line_segments.push_back(
            {Vec2(s[0].get<double>(), s[1].get<double>()), Vec2(s[2].get<double>(), s[3].get<double>())});
      }
    }
    return 0;
  });
  spec.validate();
  return spec;
}

PlanContext plan_context_from_json(const json& j) {
  return guarded([&] {
    require_object(j, "plan request");
    PlanContext ctx;
    if (j.contains("robot")) ctx.robot = pose_from_json(j.at("robot"));
    if (j.contains("teammates")) {
      for (const auto& t : j.at("teammates")) ctx.teammates.push_back(pose_from_json(t));
    }
    if (j.contains("opponents")) {
      for (const auto& o : j.at("opponents")) ctx.opponents.push_back(vec2_from_json(o));
    }
    if (j.contains("ball")) ctx.ball = vec2_from_json(j.at("ball"));
    read(j, "ball_speed", ctx.ball_speed);
    read(j, "walk_speed", ctx.walk_speed);
    read(j, "turn_speed", ctx.turn_speed);
    read(j, "opponent_radius", ctx.opponent_radius);
    read(j, "kick_lengths", ctx.kick_lengths);
    ctx.validate();
    return ctx;
  });
}

json to_json(const PlanContext& ctx) {
  json mates = json::array();
  for (const auto& t : ctx.teammates) mates.push_back(to_json(t));
  json opps = json::array();
  for (const auto& o : ctx.opponents) opps.push_back(to_json(o));
  return {{"robot", to_json(ctx.robot)},     {"teammates", mates},
          {"opponents", opps},               {"ball", to_json(ctx.ball)},
          {"ball_speed", ctx.ball_speed},    {"walk_speed", ctx.walk_speed},
          {"turn_speed", ctx.turn_speed},    {"opponent_radius", ctx.opponent_radius},
          {"kick_lengths", ctx.kick_lengths}};
}

json to_json(const BallPlan& plan) {
  json wps = json::array();
  for (const auto& w : plan.waypoints) wps.push_back(to_json(w));
  json cells = json::array();
  for (const auto& c : plan.cells) cells.push_back({c.row, c.col});
  return {{"waypoints", wps},
          {"cells", cells},
          {"edge_costs", plan.edge_costs},
          {"total_cost", plan.total_cost},
          {"expanded_nodes", plan.expanded_nodes}};
}

json to_json(const CameraIntrinsics& in) {
  return {{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx},         {"cy", in.cy},
          {"k1", in.k1}, {"k2", in.k2}, {"width", in.width}, {"height", in.height}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
  return guarded([&] {
    require_object(j, "intrinsics");
    CameraIntrinsics in;
    read(j, "fx", in.fx);
    read(j, "fy", in.fy);
    read(j, "cx", in.cx);
    read(j, "cy", in.cy);
    read(j, "k1", in.k1);
    read(j, "k2", in.k2);
    read(j, "width", in.width);
    read(j, "height", in.height);
    return in;
  });
}

json to_json(const CameraExtrinsics& ex) {
  return {{"position", to_json(ex.position)}, {"roll", ex.roll}, {"pitch", ex.pitch}, {"yaw", ex.yaw}};
}

CameraExtrinsics extrinsics_from_json(const json& j) {
  return guarded([&] {
    require_object(j, "camera");
    CameraExtrinsics ex;
    if (j.contains("position")) ex.position = vec3_from_json(j.at("position"));
    read(j, "roll", ex.roll);
    read(j, "pitch", ex.pitch);
    read(j, "yaw", ex.yaw);
    return ex;
  });
}

json to_json(const BirdviewSpec& spec) {
  return {{"width", spec.out_width},
          {"height", spec.out_height},
          {"meters_per_pixel", spec.meters_per_pixel},
          {"view_center", to_json(spec.view_center)}};
}

BirdviewSpec birdview_from_json(const json& j) {
  return guarded([&] {
    require_object(j, "birdview");
    BirdviewSpec spec;
    read(j, "width", spec.out_width);
    read(j, "height", spec.out_height);
    read(j, "meters_per_pixel", spec.meters_per_pixel);
    if (j.contains("view_center")) spec.view_center = vec2_from_json(j.at("view_center"));
    return spec;
  });
}

lines::DetectorConfig detector_config_from_json(const json& j) {
  return guarded([&] {
    require_object(j, "detector config");
    lines::DetectorConfig c;
    read(j, "line_width_px", c.line_width_px);
    read(j, "width_map", c.width_map);
    read(j, "decimation", c.decimation);
    read(j, "nms_radius", c.nms_radius);
    read(j, "nms_threshold", c.nms_threshold);
    read(j, "min_line_length", c.min_line_length);
    if (j.contains("weights")) {
      read(j.at("weights"), "luma", c.weights.luma);
      read(j.at("weights"), "green", c.weights.green);
    }
    if (j.contains("hough")) {
      const json& h = j.at("hough");
      read(h, "rho", c.hough.rho);
      read(h, "theta", c.hough.theta);
      read(h, "threshold", c.hough.threshold);
      read(h, "min_length", c.hough.min_length);
      read(h, "max_gap", c.hough.max_gap);
      read(h, "rho_tolerance", c.hough.rho_tolerance);
      read(h, "seed", c.hough.seed);
    }
    if (j.contains("merge")) {
      const json& m = j.at("merge");
      read(m, "angle_tol", c.merge.angle_tol);
      read(m, "dist_tol", c.merge.dist_tol);
      read(m, "max_gap", c.merge.max_gap);
    }
    if (j.contains("corners")) {
      const json& k = j.at("corners");
      read(k, "angle_tol", c.corners.angle_tol);
      read(k, "extend", c.corners.extend);
      read(k, "reach", c.corners.reach);
    }
    return c;
  });
}

json to_json(const lines::Detections& d) {
  json ls = json::array();
  for (const auto& l : d.lines) {
    ls.push_back({{"p0", to_json(l.p0)}, {"p1", to_json(l.p1)}, {"length", l.length()}, {"direction", l.direction()}});
  }
  json cs = json::array();
  for (const auto& c : d.corners) {
    cs.push_back({{"position", to_json(c.position)},
                  {"dir_a", to_json(c.dir_a)},
                  {"dir_b", to_json(c.dir_b)},
                  {"orientation", corner_orientation(c.dir_a, c.dir_b)}});
  }
  return {{"lines", ls}, {"corners", cs}, {"nms_point_count", d.nms_points.size()}};
}

json to_json(const RobotObservation& obs) {
  switch (obs.kind) {
    case ObservationKind::Line:
      return {{"kind", "line"}, {"distance", obs.distance}, {"direction", obs.direction}};
    case ObservationKind::Corner:
      return {{"kind", "corner"}, {"position", to_json(obs.position)}, {"orientation", obs.orientation}};
    case ObservationKind::PointFeature:
      return {{"kind", "point"}, {"position", to_json(obs.position)}};
  }
  return {};
}

RobotObservation observation_from_json(const json& j) {
  return guarded([&] {
    require_object(j, "observation");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "line") return RobotObservation::line(j.at("distance").get<double>(), j.at("direction").get<double>());
    if (kind == "corner") {
      return RobotObservation::corner(vec2_from_json(j.at("position")), j.at("orientation").get<double>());
    }
    if (kind == "point") return RobotObservation::point(vec2_from_json(j.at("position")));
    throw Error(ErrorKind::Parse, "unknown observation kind '" + kind + "'");
  });
}

ObservationSigmas sigmas_from_json(const json& j) {
  return guarded([&] {
    ObservationSigmas s;
    read(j, "distance", s.distance);
    read(j, "position", s.position);
    read(j, "angle", s.angle);
    return s;
  });
}

json to_json(const ObservationSigmas& s) {
  return {{"distance", s.distance}, {"position", s.position}, {"angle", s.angle}};
}

OdometryNoise odometry_noise_from_json(const json& j) {
  return guarded([&] {
    OdometryNoise n;
    read(j, "x", n.x);
    read(j, "y", n.y);
    read(j, "theta", n.theta);
    return n;
  });
}

FilterConfig filter_config_from_json(const json& j) {
  return guarded([&] {
    FilterConfig c;
    read(j, "particles", c.particles);
    if (j.contains("sigmas")) c.sigmas = sigmas_from_json(j.at("sigmas"));
    if (j.contains("odometry_noise")) c.odometry_noise = odometry_noise_from_json(j.at("odometry_noise"));
    read(j, "match_range", c.match_range);
    return c;
  });
}

json to_json(const PoseEstimate& e) {
  return {{"x", e.pose.x},
          {"y", e.pose.y},
          {"theta", e.pose.theta},
          {"sigma_xy", e.sigma_xy},
          {"sigma_theta", std::isfinite(e.sigma_theta) ? json(e.sigma_theta) : json(nullptr)}};
}

json trajectory_to_json(const std::vector<TrajectoryStep>& steps) {
  json arr = json::array();
  for (const auto& s : steps) {
    json obs = json::array();
    for (const auto& o : s.observations) obs.push_back(to_json(o));
    arr.push_back({{"odometry", {{"dx", s.odometry.x}, {"dy", s.odometry.y}, {"dtheta", s.odometry.theta}}},
                   {"observations", obs},
                   {"truth", to_json(s.truth)}});
  }
  return {{"steps", arr}};
}

std::vector<TrajectoryStep> trajectory_from_json(const json& j) {
  return guarded([&] {
    require_object(j, "trajectory");
    std::vector<TrajectoryStep> steps;
    for (const auto& s : j.at("steps")) {
      TrajectoryStep step;
      if (s.contains("odometry")) {
        const json& o = s.at("odometry");
        read(o, "dx", step.odometry.x);
        read(o, "dy", step.odometry.y);
        read(o, "dtheta", step.odometry.theta);
      }
      if (s.contains("observations")) {
        for (const auto& o : s.at("observations")) step.observations.push_back(observation_from_json(o));
      }
      if (s.contains("truth")) step.truth = pose_from_json(s.at("truth"));
      steps.push_back(std::move(step));
    }
    return steps;
  });
}

TrajectoryConfig trajectory_config_from_json(const json& j) {
  return guarded([&] {
    TrajectoryConfig c;
    if (j.contains("start")) c.start = pose_from_json(j.at("start"));
    read(j, "steps", c.steps);
    read(j, "step_length", c.step_length);
    read(j, "max_turn", c.max_turn);
    if (j.contains("odometry_noise")) c.odometry_noise = odometry_noise_from_json(j.at("odometry_noise"));
    if (j.contains("observation_sigmas")) c.observation_sigmas = sigmas_from_json(j.at("observation_sigmas"));
    read(j, "observation_noise", c.observation_noise);
    read(j, "max_range", c.max_range);
    read(j, "seed", c.seed);
    return c;
  });
}

json to_json(const stereo::StereoRig& rig) {
  return {{"baseline", rig.baseline}, {"focal", rig.focal},   {"cx", rig.cx},
          {"cy", rig.cy},             {"width", rig.width}, {"height", rig.height}};
}

stereo::StereoRig rig_from_json(const json& j) {
  return guarded([&] {
    require_object(j, "rig");
    stereo::StereoRig rig;
    read(j, "baseline", rig.baseline);
    read(j, "focal", rig.focal);
    read(j, "cx", rig.cx);
    read(j, "cy", rig.cy);
    read(j, "width", rig.width);
    read(j, "height", rig.height);
    return rig;
  });
}

stereo::ObstacleParams obstacle_params_from_json(const json& j) {
  return guarded([&] {
    stereo::ObstacleParams p;
    read(j, "window", p.window);
    read(j, "max_disparity", p.max_disparity);
    read(j, "step", p.step);
    read(j, "voxel", p.voxel);
    read(j, "min_points_per_voxel", p.min_points_per_voxel);
    read(j, "ransac_iterations", p.ransac_iterations);
    read(j, "inlier_dist", p.inlier_dist);
    read(j, "protrusion", p.protrusion);
    read(j, "link_dist", p.link_dist);
    read(j, "min_size", p.min_size);
    read(j, "min_inlier_ratio", p.min_inlier_ratio);
    if (j.contains("up")) p.up = vec3_from_json(j.at("up"));
    read(j, "seed", p.seed);
    return p;
  });
}

json to_json(const stereo::ObstacleResult& r) {
  json clusters = json::array();
  for (const auto& c : r.clusters) {
    clusters.push_back({{"centroid", to_json(c.centroid)},
                        {"min", to_json(c.min)},
                        {"max", to_json(c.max)},
                        {"point_count", c.point_count},
                        {"max_protrusion", c.max_protrusion}});
  }
  return {{"plane",
           {{"normal", to_json(r.plane.normal)},
            {"offset", r.plane.offset},
            {"inlier_count", r.plane.inlier_count},
            {"inlier_ratio", r.plane.inlier_ratio},
            {"confident", r.plane_confident}}},
          {"clusters", clusters},
          {"cloud_size", r.cloud.size()}};
}

json to_json(const Scene& scene) {
  json obstacles = json::array();
  for (const auto& o : scene.obstacles) {
    obstacles.push_back({{"position", to_json(o.position)}, {"radius", o.radius}, {"height", o.height}});
  }
  return {{"field", to_json(scene.field)},
          {"robot", to_json(scene.robot)},
          {"intrinsics", to_json(scene.intrinsics)},
          {"camera", to_json(scene.camera)},
          {"overhead", scene.overhead},
          {"overhead_view", to_json(scene.overhead_view)},
          {"obstacles", obstacles},
          {"noise_sigma", scene.noise_sigma},
          {"seed", scene.seed}};
}

Scene scene_from_json(const json& j) {
  Scene scene;
  guarded([&] {
    require_object(j, "scene");
    if (j.contains("field")) scene.field = field_from_json(j.at("field"));
    if (j.contains("robot")) scene.robot = pose_from_json(j.at("robot"));
    if (j.contains("intrinsics")) scene.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    if (j.contains("camera")) scene.camera = extrinsics_from_json(j.at("camera"));
    read(j, "overhead", scene.overhead);
    if (j.contains("overhead_view")) scene.overhead_view = birdview_from_json(j.at("overhead_view"));
    if (j.contains("obstacles")) {
      for (const auto& o : j.at("obstacles")) {
        Obstacle ob;
        if (o.contains("position")) ob.position = vec2_from_json(o.at("position"));
        read(o, "radius", ob.radius);
        read(o, "height", ob.height);
        scene.obstacles.push_back(ob);
      }
    }
    read(j, "noise_sigma", scene.noise_sigma);
    read(j, "seed", scene.seed);
    return 0;
  });
  return scene;
}

}  // namespace fieldkit::io
