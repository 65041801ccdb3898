#include "fieldkit/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "fieldkit/error.hpp"

namespace fieldkit {

RobotObservation perturb(const RobotObservation& obs, const ObservationSigmas& sigmas, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  switch (obs.kind) {
    case ObservationKind::Line: {
      const double d = obs.distance + sigmas.distance * gauss(rng);
      return RobotObservation::line(d, obs.direction + sigmas.angle * gauss(rng));
    }
    case ObservationKind::Corner: {
      const double ex = sigmas.position * gauss(rng);
      const double ey = sigmas.position * gauss(rng);
      return RobotObservation::corner(obs.position + Vec2(ex, ey), obs.orientation + sigmas.angle * gauss(rng));
    }
    case ObservationKind::PointFeature: {
      const double ex = sigmas.position * gauss(rng);
      const double ey = sigmas.position * gauss(rng);
      return RobotObservation::point(obs.position + Vec2(ex, ey));
    }
  }
  return obs;
}

std::vector<TrajectoryStep> generate_trajectory(const FieldSpec& spec, const TrajectoryConfig& config) {
  if (config.steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be >= 1");
  if (config.step_length < 0.0 || config.max_turn < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "step_length and max_turn must be non-negative");
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> turn(-config.max_turn, config.max_turn);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double x_limit = spec.length / 2.0 - 0.5;
  const double y_limit = spec.width / 2.0 - 0.5;

  std::vector<TrajectoryStep> out;
  FieldPose pose = config.start;
  for (std::size_t k = 0; k < config.steps; ++k) {
    double dtheta = turn(rng);
    const FieldPose ahead = compose(pose, {config.step_length * 4.0, 0.0, dtheta});
    if (std::fabs(ahead.x) > x_limit || std::fabs(ahead.y) > y_limit) {
      // Steer toward the center, limited by the turn rate.
      const double to_center = normalize_angle(std::atan2(-pose.y, -pose.x) - pose.theta);
      dtheta = std::clamp(to_center, -std::max(config.max_turn, 0.3), std::max(config.max_turn, 0.3));
    }
    const FieldPose motion{config.step_length, 0.0, dtheta};
    pose = compose(pose, motion);

    TrajectoryStep step;
    step.truth = pose;
    step.odometry = {motion.x + config.odometry_noise.x * gauss(rng), motion.y + config.odometry_noise.y * gauss(rng),
                     motion.theta + config.odometry_noise.theta * gauss(rng)};
    for (const auto& obs : expected_observations(pose, spec, config.max_range)) {
      step.observations.push_back(config.observation_noise ? perturb(obs, config.observation_sigmas, rng) : obs);
    }
    out.push_back(std::move(step));
  }
  return out;
}

}  // namespace fieldkit
