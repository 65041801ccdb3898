#pragma once

#include <cstdint>
#include <vector>

#include "fieldkit/localization.hpp"

namespace fieldkit {

struct TrajectoryStep {
  FieldPose odometry;  ///< reported motion in the previous robot frame (noisy)
  std::vector<RobotObservation> observations;
  FieldPose truth;
};

struct TrajectoryConfig {
  FieldPose start;
  std::size_t steps = 50;
  double step_length = 0.1;  ///< m per step
  double max_turn = 0.2;     ///< rad per step
  OdometryNoise odometry_noise;
  ObservationSigmas observation_sigmas;
  bool observation_noise = true;
  double max_range = 3.0;
  std::uint64_t seed = 1;
};

/// Seeded random walk that turns back toward the center near the border.
/// Each step moves, then observes from the new pose.
std::vector<TrajectoryStep> generate_trajectory(const FieldSpec& spec, const TrajectoryConfig& config);

/// Observation with Gaussian noise at the given sigmas.
RobotObservation perturb(const RobotObservation& obs, const ObservationSigmas& sigmas, std::mt19937_64& rng);

}  // namespace fieldkit
