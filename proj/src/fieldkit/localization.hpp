#pragma once

#include <limits>
#include <random>
#include <vector>

#include "fieldkit/field_model.hpp"

namespace fieldkit {

struct Particle {
  FieldPose pose;
  double weight = 1.0;
};

enum class ObservationKind { Line, Corner, PointFeature };

/// Something seen from the robot, in robot coordinates (x forward, y left).
/// Line: the line is {p : n . p = distance} with n = (-sin direction, cos direction).
/// Corner: position plus the orientation of the bisector of its two arms.
/// PointFeature: position only.
struct RobotObservation {
  ObservationKind kind = ObservationKind::Line;
  double distance = 0.0;
  double direction = 0.0;  ///< [0, pi)
  Vec2 position{0.0, 0.0};
  double orientation = 0.0;

  static RobotObservation line(double distance, double direction);
  static RobotObservation corner(const Vec2& position, double orientation);
  static RobotObservation point(const Vec2& position);
};

struct ObservationSigmas {
  double distance = 0.15;  ///< m, line distance
  double position = 0.2;   ///< m, corner and point positions
  double angle = 0.15;     ///< rad, line direction and corner orientation
};

struct OdometryNoise {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// Composes a robot-frame motion onto a pose.
FieldPose compose(const FieldPose& pose, const FieldPose& delta);

void predict(std::vector<Particle>& particles, const FieldPose& odometry, const OdometryNoise& noise,
             std::mt19937_64& rng);

/// Lines whose segment comes within max_range of the robot, then corner
/// observations (1/2/4 per L/T/X junction) within max_range.
std::vector<RobotObservation> expected_observations(const FieldPose& pose, const FieldSpec& spec,
                                                    double max_range);

/// Goal posts within max_range as point features.
std::vector<RobotObservation> expected_point_features(const FieldPose& pose, const FieldSpec& spec,
                                                      double max_range);

/// Layout features in field coordinates, prepared once for fast scoring.
/// Only landmarks within `visibility` of the pose can be matched (for lines,
/// the closest point of the segment), so a pose is never credited with a
/// landmark it could not have seen.
class LandmarkMap {
 public:
  explicit LandmarkMap(const FieldSpec& spec, double visibility = std::numeric_limits<double>::infinity());

  /// Squared normalized residual to the best-matching visible landmark of
  /// the observation's kind, or +inf when there is none.
  double best_residual2(const RobotObservation& obs, const FieldPose& pose, const ObservationSigmas& s) const;

 private:
  struct Line {
    double direction;  // [0, pi)
    double offset;     // n . p for points on the line
    Segment2 segment;
  };
  struct Corner {
    Vec2 position;
    double orientation;
  };
  std::vector<Line> lines_;
  std::vector<Corner> corners_;
  std::vector<Vec2> points_;
  double visibility_;
};

/// exp(-r^2 / 2) on the best-matching residual; residuals past 3 sigma are
/// treated as clutter and score exp(-4.5).
double observation_likelihood(const RobotObservation& obs, const FieldPose& pose, const LandmarkMap& map,
                              const ObservationSigmas& sigmas);
double observation_likelihood(const RobotObservation& obs, const FieldPose& pose, const FieldSpec& spec,
                              const ObservationSigmas& sigmas);

/// Multiplies in the likelihoods and normalizes. Resamples (systematic) when
/// the effective sample size falls below half the particle count, which also
/// resets weights to 1/N. Throws Degenerate when no particle keeps any weight.
/// Returns true when resampling happened.
/// If `mean_fit` is given it receives the weighted mean over particles of the
/// per-observation geometric mean likelihood (1 with no observations).
bool update_and_resample(std::vector<Particle>& particles, const std::vector<RobotObservation>& observations,
                         const LandmarkMap& map, const ObservationSigmas& sigmas, std::mt19937_64& rng,
                         double* mean_fit = nullptr);

/// Systematic resampling with one uniform draw.
void systematic_resample(std::vector<Particle>& particles, std::mt19937_64& rng);

double effective_sample_size(const std::vector<Particle>& particles);

struct PoseEstimate {
  FieldPose pose;
  double sigma_xy = 0.0;     ///< sqrt of weighted mean squared distance to the mean position
  double sigma_theta = 0.0;  ///< circular standard deviation sqrt(-2 ln R)
};

PoseEstimate estimate_pose(const std::vector<Particle>& particles);

struct Region {
  double x_min = -4.5;
  double x_max = 4.5;
  double y_min = -3.0;
  double y_max = 3.0;
};

/// Uniform positions in the region, uniform heading, equal weights.
std::vector<Particle> uniform_particles(std::size_t count, const Region& region, std::mt19937_64& rng);

struct FilterConfig {
  std::size_t particles = 500;
  ObservationSigmas sigmas;
  OdometryNoise odometry_noise{0.02, 0.02, 0.02};
  double match_range = 4.0;  ///< m, landmark visibility when scoring particles
  /// Sensor resetting: when the short-term observation fit falls below the
  /// long-term one, up to this fraction of particles is redrawn from poses
  /// that explain a seen corner. 0 disables it.
  double reset_max_fraction = 0.1;
  double fit_rate_slow = 0.05;
  double fit_rate_fast = 0.5;
};

class ParticleFilter {
 public:
  ParticleFilter(const FieldSpec& spec, const FilterConfig& config, std::uint64_t seed);

  void reset(const Region& region);
  void step(const FieldPose& odometry, const std::vector<RobotObservation>& observations);
  PoseEstimate estimate() const { return estimate_pose(particles_); }
  const std::vector<Particle>& particles() const { return particles_; }
  /// Particles redrawn by sensor resetting in the last step.
  std::size_t last_injected() const { return last_injected_; }

 private:
  FieldPose corner_hypothesis(const RobotObservation& corner);
  void inject(const std::vector<RobotObservation>& observations);

  LandmarkMap map_;
  FilterConfig config_;
  std::mt19937_64 rng_;
  std::vector<Particle> particles_;
  std::vector<FieldCorner> corners_;
  Region field_;
  double fit_slow_ = 0.0;
  double fit_fast_ = 0.0;
  bool fit_started_ = false;
  std::size_t last_injected_ = 0;
};

}  // namespace fieldkit
