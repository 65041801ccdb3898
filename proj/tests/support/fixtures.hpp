#pragma once

// Fixture generators and independent reference computations shared by the
// unit tests and the acceptance runner.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fieldkit/ball_planner.hpp"
#include "fieldkit/error.hpp"
#include "fieldkit/line_vision.hpp"
#include "fieldkit/localization.hpp"
#include "fieldkit/pipeline.hpp"
#include "fieldkit/render.hpp"
#include "fieldkit/stereo.hpp"

namespace fkt {

using fieldkit::Vec2;
using fieldkit::Vec3;

/// Kind of the fieldkit::Error thrown by f, or nothing if it returns.
template <class F>
std::optional<fieldkit::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const fieldkit::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// ---- planner ----

/// Ball, robot, up to 3 opponents and up to 2 teammates, all on the field.
fieldkit::PlanContext random_plan_context(std::uint64_t seed, const fieldkit::FieldSpec& spec);

/// Plain Dijkstra over an adjacency built by testing every offset against
/// the kick annuli directly; costs from compute_cost.
double dijkstra_reference(const fieldkit::PlanContext& ctx, const fieldkit::FieldSpec& spec);

// ---- line vision ----

struct LineCorpusImage {
  fieldkit::Scene scene;
  fieldkit::Image image;
  std::vector<fieldkit::Segment2> truth;  ///< pixel coordinates, clipped, >= min length
};

/// Overhead render at 0.01 m/px, 640 x 480, from a seeded robot pose, with noise.
LineCorpusImage line_corpus_image(std::uint64_t seed, double noise_sigma, double min_length_px);

struct LineMatchTolerance {
  double distance_px = 2.0;
  double angle_rad = 2.0 * 3.14159265358979323846 / 180.0;
  double min_coverage = 0.5;
};

/// A detection matches a truth segment when the directions agree, the truth
/// midpoint lies close to the detected line, and the detection covers enough
/// of the truth segment.
bool line_matches(const fieldkit::Segment2& truth, const fieldkit::lines::LineSegment& detected,
                  const LineMatchTolerance& tol);

/// Gray image with white segments of the given width on a dark-green background.
fieldkit::Image paint_segments(int width, int height, const std::vector<fieldkit::Segment2>& segs, double line_width);

// ---- localization ----

struct ConvergenceRun {
  int updates_to_converge = -1;  ///< -1 if never within tolerance
  double final_error_xy = 0.0;
  double final_error_theta = 0.0;
};

/// Uniform start over the own half, trajectory with noisy observations.
ConvergenceRun localization_convergence(std::uint64_t seed, int max_updates, std::size_t particles);

struct Spread {
  double sigma_xy = 0.0;
  double sigma_theta = 0.0;
};

struct AmbiguityRun {
  Spread corner;
  Spread line;
  Spread point;
};

/// Posterior spread near the true pose after one update with a single
/// observation of each kind, from a uniform particle set over the field.
AmbiguityRun localization_ambiguity(std::uint64_t seed, std::size_t particles, double radius = 1.0,
                                    double angle_window = 3.14159265358979323846 / 4);

/// Weighted spread of the particles within the window around `truth`.
Spread local_spread(const std::vector<fieldkit::Particle>& particles, const fieldkit::FieldPose& truth,
                    double radius, double angle_window);

// ---- pipeline ----

/// Random acyclic pipeline: each filter produces one slot and consumes a
/// random subset of the source slots and earlier filters' slots.
fieldkit::pipeline::PipelineSpec random_pipeline(std::uint64_t seed, int min_filters, int max_filters);

// ---- stereo ----

/// Points on z = 0 (noise sigma) plus a fraction of outliers at z in [0.2, 0.5].
fieldkit::stereo::PointCloud noisy_plane_cloud(std::uint64_t seed, std::size_t count, double sigma,
                                               double outlier_fraction);

struct TwoRobotScene {
  fieldkit::stereo::PointCloud cloud;
  std::vector<Vec3> truth_centroids;  ///< centroid of each robot's protruding points
};

/// Ground grid plus two cylinders ("robots") standing `separation` apart, z up.
TwoRobotScene two_robot_cloud(std::uint64_t seed, double separation, double protrusion);

}  // namespace fkt
