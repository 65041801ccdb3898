#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fieldkit/ball_planner.hpp"
#include "fieldkit/camera.hpp"
#include "fieldkit/field_model.hpp"
#include "fieldkit/image.hpp"
#include "fieldkit/stereo.hpp"

namespace fieldkit {

/// Axis-aligned box standing on the ground: square footprint of half-size
/// `radius` around `position`.
struct Obstacle {
  Vec2 position{0.0, 0.0};
  double radius = 0.1;
  double height = 0.3;
};

struct Palette {
  Rgb grass{50, 140, 50};
  Rgb line{230, 230, 230};
  Rgb obstacle{128, 128, 128};
  Rgb background{30, 30, 40};
};

/// Everything the renderer needs. The camera pose is relative to the robot
/// (x forward, y left, z up). With `overhead` set the image is instead an
/// orthographic top-down view described by `overhead_view` in robot coordinates.
struct Scene {
  FieldSpec field = FieldSpec::kidsize();
  FieldPose robot;
  CameraIntrinsics intrinsics;
  CameraExtrinsics camera;
  bool overhead = false;
  BirdviewSpec overhead_view;
  std::vector<Obstacle> obstacles;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  Palette palette;
};

/// Camera pose in field coordinates.
CameraExtrinsics world_camera(const Scene& scene);

/// True when the ground point lies on painted line (within half the line width).
bool on_line(const Vec2& ground, const FieldSpec& field);

/// Flat-shaded RGB render with additive Gaussian noise (seeded).
Image render_field(const Scene& scene);

/// Adds N(0, sigma) to every channel, rounds and clamps; no-op for sigma 0.
void add_noise(Image& image, double sigma, std::uint64_t seed);

/// Gray render pair from two cameras `rig.baseline` apart along the camera x
/// axis, surfaces carrying a fixed value-noise texture so that block matching
/// has something to lock onto. The rig replaces the scene intrinsics.
std::pair<Image, Image> render_stereo(const Scene& scene, const stereo::StereoRig& rig);

/// Intrinsics equivalent to a rig (principal point moved to pixel-center convention).
CameraIntrinsics rig_intrinsics(const stereo::StereoRig& rig);

/// Field segments and the visible part of each one in an overhead render:
/// segment clipped to the image shrunk by `margin` pixels, in pixel coordinates.
std::vector<Segment2> overhead_ground_truth(const Scene& scene, double margin);

/// Top-down drawing of the whole field with the plan's kicks, the ball,
/// teammates and opponents on top.
Image draw_plan(const FieldSpec& field, const PlanContext& ctx, const BallPlan& plan, double meters_per_pixel);

}  // namespace fieldkit
