#pragma once

#include <Eigen/Core>

#include "fieldkit/geometry.hpp"
#include "fieldkit/image.hpp"

namespace fieldkit {

/// Pinhole intrinsics with a two-coefficient radial model
/// r_d = r (1 + k1 r^2 + k2 r^4) on normalized image coordinates.
/// Pixel coordinates are continuous; pixel (x, y) has its center at (x + 0.5, y + 0.5).
struct CameraIntrinsics {
  double fx = 300.0;
  double fy = 300.0;
  double cx = 320.0;
  double cy = 240.0;
  double k1 = 0.0;
  double k2 = 0.0;
  int width = 640;
  int height = 480;

  /// Rejects non-positive focal lengths, a principal point outside the image,
  /// and distortion that is not strictly increasing up to the image corners.
  void validate() const;

  bool has_distortion() const { return k1 != 0.0 || k2 != 0.0; }
};

/// Camera pose. Camera axes: x right, y down, z forward. With all angles zero
/// the camera looks along +x of its parent frame with the image top toward +z;
/// positive pitch tilts it toward the ground, yaw turns it about +z.
struct CameraExtrinsics {
  Vec3 position{0.0, 0.0, 0.5};
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  /// Camera-to-parent rotation.
  Eigen::Matrix3d rotation() const;
};

/// Virtual top-down camera. Output column grows with x, output row grows with -y.
struct BirdviewSpec {
  int out_width = 640;
  int out_height = 480;
  double meters_per_pixel = 0.01;
  Vec2 view_center{0.0, 0.0};

  Vec2 ground_point(const Vec2& pixel) const;
  Vec2 pixel_of(const Vec2& ground) const;
};

enum class Sampling { Nearest, Bilinear };

/// Radial model on normalized coordinates.
Vec2 distort_normalized(const Vec2& undistorted, const CameraIntrinsics& in);
/// Newton inversion of the radial model on the radius (at most 20 iterations).
Vec2 undistort_normalized(const Vec2& distorted, const CameraIntrinsics& in);

Vec2 normalized_to_pixel(const Vec2& normalized, const CameraIntrinsics& in);
Vec2 pixel_to_normalized(const Vec2& pixel, const CameraIntrinsics& in);

/// World (parent-frame) point to distorted pixel. Throws BehindCamera.
Vec2 project(const Vec3& point, const CameraExtrinsics& ex, const CameraIntrinsics& in);

/// Unit ray direction in the parent frame through a (distorted) pixel.
Vec3 pixel_ray(const Vec2& pixel, const CameraExtrinsics& ex, const CameraIntrinsics& in);

/// Intersection of a pixel's ray with the ground plane z = 0. Throws HorizonRay.
Vec2 unproject_to_ground(const Vec2& pixel, const CameraExtrinsics& ex, const CameraIntrinsics& in);

/// Resamples an image into a top-down view of the ground plane. Every output
/// pixel maps to a ground point that is projected straight into the input
/// image, so no rectified full-resolution image is ever built. Output pixels
/// with no source data are black.
Image birdview_transform(const Image& input, const CameraExtrinsics& ex, const CameraIntrinsics& in,
                         const BirdviewSpec& spec, Sampling sampling = Sampling::Nearest);

/// Applies radial distortion (k1, k2) to an image rendered with the
/// rectilinear intrinsics, by inverse sampling. Unmapped pixels are black.
Image emulate_wide_angle(const Image& input, const CameraIntrinsics& rectilinear, double k1, double k2);

/// Forward mapping used by emulate_wide_angle: rectilinear pixel to distorted pixel.
Vec2 distort_pixel(const Vec2& pixel, const CameraIntrinsics& rectilinear, double k1, double k2);

/// Angle between a pixel's (undistorted) ray and the optical axis.
double ray_angle(const Vec2& pixel, const CameraIntrinsics& in);

/// Largest ray angle over the image corners, doubled: the diagonal field of view.
double full_fov(const CameraIntrinsics& in);

/// 255 where the ray angle is within fov_limit / 2, 0 elsewhere.
Image fov_mask(const CameraIntrinsics& in, double fov_limit);

/// Blacks out every pixel where the mask is zero.
void apply_mask(Image& image, const Image& mask);

}  // namespace fieldkit
