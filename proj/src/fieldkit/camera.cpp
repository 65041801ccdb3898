#include "fieldkit/camera.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Geometry>

#include "fieldkit/error.hpp"

namespace fieldkit {

namespace {

double radial_factor(double r2, double k1, double k2) { return 1.0 + k1 * r2 + k2 * r2 * r2; }

// d/dr of r * (1 + k1 r^2 + k2 r^4)
double radial_slope(double r, double k1, double k2) {
  const double r2 = r * r;
  return 1.0 + 3.0 * k1 * r2 + 5.0 * k2 * r2 * r2;
}

std::optional<Vec2> try_project(const Vec3& point, const Eigen::Matrix3d& r_wc, const Vec3& origin,
                                const CameraIntrinsics& in) {
  const Vec3 pc = r_wc.transpose() * (point - origin);
  if (pc.z() <= 1e-9) return std::nullopt;
  const Vec2 xn(pc.x() / pc.z(), pc.y() / pc.z());
  if (in.has_distortion() && radial_slope(xn.norm(), in.k1, in.k2) <= 0.0) return std::nullopt;
  return normalized_to_pixel(distort_normalized(xn, in), in);
}

std::uint8_t lerp_channel(const Image& img, double u, double v, int c) {
  // u, v in pixel-center coordinates (center of pixel x is x).
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const double fx = u - x0;
  const double fy = v - y0;
  auto px = [&](int x, int y) {
    x = std::clamp(x, 0, img.width() - 1);
    y = std::clamp(y, 0, img.height() - 1);
    return static_cast<double>(img.at(x, y, c));
  };
  const double top = px(x0, y0) * (1.0 - fx) + px(x0 + 1, y0) * fx;
  const double bot = px(x0, y0 + 1) * (1.0 - fx) + px(x0 + 1, y0 + 1) * fx;
  return static_cast<std::uint8_t>(std::lround(top * (1.0 - fy) + bot * fy));
}

void sample_into(Image& out, int ox, int oy, const Image& src, const Vec2& uv, Sampling sampling) {
  if (uv.x() < 0.0 || uv.y() < 0.0 || uv.x() >= src.width() || uv.y() >= src.height()) return;
  for (int c = 0; c < src.channels(); ++c) {
    if (sampling == Sampling::Nearest) {
      out.at(ox, oy, c) = src.at(static_cast<int>(uv.x()), static_cast<int>(uv.y()), c);
    } else {
      out.at(ox, oy, c) = lerp_channel(src, uv.x() - 0.5, uv.y() - 0.5, c);
    }
  }
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw Error(ErrorKind::InvalidArgument, "focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "image size must be positive");
  if (cx < 0.0 || cy < 0.0 || cx > width || cy > height) {
    throw Error(ErrorKind::InvalidArgument, "principal point must lie inside the image");
  }
  if (!has_distortion()) return;
  double corner = 0.0;
  for (const Vec2& p : {Vec2(0, 0), Vec2(width, 0), Vec2(0, height), Vec2(width, height)}) {
    corner = std::max(corner, pixel_to_normalized(p, *this).norm());
  }
  // Walk the undistorted radius until its image reaches the farthest corner.
  constexpr double kStep = 1e-3;
  for (double r = 0.0;; r += kStep) {
    if (radial_slope(r, k1, k2) <= 0.0) {
      throw Error(ErrorKind::InvalidDistortion, "radial distortion is not monotonic over the image");
    }
    if (r * radial_factor(r * r, k1, k2) >= corner) break;
    if (r > 50.0) throw Error(ErrorKind::InvalidDistortion, "radial distortion never reaches the image corners");
  }
}

Eigen::Matrix3d CameraExtrinsics::rotation() const {
  Eigen::Matrix3d base;
  // columns: camera x, y, z expressed in a body frame looking along +x
  base << 0.0, 0.0, 1.0,
         -1.0, 0.0, 0.0,
          0.0, -1.0, 0.0;
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  const Eigen::Matrix3d ry = Eigen::AngleAxisd(pitch, Vec3::UnitY()).toRotationMatrix();
  const Eigen::Matrix3d rx = Eigen::AngleAxisd(roll, Vec3::UnitX()).toRotationMatrix();
  return rz * ry * rx * base;
}

Vec2 BirdviewSpec::ground_point(const Vec2& pixel) const {
  return {view_center.x() + (pixel.x() - out_width / 2.0) * meters_per_pixel,
          view_center.y() - (pixel.y() - out_height / 2.0) * meters_per_pixel};
}

Vec2 BirdviewSpec::pixel_of(const Vec2& ground) const {
  return {(ground.x() - view_center.x()) / meters_per_pixel + out_width / 2.0,
          -(ground.y() - view_center.y()) / meters_per_pixel + out_height / 2.0};
}

Vec2 distort_normalized(const Vec2& undistorted, const CameraIntrinsics& in) {
  return undistorted * radial_factor(undistorted.squaredNorm(), in.k1, in.k2);
}

Vec2 undistort_normalized(const Vec2& distorted, const CameraIntrinsics& in) {
  const double rd = distorted.norm();
  if (!in.has_distortion() || rd < 1e-15) return distorted;
  double r = rd;
  for (int i = 0; i < 20; ++i) {
    const double slope = radial_slope(r, in.k1, in.k2);
    if (slope <= 0.0) throw Error(ErrorKind::InvalidDistortion, "undistortion left the monotonic domain");
    const double step = (r * radial_factor(r * r, in.k1, in.k2) - rd) / slope;
    r -= step;
    if (std::fabs(step) <= 1e-15 * std::max(1.0, r)) break;
  }
  if (std::fabs(r * radial_factor(r * r, in.k1, in.k2) - rd) > 1e-8) {
    throw Error(ErrorKind::InvalidDistortion, "undistortion did not converge");
  }
  return distorted * (r / rd);
}

Vec2 normalized_to_pixel(const Vec2& normalized, const CameraIntrinsics& in) {
  return {in.fx * normalized.x() + in.cx, in.fy * normalized.y() + in.cy};
}

Vec2 pixel_to_normalized(const Vec2& pixel, const CameraIntrinsics& in) {
  return {(pixel.x() - in.cx) / in.fx, (pixel.y() - in.cy) / in.fy};
}

Vec2 project(const Vec3& point, const CameraExtrinsics& ex, const CameraIntrinsics& in) {
  const Vec3 pc = ex.rotation().transpose() * (point - ex.position);
  if (pc.z() <= 1e-9) throw Error(ErrorKind::BehindCamera, "point is behind the camera");
  const Vec2 xn(pc.x() / pc.z(), pc.y() / pc.z());
  return normalized_to_pixel(distort_normalized(xn, in), in);
}

Vec3 pixel_ray(const Vec2& pixel, const CameraExtrinsics& ex, const CameraIntrinsics& in) {
  const Vec2 xn = undistort_normalized(pixel_to_normalized(pixel, in), in);
  return (ex.rotation() * Vec3(xn.x(), xn.y(), 1.0)).normalized();
}

Vec2 unproject_to_ground(const Vec2& pixel, const CameraExtrinsics& ex, const CameraIntrinsics& in) {
  if (!(ex.position.z() > 0.0)) throw Error(ErrorKind::InvalidArgument, "camera must be above the ground");
  const Vec3 d = pixel_ray(pixel, ex, in);
  if (d.z() >= -1e-12) throw Error(ErrorKind::HorizonRay, "pixel ray does not hit the ground");
  const double t = -ex.position.z() / d.z();
  const Vec3 hit = ex.position + t * d;
  return {hit.x(), hit.y()};
}

Image birdview_transform(const Image& input, const CameraExtrinsics& ex, const CameraIntrinsics& in,
                         const BirdviewSpec& spec, Sampling sampling) {
  if (!(ex.position.z() > 0.0)) throw Error(ErrorKind::InvalidArgument, "camera must be above the ground");
  if (spec.out_width <= 0 || spec.out_height <= 0 || !(spec.meters_per_pixel > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid birdview spec");
  }
  in.validate();
  const Eigen::Matrix3d r_wc = ex.rotation();
  Image out(spec.out_width, spec.out_height, input.channels());
  for (int y = 0; y < spec.out_height; ++y) {
    for (int x = 0; x < spec.out_width; ++x) {
      const Vec2 g = spec.ground_point(Vec2(x + 0.5, y + 0.5));
      const auto uv = try_project(Vec3(g.x(), g.y(), 0.0), r_wc, ex.position, in);
      if (uv) sample_into(out, x, y, input, *uv, sampling);
    }
  }
  return out;
}

Image emulate_wide_angle(const Image& input, const CameraIntrinsics& rectilinear, double k1, double k2) {
  CameraIntrinsics distorted = rectilinear;
  distorted.k1 = k1;
  distorted.k2 = k2;
  distorted.validate();
  CameraIntrinsics flat = rectilinear;
  flat.k1 = 0.0;
  flat.k2 = 0.0;
  Image out(input.width(), input.height(), input.channels());
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const Vec2 xd = pixel_to_normalized(Vec2(x + 0.5, y + 0.5), distorted);
      const Vec2 src = normalized_to_pixel(undistort_normalized(xd, distorted), flat);
      sample_into(out, x, y, input, src, Sampling::Nearest);
    }
  }
  return out;
}

Vec2 distort_pixel(const Vec2& pixel, const CameraIntrinsics& rectilinear, double k1, double k2) {
  CameraIntrinsics distorted = rectilinear;
  distorted.k1 = k1;
  distorted.k2 = k2;
  const Vec2 xn((pixel.x() - rectilinear.cx) / rectilinear.fx, (pixel.y() - rectilinear.cy) / rectilinear.fy);
  return normalized_to_pixel(distort_normalized(xn, distorted), distorted);
}

double ray_angle(const Vec2& pixel, const CameraIntrinsics& in) {
  return std::atan(undistort_normalized(pixel_to_normalized(pixel, in), in).norm());
}

double full_fov(const CameraIntrinsics& in) {
  double widest = 0.0;
  for (const Vec2& p : {Vec2(0, 0), Vec2(in.width, 0), Vec2(0, in.height), Vec2(in.width, in.height)}) {
    widest = std::max(widest, ray_angle(p, in));
  }
  return 2.0 * widest;
}

Image fov_mask(const CameraIntrinsics& in, double fov_limit) {
  in.validate();
  if (fov_limit < 0.0 || fov_limit > full_fov(in) + 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "fov_limit must lie in [0, full field of view]");
  }
  Image mask(in.width, in.height, 1);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      if (ray_angle(Vec2(x + 0.5, y + 0.5), in) <= fov_limit / 2.0) mask.at(x, y) = 255;
    }
  }
  return mask;
}

void apply_mask(Image& image, const Image& mask) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw Error(ErrorKind::DimensionMismatch, "mask size differs from image size");
  }
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (mask.at(x, y) != 0) continue;
      for (int c = 0; c < image.channels(); ++c) image.at(x, y, c) = 0;
    }
  }
}

}  // namespace fieldkit
