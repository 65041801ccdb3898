#include "fieldkit/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Geometry>

#include "fieldkit/error.hpp"

namespace fieldkit {

namespace {

constexpr double kTextureCell = 0.015;  // m
constexpr double kTextureAmplitude = 70.0;

Vec2 robot_to_world(const Vec2& p, const FieldPose& robot) {
  const double c = std::cos(robot.theta);
  const double s = std::sin(robot.theta);
  return {robot.x + c * p.x() - s * p.y(), robot.y + s * p.x() + c * p.y()};
}

Vec2 world_to_robot(const Vec2& p, const FieldPose& robot) {
  const double c = std::cos(robot.theta);
  const double s = std::sin(robot.theta);
  const Vec2 d = p - robot.position();
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

// Entry distance of a ray into a box, if it hits.
std::optional<double> hit_box(const Vec3& origin, const Vec3& dir, const Obstacle& box) {
  const Vec3 lo(box.position.x() - box.radius, box.position.y() - box.radius, 0.0);
  const Vec3 hi(box.position.x() + box.radius, box.position.y() + box.radius, box.height);
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::fabs(dir[a]) < 1e-15) {
      if (origin[a] < lo[a] || origin[a] > hi[a]) return std::nullopt;
      continue;
    }
    double ta = (lo[a] - origin[a]) / dir[a];
    double tb = (hi[a] - origin[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

std::uint64_t mix(std::uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

double lattice(std::int64_t x, std::int64_t y, std::int64_t z) {
  std::uint64_t h = mix(static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ULL);
  h = mix(h ^ (static_cast<std::uint64_t>(y) * 0xC2B2AE3D27D4EB4FULL));
  h = mix(h ^ (static_cast<std::uint64_t>(z) * 0x165667B19E3779F9ULL));
  return static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53);
}

// Trilinear value noise in [0, 1).
double texture(const Vec3& p) {
  const Vec3 q = p / kTextureCell;
  const double fx = std::floor(q.x());
  const double fy = std::floor(q.y());
  const double fz = std::floor(q.z());
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double tx = q.x() - fx;
  const double ty = q.y() - fy;
  const double tz = q.z() - fz;
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty) * (dz ? tz : 1.0 - tz);
        acc += w * lattice(ix + dx, iy + dy, iz + dz);
      }
    }
  }
  return acc;
}

struct Hit {
  Rgb color;
  Vec3 point;
  bool surface = false;
};

Hit trace(const Scene& scene, const Vec3& origin, const Vec3& dir) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& box : scene.obstacles) {
    const auto t = hit_box(origin, dir, box);
    if (t && *t < best) best = *t;
  }
  if (dir.z() < -1e-12) {
    const double t = -origin.z() / dir.z();
    if (t > 0.0 && t < best) {
      const Vec3 p = origin + t * dir;
      const Vec2 g(p.x(), p.y());
      return {on_line(g, scene.field) ? scene.palette.line : scene.palette.grass, p, true};
    }
  }
  if (std::isfinite(best)) return {scene.palette.obstacle, origin + best * dir, true};
  return {scene.palette.background, origin, false};
}

Image render_perspective(const Scene& scene, const CameraIntrinsics& in, const CameraExtrinsics& cam, bool textured) {
  in.validate();
  const Eigen::Matrix3d r = cam.rotation();
  Image img(in.width, in.height, textured ? 1 : 3);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      const Vec2 xn = undistort_normalized(pixel_to_normalized(Vec2(x + 0.5, y + 0.5), in), in);
      const Vec3 dir = (r * Vec3(xn.x(), xn.y(), 1.0)).normalized();
      const Hit hit = trace(scene, cam.position, dir);
      if (!textured) {
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = hit.color[c];
        continue;
      }
      double gray = (hit.color[0] + hit.color[1] + hit.color[2]) / 3.0;
      if (hit.surface) gray += kTextureAmplitude * (texture(hit.point) - 0.5);
      img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(gray), 0L, 255L));
    }
  }
  return img;
}

}  // namespace

CameraExtrinsics world_camera(const Scene& scene) {
  CameraExtrinsics w = scene.camera;
  const Vec2 xy = robot_to_world(Vec2(scene.camera.position.x(), scene.camera.position.y()), scene.robot);
  w.position = Vec3(xy.x(), xy.y(), scene.camera.position.z());
  w.yaw = scene.camera.yaw + scene.robot.theta;
  return w;
}

bool on_line(const Vec2& ground, const FieldSpec& field) {
  const double half = field.line_width / 2.0;
  for (const auto& seg : field.line_segments) {
    if (point_segment_distance(ground, seg.a, seg.b) <= half) return true;
  }
  return std::fabs((ground - field.circle.center).norm() - field.circle.radius) <= half;
}

void add_noise(Image& image, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw Error(ErrorKind::InvalidArgument, "noise sigma must be non-negative");
  if (sigma == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (auto& v : image.data()) {
    v = static_cast<std::uint8_t>(std::clamp(std::lround(v + gauss(rng)), 0L, 255L));
  }
}

Image render_field(const Scene& scene) {
  Image img;
  if (scene.overhead) {
    const BirdviewSpec& view = scene.overhead_view;
    if (view.out_width <= 0 || view.out_height <= 0 || !(view.meters_per_pixel > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "invalid overhead view");
    }
    img = Image(view.out_width, view.out_height, 3);
    for (int y = 0; y < view.out_height; ++y) {
      for (int x = 0; x < view.out_width; ++x) {
        const Vec2 g = robot_to_world(view.ground_point(Vec2(x + 0.5, y + 0.5)), scene.robot);
        Rgb color = on_line(g, scene.field) ? scene.palette.line : scene.palette.grass;
        for (const auto& box : scene.obstacles) {
          if (std::fabs(g.x() - box.position.x()) <= box.radius && std::fabs(g.y() - box.position.y()) <= box.radius) {
            color = scene.palette.obstacle;
          }
        }
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[c];
      }
    }
  } else {
    if (!(scene.camera.position.z() > 0.0)) throw Error(ErrorKind::InvalidArgument, "camera must be above the ground");
    img = render_perspective(scene, scene.intrinsics, world_camera(scene), false);
  }
  add_noise(img, scene.noise_sigma, scene.seed);
  return img;
}

CameraIntrinsics rig_intrinsics(const stereo::StereoRig& rig) {
  CameraIntrinsics in;
  in.fx = rig.focal;
  in.fy = rig.focal;
  in.cx = rig.cx + 0.5;
  in.cy = rig.cy + 0.5;
  in.width = rig.width;
  in.height = rig.height;
  return in;
}

std::pair<Image, Image> render_stereo(const Scene& scene, const stereo::StereoRig& rig) {
  if (!(rig.baseline >= 0.0 && rig.focal > 0.0)) throw Error(ErrorKind::InvalidArgument, "invalid rig");
  if (!(scene.camera.position.z() > 0.0)) throw Error(ErrorKind::InvalidArgument, "camera must be above the ground");
  const CameraIntrinsics in = rig_intrinsics(rig);
  const CameraExtrinsics left = world_camera(scene);
  CameraExtrinsics right = left;
  right.position += left.rotation() * Vec3(rig.baseline, 0.0, 0.0);
  Image l = render_perspective(scene, in, left, true);
  Image r = render_perspective(scene, in, right, true);
  add_noise(l, scene.noise_sigma, scene.seed);
  add_noise(r, scene.noise_sigma, scene.seed + 1);
  return {std::move(l), std::move(r)};
}

std::vector<Segment2> overhead_ground_truth(const Scene& scene, double margin) {
  const BirdviewSpec& view = scene.overhead_view;
  const double lo_x = margin;
  const double lo_y = margin;
  const double hi_x = view.out_width - margin;
  const double hi_y = view.out_height - margin;
  std::vector<Segment2> out;
  for (const auto& seg : scene.field.line_segments) {
    const Vec2 a = view.pixel_of(world_to_robot(seg.a, scene.robot));
    const Vec2 b = view.pixel_of(world_to_robot(seg.b, scene.robot));
    // Liang-Barsky clipping.
    const Vec2 d = b - a;
    double t0 = 0.0;
    double t1 = 1.0;
    bool inside = true;
    const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
    const double q[4] = {a.x() - lo_x, hi_x - a.x(), a.y() - lo_y, hi_y - a.y()};
    for (int i = 0; i < 4 && inside; ++i) {
      if (std::fabs(p[i]) < 1e-15) {
        inside = q[i] >= 0.0;
        continue;
      }
      const double t = q[i] / p[i];
      if (p[i] < 0.0) {
        t0 = std::max(t0, t);
      } else {
        t1 = std::min(t1, t);
      }
      inside = t0 <= t1;
    }
    if (inside && t1 > t0) out.push_back({a + t0 * d, a + t1 * d});
  }
  return out;
}

Image draw_plan(const FieldSpec& field, const PlanContext& ctx, const BallPlan& plan, double meters_per_pixel) {
  if (!(meters_per_pixel > 0.0)) throw Error(ErrorKind::InvalidArgument, "meters_per_pixel must be positive");
  Scene scene;
  scene.field = field;
  scene.overhead = true;
  scene.overhead_view.meters_per_pixel = meters_per_pixel;
  scene.overhead_view.out_width = static_cast<int>(std::ceil((field.length + 1.0) / meters_per_pixel));
  scene.overhead_view.out_height = static_cast<int>(std::ceil((field.width + 1.0) / meters_per_pixel));
  Image img = render_field(scene);
  const BirdviewSpec& view = scene.overhead_view;
  const double r = 0.12 / meters_per_pixel;
  for (std::size_t k = 1; k < plan.waypoints.size(); ++k) {
    draw_line(img, view.pixel_of(plan.waypoints[k - 1]), view.pixel_of(plan.waypoints[k]), {255, 200, 0}, 3);
  }
  for (const auto& w : plan.waypoints) draw_disc(img, view.pixel_of(w), r * 0.4, {255, 200, 0});
  for (const auto& o : ctx.opponents) draw_disc(img, view.pixel_of(o), ctx.opponent_radius / meters_per_pixel, {200, 40, 40});
  for (const auto& t : ctx.teammates) draw_disc(img, view.pixel_of(t.position()), r, {40, 80, 220});
  draw_disc(img, view.pixel_of(ctx.robot.position()), r, {20, 20, 120});
  draw_disc(img, view.pixel_of(ctx.ball), r * 0.6, {255, 120, 0});
  return img;
}

}  // namespace fieldkit
