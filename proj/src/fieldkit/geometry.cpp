#include "fieldkit/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace fieldkit {

double normalize_angle(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

double normalize_direction(double angle) {
  double a = std::fmod(angle, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

double direction_difference(double a, double b) {
  double d = std::fabs(normalize_direction(a) - normalize_direction(b));
  return std::min(d, kPi - d);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double point_line_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len = ab.norm();
  if (len == 0.0) return (p - a).norm();
  const Vec2 ap = p - a;
  return std::fabs(ab.x() * ap.y() - ab.y() * ap.x()) / len;
}

std::optional<Vec2> line_intersection(const Segment2& s, const Segment2& t) {
  const Vec2 r = s.b - s.a;
  const Vec2 q = t.b - t.a;
  const double denom = r.x() * q.y() - r.y() * q.x();
  if (std::fabs(denom) < 1e-12 * r.norm() * q.norm()) return std::nullopt;
  const Vec2 w = t.a - s.a;
  const double u = (w.x() * q.y() - w.y() * q.x()) / denom;
  return s.a + u * r;
}

namespace {

// Directions along which a segment continues away from point p (assumed on its line).
std::vector<Vec2> arms(const Segment2& s, const Vec2& p, double extend) {
  const double len = s.length();
  const Vec2 d = (s.b - s.a) / len;
  const double t = (p - s.a).dot(d);
  std::vector<Vec2> out;
  if (len - t >= extend) out.push_back(d);
  if (t >= extend) out.push_back(-d);
  return out;
}

}  // namespace

std::optional<Junction> classify_junction(const Segment2& s, const Segment2& t,
                                          const JunctionTolerance& tol) {
  if (s.length() <= 0.0 || t.length() <= 0.0) return std::nullopt;
  const Vec2 ds = s.direction();
  const Vec2 dt = t.direction();
  const double angle = std::acos(std::clamp(std::fabs(ds.dot(dt)), 0.0, 1.0));
  if (std::fabs(angle - kPi / 2.0) > tol.angle) return std::nullopt;
  const auto p = line_intersection(s, t);
  if (!p) return std::nullopt;
  if (point_segment_distance(*p, s.a, s.b) > tol.reach) return std::nullopt;
  if (point_segment_distance(*p, t.a, t.b) > tol.reach) return std::nullopt;

  Junction j;
  j.position = *p;
  j.dirs_a = arms(s, *p, tol.extend);
  j.dirs_b = arms(t, *p, tol.extend);
  if (j.dirs_a.empty() || j.dirs_b.empty()) return std::nullopt;
  return j;
}

double corner_orientation(const Vec2& dir_a, const Vec2& dir_b) {
  const Vec2 bis = dir_a.normalized() + dir_b.normalized();
  return std::atan2(bis.y(), bis.x());
}

}  // namespace fieldkit
