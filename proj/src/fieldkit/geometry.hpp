#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace fieldkit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Wraps a line direction into [0, pi).
double normalize_direction(double angle);

/// Smallest absolute difference between two undirected line directions, in [0, pi/2].
double direction_difference(double a, double b);

struct Segment2 {
  Vec2 a{0.0, 0.0};
  Vec2 b{0.0, 0.0};

  double length() const { return (b - a).norm(); }
  Vec2 direction() const { return (b - a).normalized(); }
};

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Perpendicular distance from p to the infinite line through a and b.
double point_line_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Intersection of the infinite lines through two segments; empty when parallel.
std::optional<Vec2> line_intersection(const Segment2& s, const Segment2& t);

/// Tolerances used when deciding how two roughly perpendicular lines meet.
struct JunctionTolerance {
  double angle = 0.0;    ///< allowed deviation from 90 degrees (rad)
  double extend = 0.0;   ///< a line "continues" past the junction if this much of it lies beyond
  double reach = 0.0;    ///< max gap between the junction point and either segment
};

/// The directions, pointing away from a junction, along which each of two
/// lines continues. An L-junction yields one direction per line, a T yields
/// one and two, an X yields two and two.
struct Junction {
  Vec2 position{0.0, 0.0};
  std::vector<Vec2> dirs_a;
  std::vector<Vec2> dirs_b;
};

std::optional<Junction> classify_junction(const Segment2& s, const Segment2& t,
                                          const JunctionTolerance& tol);

/// Orientation of a corner: the angle of the bisector of its two arms.
double corner_orientation(const Vec2& dir_a, const Vec2& dir_b);

}  // namespace fieldkit
