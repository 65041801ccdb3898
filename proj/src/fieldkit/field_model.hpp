#pragma once

#include <compare>
#include <span>
#include <vector>

#include "fieldkit/geometry.hpp"

namespace fieldkit {

/// Grid cell address. Rows run along the field width (y), columns along the
/// length (x). Ordering is row-major, which is also the planner's tie-break order.
struct GridIndex {
  int row = 0;
  int col = 0;

  auto operator<=>(const GridIndex&) const = default;
};

/// Field-frame pose: origin at the field center, x toward the opponent goal,
/// theta = 0 facing the opponent goal, theta in (-pi, pi].
struct FieldPose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 position() const { return {x, y}; }
};

struct Circle {
  Vec2 center{0.0, 0.0};
  double radius = 0.75;
};

struct FieldSpec {
  double length = 9.0;
  double width = 6.0;
  double cell_size = 0.1;
  double line_width = 0.05;
  double goal_width = 2.6;
  Vec2 goal_center_left{-4.5, 0.0};
  Vec2 goal_center_right{4.5, 0.0};
  std::vector<Segment2> line_segments;
  Circle circle;

  /// KidSize 9 x 6 m layout: border, halfway line, penalty and goal areas.
  static FieldSpec kidsize(double penalty_depth = 2.0, double penalty_width = 5.0,
                           double goal_area_depth = 1.0, double goal_area_width = 3.0);

  int cols() const;
  int rows() const;
  int cell_count() const { return rows() * cols(); }

  const Vec2& opponent_goal() const { return goal_center_right; }

  /// Throws InvalidArgument when an invariant of the geometry is broken.
  void validate() const;
};

int flat_index(const GridIndex& i, const FieldSpec& spec);
GridIndex from_flat(int index, const FieldSpec& spec);
bool is_valid(const GridIndex& i, const FieldSpec& spec);

/// Nearest cell center; ties go to the smaller row, then the smaller column.
/// Throws OutOfField beyond the field rectangle grown by half a cell.
GridIndex pose_to_cell(const Vec2& p, const FieldSpec& spec);
Vec2 cell_center(const GridIndex& i, const FieldSpec& spec);

struct KickEdge {
  GridIndex to;
  double length = 0.0;
};

/// Cells whose center lies within +-cell_size/2 of one of the kick lengths.
std::vector<KickEdge> kick_edges(const GridIndex& from, std::span<const double> kick_lengths,
                                 const FieldSpec& spec);

/// Kick edges precomputed as grid offsets; the annulus test depends only on
/// the offset, so the table is shared by every cell.
class KickGraph {
 public:
  KickGraph(const FieldSpec& spec, std::span<const double> kick_lengths);

  template <typename Fn>
  void for_each_edge(const GridIndex& from, Fn&& fn) const {
    for (const auto& o : offsets_) {
      const int r = from.row + o.drow;
      const int c = from.col + o.dcol;
      if (r < 0 || c < 0 || r >= rows_ || c >= cols_) continue;
      fn(GridIndex{r, c}, o.length);
    }
  }

 private:
  struct Offset {
    int drow;
    int dcol;
    double length;
  };
  std::vector<Offset> offsets_;
  int rows_;
  int cols_;
};

/// A line junction of the painted layout, one entry per corner observation
/// it produces (L: 1, T: 2, X: 4).
struct FieldCorner {
  Vec2 position{0.0, 0.0};
  Vec2 dir_a{1.0, 0.0};
  Vec2 dir_b{0.0, 1.0};
  double orientation = 0.0;
};

std::vector<FieldCorner> field_corners(const FieldSpec& spec);

/// Goal post positions (left goal first).
std::vector<Vec2> goal_posts(const FieldSpec& spec);

}  // namespace fieldkit
