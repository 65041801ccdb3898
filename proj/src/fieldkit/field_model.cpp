#include "fieldkit/field_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fieldkit/error.hpp"

namespace fieldkit {

namespace {

constexpr double kEps = 1e-9;

int exact_ratio(double value, double step, const char* what) {
  const double r = value / step;
  const double n = std::round(r);
  if (std::fabs(r - n) > 1e-9 * std::max(1.0, n) || n < 1.0) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + " is not an integer multiple of cell_size");
  }
  return static_cast<int>(n);
}

// Index of the nearest center along one axis; ties toward the smaller index.
int nearest_index(double coord, double cell, int count) {
  const double u = coord / cell + count / 2.0 - 0.5;
  const int k = static_cast<int>(std::ceil(u - 0.5 - kEps));
  return std::clamp(k, 0, count - 1);
}

}  // namespace

FieldSpec FieldSpec::kidsize(double penalty_depth, double penalty_width, double goal_area_depth,
                             double goal_area_width) {
  FieldSpec f;
  const double hx = f.length / 2.0;
  const double hy = f.width / 2.0;
  auto seg = [&f](double x0, double y0, double x1, double y1) {
    f.line_segments.push_back({Vec2(x0, y0), Vec2(x1, y1)});
  };
  // border
  seg(-hx, -hy, hx, -hy);
  seg(-hx, hy, hx, hy);
  seg(-hx, -hy, -hx, hy);
  seg(hx, -hy, hx, hy);
  // halfway line
  seg(0.0, -hy, 0.0, hy);
  for (const double side : {-1.0, 1.0}) {
    const double goal_x = side * hx;
    const double pen_x = side * (hx - penalty_depth);
    const double ga_x = side * (hx - goal_area_depth);
    seg(goal_x, -penalty_width / 2.0, pen_x, -penalty_width / 2.0);
    seg(goal_x, penalty_width / 2.0, pen_x, penalty_width / 2.0);
    seg(pen_x, -penalty_width / 2.0, pen_x, penalty_width / 2.0);
    seg(goal_x, -goal_area_width / 2.0, ga_x, -goal_area_width / 2.0);
    seg(goal_x, goal_area_width / 2.0, ga_x, goal_area_width / 2.0);
    seg(ga_x, -goal_area_width / 2.0, ga_x, goal_area_width / 2.0);
  }
  return f;
}

int FieldSpec::cols() const { return exact_ratio(length, cell_size, "length"); }
int FieldSpec::rows() const { return exact_ratio(width, cell_size, "width"); }

void FieldSpec::validate() const {
  if (!(length > 0.0 && width > 0.0 && cell_size > 0.0 && line_width > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "field dimensions must be positive");
  }
  (void)cols();
  (void)rows();
  const double hx = length / 2.0 + 1e-9;
  const double hy = width / 2.0 + 1e-9;
  for (const auto& s : line_segments) {
    for (const Vec2& p : {s.a, s.b}) {
      if (std::fabs(p.x()) > hx || std::fabs(p.y()) > hy) {
        throw Error(ErrorKind::InvalidArgument, "line segment leaves the border rectangle");
      }
    }
    if (s.length() <= 0.0) throw Error(ErrorKind::InvalidArgument, "zero-length line segment");
  }
  for (const Vec2& g : {goal_center_left, goal_center_right}) {
    if (std::fabs(std::fabs(g.x()) - length / 2.0) > 1e-9 || std::fabs(g.y()) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "goal centers must lie on the short border lines at y = 0");
    }
  }
  if (goal_center_left.x() >= 0.0 || goal_center_right.x() <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "left goal must be at negative x, right goal at positive x");
  }
}

int flat_index(const GridIndex& i, const FieldSpec& spec) { return i.row * spec.cols() + i.col; }

GridIndex from_flat(int index, const FieldSpec& spec) {
  const int cols = spec.cols();
  return {index / cols, index % cols};
}

bool is_valid(const GridIndex& i, const FieldSpec& spec) {
  return i.row >= 0 && i.col >= 0 && i.row < spec.rows() && i.col < spec.cols();
}

GridIndex pose_to_cell(const Vec2& p, const FieldSpec& spec) {
  const double hx = spec.length / 2.0 + spec.cell_size / 2.0 + kEps;
  const double hy = spec.width / 2.0 + spec.cell_size / 2.0 + kEps;
  if (!std::isfinite(p.x()) || !std::isfinite(p.y()) || std::fabs(p.x()) > hx || std::fabs(p.y()) > hy) {
    throw Error(ErrorKind::OutOfField, "point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                                           ") is outside the field grid");
  }
  return {nearest_index(p.y(), spec.cell_size, spec.rows()),
          nearest_index(p.x(), spec.cell_size, spec.cols())};
}

Vec2 cell_center(const GridIndex& i, const FieldSpec& spec) {
  return {(i.col + 0.5 - spec.cols() / 2.0) * spec.cell_size,
          (i.row + 0.5 - spec.rows() / 2.0) * spec.cell_size};
}

KickGraph::KickGraph(const FieldSpec& spec, std::span<const double> kick_lengths)
    : rows_(spec.rows()), cols_(spec.cols()) {
  if (kick_lengths.empty()) throw Error(ErrorKind::InvalidArgument, "kick_lengths must not be empty");
  double longest = 0.0;
  for (const double k : kick_lengths) {
    if (!(k > spec.cell_size)) {
      throw Error(ErrorKind::InvalidArgument, "every kick length must exceed cell_size");
    }
    longest = std::max(longest, k);
  }
  // Annulus test in cell units: (k/c - 1/2)^2 <= n <= (k/c + 1/2)^2 with n = drow^2 + dcol^2.
  const int reach = static_cast<int>(std::ceil(longest / spec.cell_size + 0.5));
  for (int dr = -reach; dr <= reach; ++dr) {
    for (int dc = -reach; dc <= reach; ++dc) {
      const double n = static_cast<double>(dr * dr + dc * dc);
      if (n == 0.0) continue;
      const bool hit = std::any_of(kick_lengths.begin(), kick_lengths.end(), [&](double k) {
        const double kc = k / spec.cell_size;
        return (kc - 0.5) * (kc - 0.5) - 1e-9 <= n && n <= (kc + 0.5) * (kc + 0.5) + 1e-9;
      });
      if (hit) offsets_.push_back({dr, dc, spec.cell_size * std::sqrt(n)});
    }
  }
}

std::vector<KickEdge> kick_edges(const GridIndex& from, std::span<const double> kick_lengths,
                                 const FieldSpec& spec) {
  if (!is_valid(from, spec)) throw Error(ErrorKind::InvalidArgument, "grid index out of range");
  const KickGraph graph(spec, kick_lengths);
  std::vector<KickEdge> edges;
  graph.for_each_edge(from, [&](const GridIndex& to, double len) { edges.push_back({to, len}); });
  std::sort(edges.begin(), edges.end(), [](const KickEdge& a, const KickEdge& b) { return a.to < b.to; });
  return edges;
}

std::vector<FieldCorner> field_corners(const FieldSpec& spec) {
  // Layout coordinates are exact, so tolerances only absorb rounding.
  const JunctionTolerance tol{1e-6, spec.line_width / 2.0, 1e-6};
  std::vector<FieldCorner> corners;
  const auto& segs = spec.line_segments;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const auto junction = classify_junction(segs[i], segs[j], tol);
      if (!junction) continue;
      for (const Vec2& a : junction->dirs_a) {
        for (const Vec2& b : junction->dirs_b) {
          corners.push_back({junction->position, a, b, corner_orientation(a, b)});
        }
      }
    }
  }
  return corners;
}

std::vector<Vec2> goal_posts(const FieldSpec& spec) {
  const double half = spec.goal_width / 2.0;
  return {Vec2(spec.goal_center_left.x(), -half), Vec2(spec.goal_center_left.x(), half),
          Vec2(spec.goal_center_right.x(), -half), Vec2(spec.goal_center_right.x(), half)};
}

}  // namespace fieldkit
