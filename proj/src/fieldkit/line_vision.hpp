#pragma once

#include <cstdint>
#include <vector>

#include "fieldkit/geometry.hpp"
#include "fieldkit/image.hpp"

namespace fieldkit::lines {

/// Two 8-bit planes the line score works on: brightness and greenness.
struct FeaturePlanes {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> luma;
  std::vector<std::uint8_t> green;
};

/// Luma is the channel mean; greenness is max(0, g - (r + b) / 2). A gray
/// image has zero greenness everywhere.
FeaturePlanes make_planes(const Image& image);

/// Summed-area table with one extra row and column:
/// at(x, y) = sum of the plane over [0, x) x [0, y).
class IntegralImage {
 public:
  IntegralImage(const std::vector<std::uint8_t>& plane, int width, int height);

  std::int64_t at(int x, int y) const { return table_[static_cast<std::size_t>(y) * (width_ + 1) + x]; }
  /// Sum over [x0, x1) x [y0, y1).
  std::int64_t sum(int x0, int y0, int x1, int y1) const {
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int width_;
  int height_;
  std::vector<std::int64_t> table_;
};

enum class PassDirection {
  Horizontal,  ///< window slides along rows; finds lines crossing a row
  Vertical,    ///< window slides along columns; finds lines crossing a column
};

/// Response of one sliding-window pass. The scan axis is sampled at every
/// pixel, the cross axis every `decimation` pixels: a horizontal pass has
/// width x ceil(height / decimation) sites, site (i, k) sitting at pixel (i, k * decimation).
struct Heatmap {
  PassDirection direction = PassDirection::Horizontal;
  int decimation = 1;
  int width = 0;
  int height = 0;
  std::vector<float> values;

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct ScoreWeights {
  double luma = 1.0;
  double green = 1.0;
};

/// Three-rectangle window score at every site: middle rectangle bright and not
/// green, the two side rectangles dark and green. The middle width comes from
/// width_map[row] (pixels); sides are the same size and adjacent; every
/// rectangle is square. Sites whose window leaves the image score 0.
Heatmap line_response_pass(const FeaturePlanes& planes, PassDirection direction,
                           const std::vector<double>& width_map, int decimation,
                           const ScoreWeights& weights = {});

/// Sites scoring at least `threshold` that beat every site within `radius`
/// along the scan direction (strictly the earlier ones, non-strictly the later
/// ones, so a plateau keeps its first site). Returned in full-resolution pixels.
std::vector<Vec2> nms(const Heatmap& heatmap, int radius, float threshold);

struct LineSegment {
  Vec2 p0{0.0, 0.0};
  Vec2 p1{0.0, 0.0};

  double length() const { return (p1 - p0).norm(); }
  double direction() const;  ///< in [0, pi)
  Segment2 segment() const { return {p0, p1}; }
};

struct HoughParams {
  double rho = 1.0;                         ///< accumulator distance resolution (px)
  double theta = 3.14159265358979 / 180.0;  ///< accumulator angle resolution (rad)
  int threshold = 10;                       ///< votes needed to try a line
  double min_length = 20.0;                 ///< px
  int max_gap = 8;                          ///< px bridged while walking a line
  int rho_tolerance = 2;                    ///< px searched across the walked line
  std::uint64_t seed = 1;
};

/// Progressive probabilistic Hough transform over a point set. Points are
/// visited in seeded random order; a point that makes some accumulator bin
/// reach the threshold starts a walk along that line in both directions.
/// Each emitted segment is the total-least-squares fit of the points it consumed.
std::vector<LineSegment> hough_segments(const std::vector<Vec2>& points, const HoughParams& params);

struct MergeParams {
  double angle_tol = 3.0 * 3.14159265358979 / 180.0;
  double dist_tol = 3.0;  ///< px, endpoint-to-line distance in both directions
  double max_gap = 16.0;  ///< px, gap along the line still bridged
};

/// Joins near-collinear segments into their minimal covering segment, iterated
/// to a fixed point (so idempotent). Each round merges whole connected groups.
std::vector<LineSegment> merge_segments(const std::vector<LineSegment>& segments, const MergeParams& params);

struct CornerObservation {
  Vec2 position{0.0, 0.0};
  Vec2 dir_a{1.0, 0.0};
  Vec2 dir_b{0.0, 1.0};
};

struct CornerParams {
  double angle_tol = 10.0 * 3.14159265358979 / 180.0;
  double extend = 3.0;  ///< px past the junction for a line to count as continuing
  double reach = 10.0;  ///< px between the junction and a segment
};

/// One observation per L-configuration: L gives 1, T gives 2, X gives 4.
std::vector<CornerObservation> detect_corners(const std::vector<LineSegment>& lines, const CornerParams& params);

struct DetectorConfig {
  double line_width_px = 5.0;      ///< used when width_map is empty
  std::vector<double> width_map;   ///< expected width per image row
  int decimation = 4;
  ScoreWeights weights;
  int nms_radius = 0;              ///< 0: derived from the line width
  float nms_threshold = 60.0f;
  HoughParams hough;
  MergeParams merge;
  double min_line_length = 40.0;   ///< px, reported lines
  CornerParams corners;
};

struct Detections {
  std::vector<LineSegment> lines;
  std::vector<CornerObservation> corners;
  std::vector<Vec2> nms_points;
};

Detections detect_lines(const Image& image, const DetectorConfig& config);

}  // namespace fieldkit::lines
