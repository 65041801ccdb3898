#include "fieldkit/line_vision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "fieldkit/error.hpp"

namespace fieldkit::lines {

FeaturePlanes make_planes(const Image& image) {
  FeaturePlanes p;
  p.width = image.width();
  p.height = image.height();
  const std::size_t n = static_cast<std::size_t>(p.width) * p.height;
  p.luma.resize(n);
  p.green.assign(n, 0);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * p.width + x;
      if (image.channels() == 1) {
        p.luma[i] = image.at(x, y);
        continue;
      }
      const int r = image.at(x, y, 0);
      const int g = image.at(x, y, 1);
      const int b = image.at(x, y, 2);
      p.luma[i] = static_cast<std::uint8_t>((r + g + b + 1) / 3);
      p.green[i] = static_cast<std::uint8_t>(std::max(0, g - (r + b) / 2));
    }
  }
  return p;
}

IntegralImage::IntegralImage(const std::vector<std::uint8_t>& plane, int width, int height)
    : width_(width), height_(height), table_(static_cast<std::size_t>(width + 1) * (height + 1), 0) {
  if (plane.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorKind::DimensionMismatch, "plane size does not match dimensions");
  }
  for (int y = 0; y < height; ++y) {
    std::int64_t row = 0;
    for (int x = 0; x < width; ++x) {
      row += plane[static_cast<std::size_t>(y) * width + x];
      table_[static_cast<std::size_t>(y + 1) * (width + 1) + x + 1] =
          table_[static_cast<std::size_t>(y) * (width + 1) + x + 1] + row;
    }
  }
}

Heatmap line_response_pass(const FeaturePlanes& planes, PassDirection direction,
                           const std::vector<double>& width_map, int decimation, const ScoreWeights& weights) {
  if (decimation < 1) throw Error(ErrorKind::InvalidArgument, "decimation must be >= 1");
  if (width_map.size() != static_cast<std::size_t>(planes.height)) {
    throw Error(ErrorKind::InvalidArgument, "width_map needs one entry per image row");
  }
  const IntegralImage luma(planes.luma, planes.width, planes.height);
  const IntegralImage green(planes.green, planes.width, planes.height);
  const int w_img = planes.width;
  const int h_img = planes.height;

  Heatmap hm;
  hm.direction = direction;
  hm.decimation = decimation;
  const bool horizontal = direction == PassDirection::Horizontal;
  hm.width = horizontal ? w_img : (w_img + decimation - 1) / decimation;
  hm.height = horizontal ? (h_img + decimation - 1) / decimation : h_img;
  hm.values.assign(static_cast<std::size_t>(hm.width) * hm.height, 0.0f);

  for (int sy = 0; sy < hm.height; ++sy) {
    for (int sx = 0; sx < hm.width; ++sx) {
      const int px = horizontal ? sx : sx * decimation;
      const int py = horizontal ? sy * decimation : sy;
      if (width_map[py] < 1.0) throw Error(ErrorKind::InvalidArgument, "width_map values must be >= 1");
      const int w = std::max(1, static_cast<int>(std::lround(width_map[py])));
      const int half = (w - 1) / 2;
      // Rectangles in (along-scan, across-scan) coordinates.
      const int s0 = (horizontal ? px : py) - half;
      const int c0 = (horizontal ? py : px) - half;
      const int scan_len = horizontal ? w_img : h_img;
      const int cross_len = horizontal ? h_img : w_img;
      if (s0 - w < 0 || s0 + 2 * w > scan_len || c0 < 0 || c0 + w > cross_len) continue;
      auto rect = [&](const IntegralImage& ii, int s) {
        return horizontal ? ii.sum(s, c0, s + w, c0 + w) : ii.sum(c0, s, c0 + w, s + w);
      };
      const double area = static_cast<double>(w) * w;
      const double l_mid = rect(luma, s0) / area;
      const double l_side = (rect(luma, s0 - w) + rect(luma, s0 + w)) / (2.0 * area);
      const double g_mid = rect(green, s0) / area;
      const double g_side = (rect(green, s0 - w) + rect(green, s0 + w)) / (2.0 * area);
      const double score = weights.luma * (l_mid - l_side) + weights.green * (g_side - g_mid);
      hm.at(sx, sy) = static_cast<float>(std::max(0.0, score));
    }
  }
  return hm;
}

std::vector<Vec2> nms(const Heatmap& heatmap, int radius, float threshold) {
  if (radius < 1) throw Error(ErrorKind::InvalidArgument, "nms radius must be >= 1");
  const bool horizontal = heatmap.direction == PassDirection::Horizontal;
  const int lines = horizontal ? heatmap.height : heatmap.width;
  const int len = horizontal ? heatmap.width : heatmap.height;
  std::vector<Vec2> out;
  for (int l = 0; l < lines; ++l) {
    auto value = [&](int i) { return horizontal ? heatmap.at(i, l) : heatmap.at(l, i); };
    for (int i = 0; i < len; ++i) {
      const float v = value(i);
      if (v < threshold || v <= 0.0f) continue;
      bool keep = true;
      for (int j = std::max(0, i - radius); j < i && keep; ++j) keep = value(j) < v;
      for (int j = i + 1; j <= std::min(len - 1, i + radius) && keep; ++j) keep = value(j) <= v;
      if (!keep) continue;
      const int cross = l * heatmap.decimation;
      out.push_back(horizontal ? Vec2(i + 0.5, cross + 0.5) : Vec2(cross + 0.5, i + 0.5));
    }
  }
  return out;
}

double LineSegment::direction() const {
  const Vec2 d = p1 - p0;
  return normalize_direction(std::atan2(d.y(), d.x()));
}

namespace {

struct LineFit {
  Vec2 centroid{0.0, 0.0};
  Vec2 direction{1.0, 0.0};
};

// Weighted total-least-squares line through a point set.
LineFit fit_line(const std::vector<Vec2>& pts, const std::vector<double>& weights) {
  double wsum = 0.0;
  Vec2 c(0.0, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    c += weights[i] * pts[i];
    wsum += weights[i];
  }
  c /= wsum;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 d = pts[i] - c;
    cov += weights[i] * d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  return {c, eig.eigenvectors().col(1).normalized()};
}

LineSegment covering_segment(const LineFit& fit, const std::vector<Vec2>& pts) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec2& p : pts) {
    const double t = (p - fit.centroid).dot(fit.direction);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  LineSegment s{fit.centroid + lo * fit.direction, fit.centroid + hi * fit.direction};
  if (std::tie(s.p1.x(), s.p1.y()) < std::tie(s.p0.x(), s.p0.y())) std::swap(s.p0, s.p1);
  return s;
}

class PointMask {
 public:
  PointMask(int width, int height) : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool test(int x, int y) const { return inside(x, y) && bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

 private:
  int width_;
  int height_;
  std::vector<char> bits_;
};

struct Pixel {
  int x;
  int y;
};

// Walks the line through `origin` along `dir` both ways, collecting mask pixels
// within `tol` of the line across the major axis until a gap exceeds max_gap.
std::vector<Pixel> walk_line(const PointMask& mask, const Vec2& origin, const Vec2& dir, int tol, int max_gap) {
  std::vector<Pixel> found;
  const bool x_major = std::fabs(dir.x()) >= std::fabs(dir.y());
  const Vec2 step = dir / (x_major ? std::fabs(dir.x()) : std::fabs(dir.y()));
  for (const double sign : {1.0, -1.0}) {
    int gap = 0;
    for (int k = (sign > 0 ? 0 : 1);; ++k) {
      const Vec2 p = origin + sign * k * step;
      const int mx = static_cast<int>(std::floor(x_major ? p.x() : p.y()));
      const double cross = x_major ? p.y() : p.x();
      if (mx < 0 || mx >= (x_major ? mask.width() : mask.height())) break;
      bool hit = false;
      double best = tol + 1.0;
      Pixel best_px{0, 0};
      const int base = static_cast<int>(std::floor(cross));
      for (int off = -tol - 1; off <= tol + 1; ++off) {
        const int c = base + off;
        const double dist = std::fabs(c + 0.5 - cross);
        if (dist > tol + 0.5) continue;
        const int x = x_major ? mx : c;
        const int y = x_major ? c : mx;
        if (mask.test(x, y) && dist < best) {
          best = dist;
          best_px = {x, y};
          hit = true;
        }
      }
      if (hit) {
        found.push_back(best_px);
        gap = 0;
      } else if (++gap > max_gap) {
        break;
      }
    }
  }
  return found;
}

}  // namespace

std::vector<LineSegment> hough_segments(const std::vector<Vec2>& points, const HoughParams& params) {
  if (!(params.rho > 0.0 && params.theta > 0.0) || params.threshold < 1 || params.max_gap < 0 ||
      params.rho_tolerance < 0) {
    throw Error(ErrorKind::InvalidArgument, "invalid Hough parameters");
  }
  std::vector<LineSegment> segments;
  if (points.empty()) return segments;

  int width = 1;
  int height = 1;
  for (const Vec2& p : points) {
    if (p.x() < 0.0 || p.y() < 0.0) throw Error(ErrorKind::InvalidArgument, "Hough points must be non-negative");
    width = std::max(width, static_cast<int>(std::floor(p.x())) + 1);
    height = std::max(height, static_cast<int>(std::floor(p.y())) + 1);
  }
  PointMask mask(width, height);
  std::vector<Pixel> pending;
  for (const Vec2& p : points) {
    const int x = static_cast<int>(std::floor(p.x()));
    const int y = static_cast<int>(std::floor(p.y()));
    if (mask.test(x, y)) continue;
    mask.set(x, y, true);
    pending.push_back({x, y});
  }

  const int num_angle = std::max(1, static_cast<int>(std::lround(kPi / params.theta)));
  const int num_rho = static_cast<int>(std::lround(((width + height) * 2 + 1) / params.rho));
  std::vector<double> cos_t(num_angle);
  std::vector<double> sin_t(num_angle);
  for (int n = 0; n < num_angle; ++n) {
    cos_t[n] = std::cos(n * params.theta) / params.rho;
    sin_t[n] = std::sin(n * params.theta) / params.rho;
  }
  std::vector<int> accum(static_cast<std::size_t>(num_angle) * num_rho, 0);
  auto vote = [&](const Pixel& px, int delta) {
    int best = -1;
    int best_n = 0;
    for (int n = 0; n < num_angle; ++n) {
      const int r = static_cast<int>(std::lround((px.x + 0.5) * cos_t[n] + (px.y + 0.5) * sin_t[n])) + (num_rho - 1) / 2;
      int& cell = accum[static_cast<std::size_t>(n) * num_rho + r];
      cell += delta;
      if (cell > best) {
        best = cell;
        best_n = n;
      }
    }
    return std::pair{best, best_n};
  };

  std::mt19937_64 rng(params.seed);
  for (std::size_t count = pending.size(); count > 0; --count) {
    const std::size_t idx = static_cast<std::size_t>(rng() % count);
    const Pixel pt = pending[idx];
    pending[idx] = pending[count - 1];
    if (!mask.test(pt.x, pt.y)) continue;

    const auto [votes, best_n] = vote(pt, +1);
    if (votes < params.threshold) continue;

    const double angle = best_n * params.theta;
    Vec2 dir(-std::sin(angle), std::cos(angle));
    Vec2 origin(pt.x + 0.5, pt.y + 0.5);
    std::vector<Pixel> collected;
    // Two rounds: walk the accumulator line, then walk the fitted line.
    for (int round = 0; round < 2; ++round) {
      collected = walk_line(mask, origin, dir, params.rho_tolerance, params.max_gap);
      if (collected.size() < 2) break;
      std::vector<Vec2> pts;
      pts.reserve(collected.size());
      for (const auto& c : collected) pts.emplace_back(c.x + 0.5, c.y + 0.5);
      const LineFit fit = fit_line(pts, std::vector<double>(pts.size(), 1.0));
      origin = fit.centroid;
      dir = fit.direction;
    }
    if (collected.empty()) collected.push_back(pt);

    std::vector<Vec2> pts;
    for (const auto& c : collected) pts.emplace_back(c.x + 0.5, c.y + 0.5);
    LineSegment seg{pts.front(), pts.front()};
    if (pts.size() >= 2) seg = covering_segment(fit_line(pts, std::vector<double>(pts.size(), 1.0)), pts);
    const bool good = seg.length() >= params.min_length;

    // The start point may not lie on the walked line; always retire it.
    if (mask.test(pt.x, pt.y)) {
      mask.set(pt.x, pt.y, false);
      if (good) vote(pt, -1);
    }
    for (const auto& c : collected) {
      if (!mask.test(c.x, c.y)) continue;
      mask.set(c.x, c.y, false);
      if (good) vote(c, -1);
    }
    if (good) segments.push_back(seg);
  }
  return segments;
}

namespace {

bool mergeable(const LineSegment& s, const LineSegment& t, const MergeParams& p) {
  if (direction_difference(s.direction(), t.direction()) > p.angle_tol) return false;
  const LineSegment& longer = s.length() >= t.length() ? s : t;
  const LineSegment& shorter = s.length() >= t.length() ? t : s;
  if (point_line_distance(shorter.p0, longer.p0, longer.p1) > p.dist_tol) return false;
  if (point_line_distance(shorter.p1, longer.p0, longer.p1) > p.dist_tol) return false;
  const Vec2 d = (longer.p1 - longer.p0).normalized();
  const double a0 = 0.0;
  const double a1 = longer.length();
  const double b0 = std::min((shorter.p0 - longer.p0).dot(d), (shorter.p1 - longer.p0).dot(d));
  const double b1 = std::max((shorter.p0 - longer.p0).dot(d), (shorter.p1 - longer.p0).dot(d));
  const double gap = std::max(0.0, std::max(a0, b0) - std::min(a1, b1));
  return gap <= p.max_gap;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

bool segment_less(const LineSegment& a, const LineSegment& b) {
  return std::tie(a.p0.x(), a.p0.y(), a.p1.x(), a.p1.y()) < std::tie(b.p0.x(), b.p0.y(), b.p1.x(), b.p1.y());
}

}  // namespace

std::vector<LineSegment> merge_segments(const std::vector<LineSegment>& segments, const MergeParams& params) {
  std::vector<LineSegment> current;
  for (LineSegment s : segments) {
    if (s.length() <= 0.0) continue;
    if (std::tie(s.p1.x(), s.p1.y()) < std::tie(s.p0.x(), s.p0.y())) std::swap(s.p0, s.p1);
    current.push_back(s);
  }
  std::sort(current.begin(), current.end(), segment_less);
  for (;;) {
    const int n = static_cast<int>(current.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (!mergeable(current[i], current[j], params)) continue;
        const int a = find_root(parent, i);
        const int b = find_root(parent, j);
        if (a != b) {
          parent[std::max(a, b)] = std::min(a, b);
          any = true;
        }
      }
    }
    if (!any) break;
    std::vector<std::vector<int>> groups(n);
    for (int i = 0; i < n; ++i) groups[find_root(parent, i)].push_back(i);
    std::vector<LineSegment> next;
    for (const auto& group : groups) {
      if (group.empty()) continue;
      if (group.size() == 1) {
        next.push_back(current[group[0]]);
        continue;
      }
      std::vector<Vec2> pts;
      std::vector<double> weights;
      for (const int i : group) {
        pts.push_back(current[i].p0);
        pts.push_back(current[i].p1);
        weights.push_back(current[i].length());
        weights.push_back(current[i].length());
      }
      next.push_back(covering_segment(fit_line(pts, weights), pts));
    }
    std::sort(next.begin(), next.end(), segment_less);
    current = std::move(next);
  }
  return current;
}

std::vector<CornerObservation> detect_corners(const std::vector<LineSegment>& lines, const CornerParams& params) {
  const JunctionTolerance tol{params.angle_tol, params.extend, params.reach};
  std::vector<CornerObservation> corners;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const auto junction = classify_junction(lines[i].segment(), lines[j].segment(), tol);
      if (!junction) continue;
      for (const Vec2& a : junction->dirs_a) {
        for (const Vec2& b : junction->dirs_b) corners.push_back({junction->position, a, b});
      }
    }
  }
  return corners;
}

Detections detect_lines(const Image& image, const DetectorConfig& config) {
  const FeaturePlanes planes = make_planes(image);
  std::vector<double> width_map = config.width_map;
  if (width_map.empty()) width_map.assign(static_cast<std::size_t>(planes.height), config.line_width_px);
  if (width_map.size() != static_cast<std::size_t>(planes.height)) {
    throw Error(ErrorKind::InvalidArgument, "width_map needs one entry per image row");
  }
  const double widest = *std::max_element(width_map.begin(), width_map.end());
  const int radius = config.nms_radius > 0 ? config.nms_radius : std::max(1, static_cast<int>(std::ceil(widest)));

  Detections out;
  for (const PassDirection dir : {PassDirection::Horizontal, PassDirection::Vertical}) {
    const Heatmap hm = line_response_pass(planes, dir, width_map, config.decimation, config.weights);
    const auto peaks = nms(hm, radius, config.nms_threshold);
    out.nms_points.insert(out.nms_points.end(), peaks.begin(), peaks.end());
  }
  const auto candidates = hough_segments(out.nms_points, config.hough);
  for (const auto& s : merge_segments(candidates, config.merge)) {
    if (s.length() >= config.min_line_length) out.lines.push_back(s);
  }
  out.corners = detect_corners(out.lines, config.corners);
  return out;
}

}  // namespace fieldkit::lines
