#include "fieldkit/stereo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <tuple>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "fieldkit/error.hpp"

namespace fieldkit::stereo {

void StereoRig::validate() const {
  if (!(baseline > 0.0)) throw Error(ErrorKind::InvalidArgument, "baseline must be positive");
  if (!(focal > 0.0)) throw Error(ErrorKind::InvalidArgument, "focal must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "image size must be positive");
}

std::size_t DisparityMap::valid_count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](int v) { return v != kInvalid; }));
}

DisparityMap block_match(const Image& left_in, const Image& right_in, int window, int max_disparity) {
  if (left_in.width() != right_in.width() || left_in.height() != right_in.height()) {
    throw Error(ErrorKind::DimensionMismatch, "stereo images differ in size");
  }
  if (window < 1 || window % 2 == 0) throw Error(ErrorKind::InvalidArgument, "window must be odd and positive");
  if (max_disparity < 0) throw Error(ErrorKind::InvalidArgument, "max_disparity must be >= 0");
  const Image left = left_in.channels() == 1 ? left_in : to_gray(left_in);
  const Image right = right_in.channels() == 1 ? right_in : to_gray(right_in);
  const int w = left.width();
  const int h = left.height();
  const int half = window / 2;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> best_left(n, kNone);
  std::vector<std::int64_t> best_right(n, kNone);
  DisparityMap disp{w, h, std::vector<int>(n, DisparityMap::kInvalid)};
  std::vector<int> disp_right(n, DisparityMap::kInvalid);

  // Integral image of |L(x, y) - R(x - d, y)| for one disparity at a time.
  std::vector<std::int64_t> integral(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  auto ii = [&](int x, int y) -> std::int64_t& { return integral[static_cast<std::size_t>(y) * (w + 1) + x]; };
  for (int d = 0; d <= max_disparity && d < w; ++d) {
    for (int y = 0; y < h; ++y) {
      std::int64_t row = 0;
      for (int x = 0; x < w; ++x) {
        if (x >= d) row += std::abs(static_cast<int>(left.at(x, y)) - static_cast<int>(right.at(x - d, y)));
        ii(x + 1, y + 1) = ii(x + 1, y) + row;
      }
    }
    for (int y = half; y + half < h; ++y) {
      for (int x = std::max(half, d + half); x + half < w; ++x) {
        const std::int64_t sad = ii(x + half + 1, y + half + 1) - ii(x - half, y + half + 1) -
                                 ii(x + half + 1, y - half) + ii(x - half, y - half);
        const std::size_t il = static_cast<std::size_t>(y) * w + x;
        if (sad < best_left[il]) {
          best_left[il] = sad;
          disp.values[il] = d;
        }
        const std::size_t ir = il - static_cast<std::size_t>(d);
        if (sad < best_right[ir]) {
          best_right[ir] = sad;
          disp_right[ir] = d;
        }
      }
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int& dl = disp.at(x, y);
      if (dl == DisparityMap::kInvalid) continue;
      const int dr = disp_right[static_cast<std::size_t>(y) * w + (x - dl)];
      if (dr == DisparityMap::kInvalid || std::abs(dr - dl) > 1) dl = DisparityMap::kInvalid;
    }
  }
  return disp;
}

PointCloud disparity_to_points(const DisparityMap& d, const StereoRig& rig, int step) {
  rig.validate();
  if (step < 1) throw Error(ErrorKind::InvalidArgument, "step must be >= 1");
  PointCloud pc;
  const double fb = rig.focal * rig.baseline;
  for (int v = 0; v < d.height; v += step) {
    for (int u = 0; u < d.width; u += step) {
      const int disp = d.at(u, v);
      if (disp <= 0) continue;
      const double z = fb / disp;
      pc.emplace_back((u - rig.cx) * z / rig.focal, (v - rig.cy) * z / rig.focal, z);
    }
  }
  return pc;
}

namespace {

using VoxelKey = std::array<std::int64_t, 3>;

VoxelKey key_of(const Vec3& p, double size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / size)), static_cast<std::int64_t>(std::floor(p.y() / size)),
          static_cast<std::int64_t>(std::floor(p.z() / size))};
}

struct KeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::size_t h = std::hash<std::int64_t>()(k[0]);
    h = h * 1000003u ^ std::hash<std::int64_t>()(k[1]);
    return h * 1000003u ^ std::hash<std::int64_t>()(k[2]);
  }
};

void orient(GroundPlane& plane, const Vec3& up) {
  if (plane.normal.dot(up) < 0.0) {
    plane.normal = -plane.normal;
    plane.offset = -plane.offset;
  }
}

std::size_t count_inliers(const PointCloud& pc, const Vec3& n, double offset, double dist) {
  return static_cast<std::size_t>(
      std::count_if(pc.begin(), pc.end(), [&](const Vec3& p) { return std::fabs(n.dot(p) - offset) <= dist; }));
}

}  // namespace

PointCloud voxel_bin(const PointCloud& pc, double voxel, std::size_t min_points) {
  if (!(voxel > 0.0)) throw Error(ErrorKind::InvalidArgument, "voxel size must be positive");
  std::map<VoxelKey, std::pair<Vec3, std::size_t>> bins;
  for (const Vec3& p : pc) {
    auto& [sum, count] = bins.try_emplace(key_of(p, voxel), Vec3::Zero(), 0).first->second;
    sum += p;
    ++count;
  }
  PointCloud out;
  for (const auto& [key, bin] : bins) {
    if (bin.second >= min_points) out.push_back(bin.first / static_cast<double>(bin.second));
  }
  return out;
}

GroundPlane fit_plane(const PointCloud& pc, const Vec3& up) {
  if (pc.size() < 3) throw Error(ErrorKind::DegenerateCloud, "plane fit needs at least 3 points");
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : pc) c += p;
  c /= static_cast<double>(pc.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : pc) cov += (p - c) * (p - c).transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.eigenvalues()(1) <= 1e-18 * std::max(1.0, eig.eigenvalues()(2))) {
    throw Error(ErrorKind::DegenerateCloud, "points are collinear");
  }
  GroundPlane plane;
  plane.normal = eig.eigenvectors().col(0).normalized();
  plane.offset = plane.normal.dot(c);
  orient(plane, up);
  plane.inlier_count = pc.size();
  plane.inlier_ratio = 1.0;
  return plane;
}

GroundPlane ransac_plane(const PointCloud& pc, int iterations, double inlier_dist, std::uint64_t seed,
                         const Vec3& up) {
  if (iterations < 1) throw Error(ErrorKind::InvalidArgument, "iterations must be >= 1");
  if (!(inlier_dist > 0.0)) throw Error(ErrorKind::InvalidArgument, "inlier_dist must be positive");
  if (pc.size() < 3) throw Error(ErrorKind::DegenerateCloud, "RANSAC needs at least 3 points");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pc.size() - 1);
  bool found = false;
  Vec3 best_n = Vec3::Zero();
  double best_d = 0.0;
  std::size_t best_count = 0;
  for (int it = 0; it < iterations; ++it) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    std::size_t k = pick(rng);
    if (i == j || j == k || i == k) continue;
    Vec3 n = (pc[j] - pc[i]).cross(pc[k] - pc[i]);
    const double scale = (pc[j] - pc[i]).norm() * (pc[k] - pc[i]).norm();
    if (!(n.norm() > 1e-9 * scale) || scale == 0.0) continue;
    n.normalize();
    const double d = n.dot(pc[i]);
    const std::size_t count = count_inliers(pc, n, d, inlier_dist);
    if (!found || count > best_count) {
      found = true;
      best_n = n;
      best_d = d;
      best_count = count;
    }
  }
  if (!found) throw Error(ErrorKind::DegenerateCloud, "every RANSAC sample was collinear");

  PointCloud inliers;
  for (const Vec3& p : pc) {
    if (std::fabs(best_n.dot(p) - best_d) <= inlier_dist) inliers.push_back(p);
  }
  GroundPlane plane;
  if (inliers.size() >= 3) {
    try {
      plane = fit_plane(inliers, up);
    } catch (const Error&) {
      plane.normal = best_n;
      plane.offset = best_d;
    }
  } else {
    plane.normal = best_n;
    plane.offset = best_d;
  }
  orient(plane, up);
  plane.inlier_count = count_inliers(pc, plane.normal, plane.offset, inlier_dist);
  plane.inlier_ratio = static_cast<double>(plane.inlier_count) / static_cast<double>(pc.size());
  return plane;
}

std::vector<ObstacleCluster> extract_clusters(const PointCloud& pc, const GroundPlane& plane, double protrusion,
                                              double link_dist, std::size_t min_size) {
  if (!(protrusion > 0.0)) throw Error(ErrorKind::InvalidArgument, "protrusion must be positive");
  if (!(link_dist > 0.0)) throw Error(ErrorKind::InvalidArgument, "link_dist must be positive");
  PointCloud above;
  std::vector<double> height;
  for (const Vec3& p : pc) {
    const double h = plane.signed_distance(p);
    if (h > protrusion) {
      above.push_back(p);
      height.push_back(h);
    }
  }
  std::unordered_map<VoxelKey, std::vector<std::size_t>, KeyHash> grid;
  for (std::size_t i = 0; i < above.size(); ++i) grid[key_of(above[i], link_dist)].push_back(i);

  const double link2 = link_dist * link_dist;
  std::vector<int> label(above.size(), -1);
  std::vector<ObstacleCluster> clusters;
  for (std::size_t seed = 0; seed < above.size(); ++seed) {
    if (label[seed] >= 0) continue;
    const int id = static_cast<int>(clusters.size());
    std::vector<std::size_t> members{seed};
    label[seed] = id;
    for (std::size_t q = 0; q < members.size(); ++q) {
      const Vec3& p = above[members[q]];
      const VoxelKey k = key_of(p, link_dist);
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            const auto it = grid.find({k[0] + dx, k[1] + dy, k[2] + dz});
            if (it == grid.end()) continue;
            for (const std::size_t m : it->second) {
              if (label[m] < 0 && (above[m] - p).squaredNorm() <= link2) {
                label[m] = id;
                members.push_back(m);
              }
            }
          }
        }
      }
    }
    ObstacleCluster c;
    c.min = c.max = above[members[0]];
    Vec3 sum = Vec3::Zero();
    for (const std::size_t m : members) {
      sum += above[m];
      c.min = c.min.cwiseMin(above[m]);
      c.max = c.max.cwiseMax(above[m]);
      c.max_protrusion = std::max(c.max_protrusion, height[m]);
    }
    c.point_count = members.size();
    c.centroid = sum / static_cast<double>(members.size());
    clusters.push_back(c);
  }
  std::vector<ObstacleCluster> kept;
  for (const auto& c : clusters) {
    if (c.point_count >= min_size) kept.push_back(c);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const ObstacleCluster& a, const ObstacleCluster& b) {
    return std::make_tuple(a.centroid.norm(), a.centroid.x(), a.centroid.y()) <
           std::make_tuple(b.centroid.norm(), b.centroid.x(), b.centroid.y());
  });
  return kept;
}

ObstacleResult detect_obstacles(const Image& left, const Image& right, const StereoRig& rig,
                                const ObstacleParams& params) {
  rig.validate();
  if (left.width() != rig.width || left.height() != rig.height) {
    throw Error(ErrorKind::DimensionMismatch, "images do not match the rig size");
  }
  const DisparityMap disp = block_match(left, right, params.window, params.max_disparity);
  ObstacleResult result;
  result.cloud = voxel_bin(disparity_to_points(disp, rig, params.step), params.voxel, params.min_points_per_voxel);
  result.plane = ransac_plane(result.cloud, params.ransac_iterations, params.inlier_dist, params.seed, params.up);
  result.plane_confident = result.plane.inlier_ratio >= params.min_inlier_ratio;
  result.clusters =
      extract_clusters(result.cloud, result.plane, params.protrusion, params.link_dist, params.min_size);
  return result;
}

}  // namespace fieldkit::stereo
