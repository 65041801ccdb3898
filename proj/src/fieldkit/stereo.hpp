#pragma once

#include <cstdint>
#include <vector>

#include "fieldkit/geometry.hpp"
#include "fieldkit/image.hpp"

namespace fieldkit::stereo {

/// Rectified pair geometry. The principal point is given in pixel indices:
/// pixel (u, v) looks along ((u - cx) / focal, (v - cy) / focal, 1).
struct StereoRig {
  double baseline = 0.062;
  double focal = 600.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;

  void validate() const;
};

/// Integer disparities; kInvalid where matching failed or was rejected.
struct DisparityMap {
  static constexpr int kInvalid = -1;

  int width = 0;
  int height = 0;
  std::vector<int> values;

  int at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  int& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t valid_count() const;
};

/// SAD block matching over [0, max_disparity] with ties going to the smaller
/// disparity, followed by a left-right consistency check (tolerance 1 px).
/// Color inputs are converted to gray. Throws DimensionMismatch.
DisparityMap block_match(const Image& left, const Image& right, int window, int max_disparity);

using PointCloud = std::vector<Vec3>;

/// Camera-frame points (x right, y down, z forward) for valid, non-zero
/// disparities on a step grid.
PointCloud disparity_to_points(const DisparityMap& d, const StereoRig& rig, int step = 1);

/// Centroid of every voxel holding at least min_points points, in voxel order.
PointCloud voxel_bin(const PointCloud& pc, double voxel, std::size_t min_points = 1);

struct GroundPlane {
  Vec3 normal{0.0, -1.0, 0.0};
  double offset = 0.0;  ///< plane is normal . x = offset
  std::size_t inlier_count = 0;
  double inlier_ratio = 0.0;

  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

/// Three-point RANSAC, best inlier count wins (earliest on ties), refined by a
/// least-squares fit over the inliers. The normal is oriented along `up`.
/// Throws DegenerateCloud with fewer than 3 points or when every sample is collinear.
GroundPlane ransac_plane(const PointCloud& pc, int iterations, double inlier_dist, std::uint64_t seed,
                         const Vec3& up = Vec3(0.0, -1.0, 0.0));

/// Least-squares plane through points, normal oriented along `up`.
GroundPlane fit_plane(const PointCloud& pc, const Vec3& up);

struct ObstacleCluster {
  Vec3 centroid{0.0, 0.0, 0.0};
  Vec3 min{0.0, 0.0, 0.0};
  Vec3 max{0.0, 0.0, 0.0};
  std::size_t point_count = 0;
  double max_protrusion = 0.0;
};

/// Points more than `protrusion` above the plane, single-linkage clustered at
/// link_dist, clusters below min_size dropped, nearest to the camera first.
std::vector<ObstacleCluster> extract_clusters(const PointCloud& pc, const GroundPlane& plane, double protrusion,
                                              double link_dist, std::size_t min_size);

struct ObstacleParams {
  int window = 7;
  int max_disparity = 96;
  int step = 2;
  double voxel = 0.05;
  std::size_t min_points_per_voxel = 1;
  int ransac_iterations = 200;
  double inlier_dist = 0.03;
  double protrusion = 0.1;
  double link_dist = 0.15;
  std::size_t min_size = 10;
  double min_inlier_ratio = 0.3;  ///< below this the plane is reported as low confidence
  Vec3 up{0.0, -1.0, 0.0};
  std::uint64_t seed = 1;
};

struct ObstacleResult {
  GroundPlane plane;
  bool plane_confident = false;
  std::vector<ObstacleCluster> clusters;
  PointCloud cloud;  ///< voxelized cloud the plane and clusters came from
};

ObstacleResult detect_obstacles(const Image& left, const Image& right, const StereoRig& rig,
                                const ObstacleParams& params);

}  // namespace fieldkit::stereo
