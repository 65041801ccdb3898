#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "fieldkit/trajectory.hpp"

namespace fkt {

using namespace fieldkit;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec2 random_on_field(std::mt19937_64& rng, const FieldSpec& spec, double margin) {
  return {uniform(rng, -spec.length / 2 + margin, spec.length / 2 - margin),
          uniform(rng, -spec.width / 2 + margin, spec.width / 2 - margin)};
}

}  // namespace

PlanContext random_plan_context(std::uint64_t seed, const FieldSpec& spec) {
  std::mt19937_64 rng(seed);
  PlanContext ctx;
  ctx.ball = random_on_field(rng, spec, 0.0);
  const Vec2 r = random_on_field(rng, spec, 0.0);
  ctx.robot = {r.x(), r.y(), uniform(rng, -kPi, kPi)};
  const int opponents = static_cast<int>(rng() % 4);
  for (int i = 0; i < opponents; ++i) ctx.opponents.push_back(random_on_field(rng, spec, 0.0));
  const int mates = static_cast<int>(rng() % 3);
  for (int i = 0; i < mates; ++i) {
    const Vec2 p = random_on_field(rng, spec, 0.0);
    ctx.teammates.push_back({p.x(), p.y(), uniform(rng, -kPi, kPi)});
  }
  return ctx;
}

double dijkstra_reference(const PlanContext& ctx, const FieldSpec& spec) {
  const int rows = static_cast<int>(std::lround(spec.width / spec.cell_size));
  const int cols = static_cast<int>(std::lround(spec.length / spec.cell_size));
  // Cell centers come from the library so both searches price identical
  // coordinates; everything else here is computed independently.
  auto center = [&](int id) { return cell_center(GridIndex{id / cols, id % cols}, spec); };
  auto nearest = [&](const Vec2& p) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int id = 0; id < rows * cols; ++id) {
      const double d = (center(id) - p).norm();
      if (d < best_d - 1e-12) {
        best_d = d;
        best = id;
      }
    }
    return best;
  };
  const int start = nearest(ctx.ball);
  const int goal = nearest(spec.opponent_goal());

  // Neighbours by measuring the distance between cell centers in meters.
  double longest = 0.0;
  for (double k : ctx.kick_lengths) longest = std::max(longest, k);
  const int reach = static_cast<int>(longest / spec.cell_size) + 2;
  auto neighbours = [&](int id) {
    std::vector<int> out;
    const int r0 = id / cols;
    const int c0 = id % cols;
    const Vec2 p = center(id);
    for (int r = std::max(0, r0 - reach); r <= std::min(rows - 1, r0 + reach); ++r) {
      for (int c = std::max(0, c0 - reach); c <= std::min(cols - 1, c0 + reach); ++c) {
        const int nid = r * cols + c;
        if (nid == id) continue;
        const double d = (center(nid) - p).norm();
        for (double k : ctx.kick_lengths) {
          if (std::fabs(d - k) <= spec.cell_size / 2 + 1e-9) {
            out.push_back(nid);
            break;
          }
        }
      }
    }
    return out;
  };

  std::vector<double> dist(static_cast<std::size_t>(rows * cols), std::numeric_limits<double>::infinity());
  std::set<std::pair<double, int>> frontier;
  dist[start] = 0.0;
  frontier.insert({0.0, start});
  while (!frontier.empty()) {
    const auto [d, id] = *frontier.begin();
    frontier.erase(frontier.begin());
    if (id == goal) return d;
    for (int nid : neighbours(id)) {
      const double nd = d + compute_cost(ctx, spec, center(id), center(nid), id == start);
      if (nd < dist[nid]) {
        frontier.erase({dist[nid], nid});
        dist[nid] = nd;
        frontier.insert({nd, nid});
      }
    }
  }
  return std::numeric_limits<double>::infinity();
}

LineCorpusImage line_corpus_image(std::uint64_t seed, double noise_sigma, double min_length_px) {
  std::mt19937_64 rng(seed * 7919 + 17);
  LineCorpusImage out;
  out.scene.overhead = true;
  out.scene.noise_sigma = noise_sigma;
  out.scene.seed = seed;
  // Redraw until the view holds at least one line long enough to score.
  for (;;) {
    const Vec2 p = random_on_field(rng, out.scene.field, 0.0);
    out.scene.robot = {p.x(), p.y(), uniform(rng, -kPi, kPi)};
    out.truth.clear();
    for (const auto& s : overhead_ground_truth(out.scene, 10.0)) {
      if (s.length() >= min_length_px) out.truth.push_back(s);
    }
    if (!out.truth.empty()) break;
  }
  out.image = render_field(out.scene);
  return out;
}

bool line_matches(const Segment2& truth, const lines::LineSegment& detected, const LineMatchTolerance& tol) {
  if (detected.length() <= 0.0) return false;
  if (direction_difference(std::atan2(truth.b.y() - truth.a.y(), truth.b.x() - truth.a.x()),
                           detected.direction()) > tol.angle_rad) {
    return false;
  }
  const Vec2 mid = 0.5 * (truth.a + truth.b);
  if (point_line_distance(mid, detected.p0, detected.p1) > tol.distance_px) return false;
  const Vec2 u = truth.direction();
  const double len = truth.length();
  double t0 = (detected.p0 - truth.a).dot(u);
  double t1 = (detected.p1 - truth.a).dot(u);
  if (t0 > t1) std::swap(t0, t1);
  const double overlap = std::min(t1, len) - std::max(t0, 0.0);
  return overlap >= tol.min_coverage * len;
}

Image paint_segments(int width, int height, const std::vector<Segment2>& segs, double line_width) {
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec2 c(x + 0.5, y + 0.5);
      bool on = false;
      for (const auto& s : segs) on = on || point_segment_distance(c, s.a, s.b) <= line_width / 2;
      const Rgb color = on ? Rgb{230, 230, 230} : Rgb{50, 140, 50};
      set_pixel(img, x, y, color);
    }
  }
  return img;
}

ConvergenceRun localization_convergence(std::uint64_t seed, int max_updates, std::size_t particles) {
  const FieldSpec spec = FieldSpec::kidsize();
  std::mt19937_64 rng(seed * 104729 + 3);
  Region own_half;
  own_half.x_max = 0.0;

  TrajectoryConfig tc;
  tc.start = {uniform(rng, -4.0, -0.5), uniform(rng, -2.5, 2.5), uniform(rng, -kPi, kPi)};
  tc.steps = static_cast<std::size_t>(max_updates);
  tc.odometry_noise = {0.01, 0.01, 0.01};
  tc.seed = seed;
  const auto steps = generate_trajectory(spec, tc);

  FilterConfig fc;
  fc.particles = particles;
  ParticleFilter filter(spec, fc, seed + 1000);
  filter.reset(own_half);

  ConvergenceRun run;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    filter.step(steps[k].odometry, steps[k].observations);
    const PoseEstimate e = filter.estimate();
    run.final_error_xy = (e.pose.position() - steps[k].truth.position()).norm();
    run.final_error_theta = std::fabs(normalize_angle(e.pose.theta - steps[k].truth.theta));
    if (run.updates_to_converge < 0 && run.final_error_xy <= 0.2 && run.final_error_theta <= 10.0 * kPi / 180.0) {
      run.updates_to_converge = static_cast<int>(k + 1);
    }
  }
  return run;
}

Spread local_spread(const std::vector<Particle>& particles, const FieldPose& truth, double radius,
                    double angle_window) {
  std::vector<Particle> near;
  for (const auto& p : particles) {
    if (p.weight > 0.0 && (p.pose.position() - truth.position()).norm() <= radius &&
        std::fabs(normalize_angle(p.pose.theta - truth.theta)) <= angle_window) {
      near.push_back(p);
    }
  }
  if (near.empty()) return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  const PoseEstimate e = estimate_pose(near);
  return {e.sigma_xy, e.sigma_theta};
}

AmbiguityRun localization_ambiguity(std::uint64_t seed, std::size_t particles, double radius, double angle_window) {
  const FieldSpec spec = FieldSpec::kidsize();
  const LandmarkMap map(spec);
  const ObservationSigmas sigmas;
  std::mt19937_64 rng(seed * 15485863 + 11);

  const Vec2 p = random_on_field(rng, spec, 0.5);
  const FieldPose truth{p.x(), p.y(), uniform(rng, -kPi, kPi)};
  const double inf = std::numeric_limits<double>::infinity();

  // Nearest feature of each kind, seen with noise.
  auto nearest = [&](std::vector<RobotObservation> all, ObservationKind kind) {
    RobotObservation best;
    double best_d = inf;
    for (const auto& o : all) {
      if (o.kind != kind) continue;
      const double d = kind == ObservationKind::Line ? std::fabs(o.distance) : o.position.norm();
      if (d < best_d) {
        best_d = d;
        best = o;
      }
    }
    return perturb(best, sigmas, rng);
  };
  const auto expected = expected_observations(truth, spec, inf);
  const RobotObservation corner = nearest(expected, ObservationKind::Corner);
  const RobotObservation line = nearest(expected, ObservationKind::Line);
  const RobotObservation post = nearest(expected_point_features(truth, spec, inf), ObservationKind::PointFeature);

  // With a uniform prior the posterior is the likelihood itself. Its clutter
  // floor is the part explained by "not this landmark" and is spread evenly,
  // so only the excess over it (the matched mode) is measured.
  std::mt19937_64 init(seed);
  const auto prior = uniform_particles(particles, Region{}, init);
  const double floor = std::exp(-4.5);
  auto posterior = [&](const RobotObservation& obs) {
    auto ps = prior;
    for (auto& p : ps) p.weight = std::max(0.0, observation_likelihood(obs, p.pose, map, sigmas) - floor);
    return local_spread(ps, truth, radius, angle_window);
  };
  return {posterior(corner), posterior(line), posterior(post)};
}

pipeline::PipelineSpec random_pipeline(std::uint64_t seed, int min_filters, int max_filters) {
  std::mt19937_64 rng(seed);
  pipeline::PipelineSpec spec;
  spec.source_slots = {"camera", "imu"};
  const int n = min_filters + static_cast<int>(rng() % static_cast<std::uint64_t>(max_filters - min_filters + 1));
  std::vector<std::string> available = spec.source_slots;
  for (int i = 0; i < n; ++i) {
    pipeline::FilterSpec f;
    f.name = "f" + std::to_string(i);
    const int fan_in = static_cast<int>(rng() % 4);
    for (int k = 0; k < fan_in; ++k) {
      const std::string& slot = available[rng() % available.size()];
      if (std::find(f.inputs.begin(), f.inputs.end(), slot) == f.inputs.end()) f.inputs.push_back(slot);
    }
    f.outputs = {"s" + std::to_string(i)};
    f.divider = 1 + static_cast<int>(rng() % 3);
    available.push_back(f.outputs.front());
    spec.filters.push_back(std::move(f));
  }
  std::shuffle(spec.filters.begin(), spec.filters.end(), rng);
  return spec;
}

stereo::PointCloud noisy_plane_cloud(std::uint64_t seed, std::size_t count, double sigma, double outlier_fraction) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  stereo::PointCloud pc;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = uniform(rng, -2.0, 2.0);
    const double y = uniform(rng, -2.0, 2.0);
    const bool outlier = uniform(rng, 0.0, 1.0) < outlier_fraction;
    pc.emplace_back(x, y, outlier ? uniform(rng, 0.2, 0.5) : noise(rng));
  }
  return pc;
}

TwoRobotScene two_robot_cloud(std::uint64_t seed, double separation, double protrusion) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.003);
  TwoRobotScene scene;
  for (double x = -0.5; x <= 2.5; x += 0.02) {
    for (double y = -1.5; y <= 1.5; y += 0.02) scene.cloud.emplace_back(x, y, noise(rng));
  }
  const double radius = 0.1;
  const double height = 0.45;
  for (int robot = 0; robot < 2; ++robot) {
    const Vec2 c(1.0, (robot == 0 ? -0.5 : 0.5) * separation);
    Vec3 sum = Vec3::Zero();
    int kept = 0;
    for (double z = 0.0; z <= height + 1e-9; z += 0.02) {
      for (int k = 0; k < 32; ++k) {
        const double a = 2.0 * kPi * k / 32.0;
        const Vec3 q(c.x() + radius * std::cos(a), c.y() + radius * std::sin(a), z);
        if (q.z() > protrusion) {
          sum += q;
          ++kept;
        }
        scene.cloud.push_back(q + Vec3(noise(rng), noise(rng), noise(rng)));
      }
    }
    scene.truth_centroids.push_back(sum / kept);
  }
  return scene;
}

}  // namespace fkt
