// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fail.
// `fieldkit_acceptance N` runs criterion N only.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "fieldkit/ball_planner.hpp"
#include "fieldkit/camera.hpp"
#include "fieldkit/error.hpp"
#include "fieldkit/line_vision.hpp"
#include "fieldkit/localization.hpp"
#include "fieldkit/pipeline.hpp"
#include "fieldkit/render.hpp"
#include "fieldkit/stereo.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace fieldkit;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- 1 ----

void planner_oracle(Outcome& out) {
  const FieldSpec spec = FieldSpec::kidsize();
  int dijkstra_equal = 0;
  int edge_sum_equal = 0;
  int valid_edges = 0;
  double planner_time = 0.0;
  const int scenes = 100;
  for (int s = 0; s < scenes; ++s) {
    const PlanContext ctx = fkt::random_plan_context(static_cast<std::uint64_t>(s + 1), spec);
    const auto t0 = std::chrono::steady_clock::now();
    PlanOptions no_h;
    no_h.use_heuristic = false;
    const BallPlan flat = plan_ball_path(ctx, spec, no_h);
    const BallPlan guided = plan_ball_path(ctx, spec);
    planner_time += seconds_since(t0);

    if (flat.total_cost == fkt::dijkstra_reference(ctx, spec)) ++dijkstra_equal;
    double sum = 0.0;
    bool edges_ok = true;
    for (std::size_t k = 1; k < guided.waypoints.size(); ++k) {
      sum += compute_cost(ctx, spec, guided.waypoints[k - 1], guided.waypoints[k], k == 1);
      const double len = (guided.waypoints[k] - guided.waypoints[k - 1]).norm();
      bool on_annulus = false;
      for (double kl : ctx.kick_lengths) on_annulus = on_annulus || std::fabs(len - kl) <= spec.cell_size / 2 + 1e-9;
      edges_ok = edges_ok && on_annulus;
    }
    if (guided.total_cost == sum) ++edge_sum_equal;
    if (edges_ok) ++valid_edges;
  }
  out.check(dijkstra_equal == scenes, "zero-heuristic cost equals Dijkstra");
  out.check(edge_sum_equal == scenes, "heuristic plan cost equals edge sum");
  out.check(valid_edges == scenes, "every edge is a kick");
  out.check(planner_time < 10.0, "runtime < 10 s");
  out.detail << "dijkstra " << dijkstra_equal << "/" << scenes << ", edge-sum " << edge_sum_equal << "/" << scenes
             << ", valid edges " << valid_edges << "/" << scenes << ", planner time " << planner_time << " s";
}

// ---- 2 ----

void cost_semantics(Outcome& out) {
  const FieldSpec spec = FieldSpec::kidsize();
  PlanContext ctx;
  ctx.robot = {0.0, 0.0, 0.0};
  const Vec2 from(0.0, 0.0);
  const Vec2 to(1.0, 0.0);
  ctx.opponents = {Vec2(0.5, 0.0)};
  const double blocked = compute_cost(ctx, spec, from, to, true);
  ctx.opponents.clear();
  const double clear = compute_cost(ctx, spec, from, to, true);
  out.check(blocked == 1.0, "opponent doubles travel (1.0 s)");
  out.check(clear == 0.5, "no opponent gives 0.5 s");
  out.detail << "with opponent " << blocked << " s, without " << clear << " s";
}

// ---- 3 ----

void line_recall(Outcome& out) {
  const lines::DetectorConfig config;
  const fkt::LineMatchTolerance tol;
  int truth_total = 0;
  int found = 0;
  double detect_time = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto sample = fkt::line_corpus_image(static_cast<std::uint64_t>(i + 1), 8.0, config.min_line_length);
    auto cfg = config;
    cfg.hough.seed = static_cast<std::uint64_t>(i + 1);
    const auto t0 = std::chrono::steady_clock::now();
    const auto det = lines::detect_lines(sample.image, cfg);
    detect_time += seconds_since(t0);
    for (const auto& gt : sample.truth) {
      ++truth_total;
      if (std::any_of(det.lines.begin(), det.lines.end(),
                      [&](const lines::LineSegment& d) { return fkt::line_matches(gt, d, tol); })) {
        ++found;
      }
    }
  }
  const double recall = truth_total ? static_cast<double>(found) / truth_total : 0.0;
  out.check(recall >= 0.9, "recall >= 90%");

  // Junction fixtures: L, T and X built from 5 px lines.
  const std::vector<std::pair<std::string, std::vector<Segment2>>> shapes = {
      {"L", {{Vec2(100, 60), Vec2(100, 200)}, {Vec2(100, 200), Vec2(260, 200)}}},
      {"T", {{Vec2(60, 100), Vec2(260, 100)}, {Vec2(160, 100), Vec2(160, 240)}}},
      {"X", {{Vec2(60, 150), Vec2(260, 150)}, {Vec2(160, 40), Vec2(160, 260)}}},
  };
  const std::array<std::size_t, 3> want{1, 2, 4};
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const Image img = fkt::paint_segments(320, 300, shapes[k].second, 5.0);
    const auto det = lines::detect_lines(img, config);
    out.check(det.corners.size() == want[k], shapes[k].first + " corner count");
    out.detail << shapes[k].first << ":" << det.corners.size() << " ";
  }
  out.detail << "recall " << found << "/" << truth_total << " = " << recall << ", "
             << detect_time / 100.0 * 1000.0 << " ms/image";
}

// ---- 4 ----

void localization(Outcome& out) {
  std::vector<double> updates;
  int converged = 0;
  for (int s = 0; s < 20; ++s) {
    const auto run = fkt::localization_convergence(static_cast<std::uint64_t>(s + 1), 100, 500);
    updates.push_back(run.updates_to_converge < 0 ? std::numeric_limits<double>::infinity()
                                                  : run.updates_to_converge);
    if (run.updates_to_converge >= 0) ++converged;
  }
  const double med = median(updates);
  out.check(med <= 40.0, "median updates <= 40");

  int ordered = 0;
  double corner_prod = 0.0;
  double line_prod = 0.0;
  double line_theta = 0.0;
  double point_theta = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto a = fkt::localization_ambiguity(static_cast<std::uint64_t>(s + 1), 20000);
    const double cp = a.corner.sigma_xy * a.corner.sigma_theta;
    const double lp = a.line.sigma_xy * a.line.sigma_theta;
    if (cp < lp && a.line.sigma_theta < a.point.sigma_theta) ++ordered;
    corner_prod += cp / 20;
    line_prod += lp / 20;
    line_theta += a.line.sigma_theta / 20;
    point_theta += a.point.sigma_theta / 20;
  }
  out.check(ordered >= 18, "ambiguity ordering in >= 18/20 seeds");
  out.check(corner_prod < line_prod && line_theta < point_theta, "ordering of the seed averages");
  out.detail << "median updates " << med << " (" << converged << "/20 converged); ordering " << ordered
             << "/20; mean corner sxy*st " << corner_prod << " < line " << line_prod << ", line st " << line_theta
             << " < point st " << point_theta;
}

// ---- 5 ----

struct CenterlineSample {
  double along;
  double across;
  int width;
};

// Bright-run centroids across an axis-aligned field line in a birdview image.
std::vector<CenterlineSample> centerline(const Image& bv, const BirdviewSpec& view, const Segment2& seg,
                                         const CameraExtrinsics& ex, double max_ground_range) {
  std::vector<CenterlineSample> out;
  const bool vertical_in_image = std::fabs(seg.a.x() - seg.b.x()) < 1e-9;  // constant field x -> constant column
  const double len = seg.length();
  for (double t = 0.0; t <= len; t += 0.005) {
    const Vec2 g = seg.a + (seg.b - seg.a) * (t / len);
    if ((g - ex.position.head<2>()).norm() > max_ground_range) continue;
    const Vec2 px = view.pixel_of(g);
    const int ax = static_cast<int>(std::floor(px.x()));
    const int ay = static_cast<int>(std::floor(px.y()));
    const int window = 10;
    double sum = 0.0;
    int count = 0;
    int first = -1;
    int last = -1;
    bool clean = true;
    for (int k = -window; k <= window; ++k) {
      const int x = vertical_in_image ? ax + k : ax;
      const int y = vertical_in_image ? ay : ay + k;
      if (!bv.contains(x, y)) {
        clean = false;
        break;
      }
      const int luma = (bv.at(x, y, 0) + bv.at(x, y, 1) + bv.at(x, y, 2)) / 3;
      if (luma == 0 && bv.at(x, y, 1) == 0) clean = false;  // outside the camera view
      if (luma > 160) {
        if (std::abs(k) == window) clean = false;
        if (last >= 0 && k != last + 1) clean = false;  // two runs: a crossing line
        if (first < 0) first = k;
        last = k;
        sum += (vertical_in_image ? x : y) + 0.5;
        ++count;
      }
    }
    if (!clean || count == 0) continue;
    out.push_back({vertical_in_image ? px.y() : px.x(), sum / count, last - first + 1});
  }
  return out;
}

double max_line_residual(const std::vector<CenterlineSample>& s) {
  // Least-squares fit of across = a + b * along.
  double sa = 0, sb = 0, saa = 0, sab = 0;
  for (const auto& p : s) {
    sa += p.along;
    sb += p.across;
    saa += p.along * p.along;
    sab += p.along * p.across;
  }
  const double n = static_cast<double>(s.size());
  const double slope = (n * sab - sa * sb) / (n * saa - sa * sa);
  const double icpt = (sb - slope * sa) / n;
  double worst = 0.0;
  for (const auto& p : s) {
    worst = std::max(worst, std::fabs(p.across - (icpt + slope * p.along)) / std::sqrt(1 + slope * slope));
  }
  return worst;
}

void birdview_geometry(Outcome& out) {
  // Round trip on random ground points through the distorted camera.
  CameraIntrinsics in;
  in.k1 = -0.3;
  in.k2 = 0.1;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_round_trip = 0.0;
  int round_trips = 0;
  while (round_trips < 1000) {
    CameraExtrinsics ex;
    ex.position = Vec3(u(rng), u(rng), 0.4 + 0.2 * u(rng));
    ex.pitch = 0.6 + 0.3 * u(rng);
    ex.yaw = u(rng) * kPi;
    ex.roll = 0.05 * u(rng);
    const Vec2 ahead(std::cos(ex.yaw), std::sin(ex.yaw));
    const Vec2 g = ex.position.head<2>() + ahead * (0.5 + 0.5 * (u(rng) + 1.0)) +
                   Vec2(-ahead.y(), ahead.x()) * 0.4 * u(rng);
    Vec2 px;
    try {
      px = project(Vec3(g.x(), g.y(), 0.0), ex, in);
    } catch (const Error&) {
      continue;
    }
    if (px.x() < 0 || px.y() < 0 || px.x() > in.width || px.y() > in.height) continue;
    worst_round_trip = std::max(worst_round_trip, (unproject_to_ground(px, ex, in) - g).norm());
    ++round_trips;
  }
  out.check(worst_round_trip <= 1e-6, "round trip <= 1e-6 m");

  // Painted lines seen by a tilted wide-angle camera come out straight in the
  // default 640 x 480, 1 cm/px birdview. The source camera has the same field
  // of view at 1280 x 960 so a 5 cm line spans several source pixels.
  CameraIntrinsics hi = in;
  hi.width = 1280;
  hi.height = 960;
  hi.fx = hi.fy = 600.0;
  hi.cx = 640.0;
  hi.cy = 480.0;
  double worst_straight = 0.0;
  int worst_width_dev = 0;
  int lines_checked = 0;
  const std::array<FieldPose, 4> poses{FieldPose{-1.2, -1.9, 0.25}, FieldPose{-0.4, 2.1, -0.3},
                                       FieldPose{3.0, -0.2, 0.4}, FieldPose{-3.3, -1.5, -2.6}};
  for (const FieldPose& pose : poses) {
    Scene scene;
    scene.robot = pose;
    scene.intrinsics = hi;
    scene.camera.position = Vec3(0.0, 0.0, 0.5);
    scene.camera.pitch = 0.7;
    const Image img = render_field(scene);
    const CameraExtrinsics ex = world_camera(scene);
    BirdviewSpec view;
    view.view_center = pose.position() + 1.2 * Vec2(std::cos(pose.theta), std::sin(pose.theta));
    const Image bv = birdview_transform(img, ex, hi, view);
    for (const auto& seg : scene.field.line_segments) {
      const auto samples = centerline(bv, view, seg, ex, 2.0);
      if (samples.size() < 40) continue;
      ++lines_checked;
      worst_straight = std::max(worst_straight, max_line_residual(samples));
      std::vector<double> widths;
      for (const auto& s : samples) widths.push_back(s.width);
      const double mw = median(widths);
      for (const auto& s : samples) worst_width_dev = std::max(worst_width_dev, static_cast<int>(std::lround(std::fabs(s.width - mw))));
    }
  }
  out.check(lines_checked >= 4, "enough lines in view");
  out.check(worst_straight <= 1.0, "birdview lines straight within 1 px");
  out.check(worst_width_dev <= 1, "birdview line width constant within 1 px");

  // The wide-angle emulation bends a border-spanning straight line.
  const CameraIntrinsics rect;
  const double k1 = -0.3;
  const double k2 = 0.1;
  const Vec2 a(0.5, 40.5);
  const Vec2 b(rect.width - 0.5, 40.5);
  std::vector<Vec2> mapped;
  for (int i = 0; i <= 100; ++i) mapped.push_back(distort_pixel(a + (b - a) * (i / 100.0), rect, k1, k2));
  double bend = 0.0;
  for (const auto& p : mapped) bend = std::max(bend, point_line_distance(p, mapped.front(), mapped.back()));
  // Same check on pixels: the bright row of the distorted image.
  const Image flat = fkt::paint_segments(rect.width, rect.height, {{Vec2(0, 40.5), Vec2(rect.width, 40.5)}}, 3.0);
  const Image bent = emulate_wide_angle(flat, rect, k1, k2);
  std::vector<Vec2> row_centers;
  for (int x = 0; x < bent.width(); ++x) {
    double sy = 0.0;
    int n = 0;
    for (int y = 0; y < bent.height(); ++y) {
      if (bent.at(x, y, 0) > 200) {
        sy += y + 0.5;
        ++n;
      }
    }
    if (n) row_centers.emplace_back(x + 0.5, sy / n);
  }
  double bend_px = 0.0;
  if (row_centers.size() > 2) {
    for (const auto& p : row_centers) {
      bend_px = std::max(bend_px, point_line_distance(p, row_centers.front(), row_centers.back()));
    }
  }
  out.check(bend > 2.0 && bend_px > 2.0, "distortion bends lines by > 2 px");
  out.detail << "round trip max " << worst_round_trip << " m over " << round_trips << " points; " << lines_checked
             << " birdview lines, max residual " << worst_straight << " px, width deviation " << worst_width_dev
             << " px; bend " << bend << " px (mapped), " << bend_px << " px (image)";
}

// ---- 6 ----

void scheduler(Outcome& out) {
  using namespace pipeline;
  const PipelineSpec diamond = parse_pipeline(R"({
    "source_slots": ["in"],
    "filters": [
      {"name": "D", "inputs": ["b", "c"], "outputs": ["d"]},
      {"name": "C", "inputs": ["a"], "outputs": ["c"]},
      {"name": "B", "inputs": ["a"], "outputs": ["b"]},
      {"name": "A", "inputs": ["in"], "outputs": ["a"]}
    ]})");
  const auto plan = compute_batches(diamond);
  const std::vector<std::vector<std::string>> want{{"A"}, {"B", "C"}, {"D"}};
  out.check(plan.batches == want, "diamond batches");

  // Divider 2 over F frames.
  PipelineSpec div;
  div.source_slots = {"in"};
  div.filters = {{"every", {"in"}, {"x"}, 1, 0.0}, {"half", {"x"}, {"y"}, 2, 0.0}};
  std::map<std::string, int> runs;
  std::mutex m;
  std::map<std::string, Filter> registry;
  for (const auto& f : div.filters) {
    registry[f.name] = [&, name = f.name, slot = f.outputs.front()](FilterIO& io) {
      std::lock_guard lock(m);
      ++runs[name];
      io.output(slot, 0);
    };
  }
  bool divider_ok = true;
  for (std::uint64_t frames : {1u, 7u, 10u, 33u}) {
    runs.clear();
    Runner runner(div, registry, 2);
    for (std::uint64_t f = 0; f < frames; ++f) runner.run_frame(f);
    divider_ok = divider_ok && runs["half"] == static_cast<int>((frames + 1) / 2) &&
                 runs["every"] == static_cast<int>(frames);
  }
  out.check(divider_ok, "divider 2 runs ceil(F/2) times");

  // Four independent 50 ms sleeps.
  PipelineSpec wide;
  wide.source_slots = {"in"};
  for (int i = 0; i < 4; ++i) wide.filters.push_back({"w" + std::to_string(i), {"in"}, {"o" + std::to_string(i)}, 1, 50.0});
  const BenchResult bench = run_bench(wide, 6, 4);
  out.check(bench.parallel_ms_per_frame <= 0.6 * bench.serial_ms_per_frame, "parallel <= 0.6 x serial");

  // Dependency audit on random DAGs.
  int audits_ok = 0;
  for (int s = 0; s < 100; ++s) {
    const PipelineSpec spec = fkt::random_pipeline(static_cast<std::uint64_t>(s + 1), 3, 12);
    std::map<std::string, Filter> reg;
    for (const auto& f : spec.filters) {
      reg[f.name] = [f](FilterIO& io) {
        for (const auto& in : f.inputs) (void)io.input(in);
        std::this_thread::sleep_for(std::chrono::microseconds(200));
        for (const auto& o : f.outputs) io.output(o, io.frame());
      };
    }
    Runner runner(spec, reg, 4);
    std::map<std::string, std::any> sources{{"camera", 0}, {"imu", 0}};
    for (std::uint64_t f = 0; f < 6; ++f) runner.run_frame(f, sources);
    std::map<std::string, std::string> producer;
    for (const auto& f : spec.filters) {
      for (const auto& o : f.outputs) producer[o] = f.name;
    }
    std::map<std::pair<std::string, std::uint64_t>, ExecutionRecord> by_key;
    for (const auto& r : runner.trace()) by_key[{r.filter, r.frame}] = r;
    bool ok = true;
    for (const auto& [key, rec] : by_key) {
      const auto& f = spec.filter(key.first);
      ok = ok && key.second % static_cast<std::uint64_t>(f.divider) == 0;
      for (const auto& in : f.inputs) {
        const auto p = producer.find(in);
        if (p == producer.end()) continue;
        const auto dep = by_key.find({p->second, key.second});
        if (dep != by_key.end()) ok = ok && dep->second.finish <= rec.start;
      }
    }
    for (const auto& f : spec.filters) {
      for (std::uint64_t fr = 0; fr < 6; ++fr) {
        ok = ok && (by_key.count({f.name, fr}) == 1) == (fr % static_cast<std::uint64_t>(f.divider) == 0);
      }
    }
    if (ok) ++audits_ok;
  }
  out.check(audits_ok == 100, "timestamp audit on 100 random DAGs");
  out.detail << "diamond batches " << plan.batches.size() << ", divider counts ok=" << divider_ok << ", 4x50 ms: "
             << bench.parallel_ms_per_frame << " ms parallel vs " << bench.serial_ms_per_frame << " ms serial ("
             << bench.parallel_ms_per_frame / bench.serial_ms_per_frame << "x), audits " << audits_ok << "/100";
}

// ---- 7 ----

void stereo_checks(Outcome& out) {
  using namespace stereo;
  StereoRig rig;
  DisparityMap d;
  d.width = rig.width;
  d.height = rig.height;
  d.values.assign(static_cast<std::size_t>(d.width) * d.height, DisparityMap::kInvalid);
  for (int i = 0; i < 96; ++i) d.at(10 + 6 * i, 20 + 4 * i) = i + 1;
  const PointCloud pts = disparity_to_points(d, rig);
  bool exact = pts.size() == 96;
  double worst_rel = 0.0;
  for (int i = 0; i < 96 && exact; ++i) {
    const double disp = i + 1;
    exact = exact && pts[static_cast<std::size_t>(i)].z() == rig.focal * rig.baseline / disp;
    worst_rel = std::max(worst_rel, std::fabs(pts[static_cast<std::size_t>(i)].z() * disp - rig.focal * rig.baseline) /
                                        (rig.focal * rig.baseline));
  }
  out.check(exact && worst_rel <= 4 * std::numeric_limits<double>::epsilon(), "Z * d = f * B");

  std::vector<double> normal_err;
  for (int s = 0; s < 20; ++s) {
    const auto pc = fkt::noisy_plane_cloud(static_cast<std::uint64_t>(s + 1), 2000, 0.005, 0.2);
    const GroundPlane p = ransac_plane(pc, 200, 0.015, static_cast<std::uint64_t>(s + 1), Vec3::UnitZ());
    normal_err.push_back(std::acos(std::min(1.0, p.normal.dot(Vec3::UnitZ()))) * 180.0 / kPi);
  }
  const double med_err = median(normal_err);
  out.check(med_err <= 2.0, "median normal error <= 2 deg");

  const auto scene = fkt::two_robot_cloud(3, 1.0, 0.1);
  const GroundPlane ground = ransac_plane(scene.cloud, 200, 0.015, 3, Vec3::UnitZ());
  const auto clusters = extract_clusters(scene.cloud, ground, 0.1, 0.15, 10);
  double worst_centroid = std::numeric_limits<double>::infinity();
  if (clusters.size() == 2) {
    worst_centroid = 0.0;
    for (const auto& truth : scene.truth_centroids) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : clusters) best = std::min(best, (c.centroid - truth).norm());
      worst_centroid = std::max(worst_centroid, best);
    }
  }
  out.check(clusters.size() == 2, "two clusters");
  out.check(worst_centroid <= 0.03, "centroid error <= 3 cm");

  // Same scene type end to end: rendered stereo pair of two boxes.
  Scene rendered;
  rendered.camera.position = Vec3(0.0, 0.0, 0.45);
  rendered.camera.pitch = 0.5;
  rendered.obstacles = {{Vec2(1.2, 0.35), 0.1, 0.35}, {Vec2(1.2, -0.35), 0.1, 0.35}};
  const auto [left, right] = render_stereo(rendered, rig);
  const ObstacleResult res = detect_obstacles(left, right, rig, ObstacleParams{});
  out.check(res.clusters.size() == 2, "rendered pair gives two clusters");

  out.detail << "z*d max rel error " << worst_rel << "; RANSAC median normal error " << med_err << " deg; clusters "
             << clusters.size() << ", worst centroid error " << worst_centroid << " m; rendered pair clusters "
             << res.clusters.size();
}

// ---- 8 ----

struct RunResult {
  int status = -1;
  std::string stdout_text;
};

RunResult run_command(const std::string& cmd) {
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.stdout_text.append(buf.data(), n);
  const int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void determinism(Outcome& out) {
  const std::string cli = FIELDKIT_CLI;
  const fs::path data = FIELDKIT_DATA_DIR;
  const fs::path dir = fs::temp_directory_path() / ("fieldkit_acceptance_" + std::to_string(getpid()));
  fs::create_directories(dir);
  auto d = [&](const char* name) { return (data / name).string(); };
  auto w = [&](const char* name) { return (dir / name).string(); };

  struct Case {
    std::string name;
    std::string args;
    std::vector<std::string> files;
  };
  const std::vector<Case> cases = {
      {"render", "render --config " + d("overhead_scene.json") + " --out " + w("overhead.ppm"), {w("overhead.ppm")}},
      {"render-camera", "render --config " + d("camera_scene.json") + " --out " + w("camera.ppm"), {w("camera.ppm")}},
      {"render-stereo",
       "render --config " + d("stereo_scene.json") + " --stereo-rig " + d("rig.json") + " --out " + w("left.pgm") +
           " --right-out " + w("right.pgm"),
       {w("left.pgm"), w("right.pgm")}},
      {"plan", "plan --config " + d("plan_request.json") + " --overlay " + w("plan.ppm"), {w("plan.ppm")}},
      {"detect-lines", "detect-lines --input " + w("overhead.ppm"), {}},
      {"birdview", "birdview --config " + d("camera.json") + " --input " + w("camera.ppm") + " --out " + w("bv.ppm"),
       {w("bv.ppm")}},
      {"distort", "distort --input " + w("overhead.ppm") + " --out " + w("distorted.ppm"), {w("distorted.ppm")}},
      {"mask", "mask --fov 100 --out " + w("mask.pgm"), {w("mask.pgm")}},
      {"gen-trajectory", "gen-trajectory --config " + d("trajectory_config.json") + " --out " + w("traj.json"),
       {w("traj.json")}},
      {"localize", "localize --config " + d("localize_config.json") + " --input " + w("traj.json"), {}},
      {"stereo",
       "stereo --left " + w("left.pgm") + " --right " + w("right.pgm") + " --rig " + d("rig.json") + " --xyz " +
           w("cloud.xyz"),
       {w("cloud.xyz")}},
      {"pipeline-bench", "pipeline-bench --config " + d("demo_pipeline.json") + " --frames 8", {}},
  };
  int identical = 0;
  for (const auto& c : cases) {
    const std::string cmd = cli + " --seed 7 " + c.args;
    std::array<RunResult, 2> runs;
    std::array<std::vector<std::string>, 2> files;
    for (int k = 0; k < 2; ++k) {
      runs[k] = run_command(cmd);
      for (const auto& f : c.files) files[k].push_back(slurp(f));
    }
    // Commands writing JSON to --out print nothing; the file is the output then.
    const bool produced = !runs[0].stdout_text.empty() || !c.files.empty();
    const bool same = runs[0].status == 0 && runs[1].status == 0 && produced &&
                      runs[0].stdout_text == runs[1].stdout_text && files[0] == files[1] &&
                      std::none_of(files[0].begin(), files[0].end(), [](const std::string& s) { return s.empty(); });
    if (same) {
      ++identical;
    } else {
      out.detail << c.name << " (exit " << runs[0].status << "/" << runs[1].status << ") differs; ";
    }
  }
  out.check(identical == static_cast<int>(cases.size()), "every subcommand byte-identical");
  out.detail << identical << "/" << cases.size() << " invocations byte-identical (stdout and written files)";
  fs::remove_all(dir);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"planner oracle equivalence", planner_oracle},
      {"kick cost semantics", cost_semantics},
      {"line detection recall and corners", line_recall},
      {"localization convergence and ambiguity", localization},
      {"birdview geometry", birdview_geometry},
      {"pipeline scheduler", scheduler},
      {"stereo obstacles", stereo_checks},
      {"CLI determinism", determinism},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    all = all && o.pass;
    std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.str().c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
