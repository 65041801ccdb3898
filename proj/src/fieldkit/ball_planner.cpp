#include "fieldkit/ball_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "fieldkit/error.hpp"

namespace fieldkit {

namespace {

constexpr double kAlignedTolerance = 0.1;  // rad

}  // namespace

void PlanContext::validate() const {
  if (!(ball_speed > 0.0 && walk_speed > 0.0 && turn_speed > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "ball, walk and turn speeds must be positive");
  }
  if (!(opponent_radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "opponent_radius must be positive");
  if (kick_lengths.empty()) throw Error(ErrorKind::InvalidArgument, "kick_lengths must not be empty");
}

double time_to_approach_ball(const Vec2& ball, const FieldPose& player, const PlanContext& ctx,
                             const FieldSpec& spec) {
  const Vec2 delta = ball - player.position();
  const double dist = delta.norm();
  double heading_needed = 0.0;
  if (dist < spec.cell_size) {
    const Vec2 aim = spec.opponent_goal() - ball;
    heading_needed = aim.squaredNorm() > 0.0 ? std::atan2(aim.y(), aim.x()) : player.theta;
  } else {
    heading_needed = std::atan2(delta.y(), delta.x());
  }
  const double rotation = std::fabs(normalize_angle(heading_needed - player.theta));
  if (dist < spec.cell_size && rotation <= kAlignedTolerance) return 0.0;
  return dist / ctx.walk_speed + rotation / ctx.turn_speed;
}

bool intersect_opponent(const Vec2& from, const Vec2& to, const std::vector<Vec2>& opponents,
                        double radius) {
  return std::any_of(opponents.begin(), opponents.end(), [&](const Vec2& o) {
    return point_segment_distance(o, from, to) < radius;
  });
}

double compute_cost(const PlanContext& ctx, const FieldSpec& spec, const Vec2& from, const Vec2& to,
                    bool first_kick) {
  const double ball_travel = (to - from).norm() / ctx.ball_speed;
  if (!first_kick) return ball_travel;
  const double reach = time_to_approach_ball(from, ctx.robot, ctx, spec);
  if (intersect_opponent(from, to, ctx.opponents, ctx.opponent_radius)) {
    return reach + ball_travel * 2.0;
  }
  return reach + ball_travel;
}

double heuristic(const PlanContext& ctx, const FieldSpec& spec, const Vec2& to, bool first_kick) {
  const double to_goal = (spec.opponent_goal() - to).norm() / ctx.ball_speed;
  if (!first_kick) return to_goal;
  double receive = 0.0;
  if (!ctx.teammates.empty()) {
    receive = std::numeric_limits<double>::infinity();
    for (const auto& mate : ctx.teammates) {
      receive = std::min(receive, time_to_approach_ball(to, mate, ctx, spec));
    }
  }
  return receive + to_goal;
}

BallPlan plan_ball_path(const PlanContext& ctx, const FieldSpec& spec, const PlanOptions& options) {
  ctx.validate();
  if (std::fabs(ctx.ball.x()) > spec.length / 2.0 || std::fabs(ctx.ball.y()) > spec.width / 2.0) {
    throw Error(ErrorKind::OutOfField, "ball is outside the field");
  }
  const KickGraph graph(spec, ctx.kick_lengths);
  const int n = spec.cell_count();
  const GridIndex start = pose_to_cell(ctx.ball, spec);
  const int start_id = flat_index(start, spec);

  std::vector<char> is_target(static_cast<std::size_t>(n), 0);
  if (options.targets.empty()) {
    is_target[flat_index(pose_to_cell(spec.opponent_goal(), spec), spec)] = 1;
  } else {
    for (const auto& t : options.targets) {
      if (!is_valid(t, spec)) throw Error(ErrorKind::InvalidArgument, "target cell out of range");
      is_target[flat_index(t, spec)] = 1;
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(static_cast<std::size_t>(n), inf);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::vector<char> closed(static_cast<std::size_t>(n), 0);

  // (f, g, cell): lowest f first, then lower g, then smaller index.
  using Entry = std::tuple<double, double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  g[start_id] = 0.0;
  open.emplace(0.0, 0.0, start_id);

  BallPlan plan;
  int reached = -1;
  while (!open.empty()) {
    const auto [f, gv, id] = open.top();
    open.pop();
    if (closed[id] || gv != g[id]) continue;
    closed[id] = 1;
    ++plan.expanded_nodes;
    if (is_target[id]) {
      reached = id;
      break;
    }
    const bool first_kick = id == start_id;
    const GridIndex cell = from_flat(id, spec);
    const Vec2 from = cell_center(cell, spec);
    graph.for_each_edge(cell, [&](const GridIndex& next, double) {
      const int nid = flat_index(next, spec);
      if (closed[nid]) return;
      const Vec2 to = cell_center(next, spec);
      const double ng = gv + compute_cost(ctx, spec, from, to, first_kick);
      if (ng < g[nid]) {
        g[nid] = ng;
        parent[nid] = id;
        const double h = options.use_heuristic ? heuristic(ctx, spec, to, first_kick) : 0.0;
        open.emplace(ng + h, ng, nid);
      }
    });
  }
  if (reached < 0) throw Error(ErrorKind::NoPath, "no kick sequence reaches the goal");

  std::vector<int> chain;
  for (int id = reached; id >= 0; id = parent[id]) chain.push_back(id);
  std::reverse(chain.begin(), chain.end());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const GridIndex cell = from_flat(chain[k], spec);
    plan.cells.push_back(cell);
    plan.waypoints.push_back(cell_center(cell, spec));
    if (k > 0) {
      plan.edge_costs.push_back(
          compute_cost(ctx, spec, plan.waypoints[k - 1], plan.waypoints[k], k == 1));
    }
  }
  plan.total_cost = g[reached];
  return plan;
}

}  // namespace fieldkit
