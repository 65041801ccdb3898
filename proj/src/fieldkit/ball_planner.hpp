#pragma once

#include <cstddef>
#include <vector>

#include "fieldkit/field_model.hpp"

namespace fieldkit {

/// Everything the kick planner needs to know about the current game state.
struct PlanContext {
  FieldPose robot;
  std::vector<FieldPose> teammates;
  std::vector<Vec2> opponents;
  Vec2 ball{0.0, 0.0};
  double ball_speed = 2.0;       // m/s
  double walk_speed = 0.2;       // m/s
  double turn_speed = 1.0;       // rad/s
  double opponent_radius = 0.3;  // m
  std::vector<double> kick_lengths{0.5, 1.0, 2.0};

  void validate() const;
};

struct PlanOptions {
  /// When false the heuristic is forced to zero and the search is plain Dijkstra.
  bool use_heuristic = true;
  /// Target cells; empty means the cell nearest the opponent goal center.
  std::vector<GridIndex> targets;
};

struct BallPlan {
  std::vector<Vec2> waypoints;  ///< cell centers, ball cell first
  std::vector<GridIndex> cells;
  std::vector<double> edge_costs;
  double total_cost = 0.0;  ///< seconds
  std::size_t expanded_nodes = 0;
};

/// Time for a player to reach the ball ready to kick. Near the ball (closer
/// than one cell) the player must face the opponent goal; elsewhere it must
/// face the ball. Zero when already at the ball and within 0.1 rad of the aim.
double time_to_approach_ball(const Vec2& ball, const FieldPose& player, const PlanContext& ctx,
                             const FieldSpec& spec);

/// True iff some opponent lies strictly closer than radius to the closed segment.
bool intersect_opponent(const Vec2& from, const Vec2& to, const std::vector<Vec2>& opponents,
                        double radius);

/// Edge cost in seconds. Only the first kick pays for the approach and for
/// kicking through an opponent (ball travel time counted twice).
double compute_cost(const PlanContext& ctx, const FieldSpec& spec, const Vec2& from, const Vec2& to,
                    bool first_kick);

/// Remaining time estimate: ball travel to the goal center, plus the fastest
/// teammate's approach to the landing point after the first kick.
double heuristic(const PlanContext& ctx, const FieldSpec& spec, const Vec2& to, bool first_kick);

/// A* over the kick graph from the ball cell to the goal cell(s).
/// Throws OutOfField if the ball is off the field, NoPath if no target is reachable.
BallPlan plan_ball_path(const PlanContext& ctx, const FieldSpec& spec, const PlanOptions& options = {});

}  // namespace fieldkit
