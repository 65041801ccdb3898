#include "fieldkit/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldkit/error.hpp"

namespace fieldkit {

namespace {

constexpr double kGate2 = 9.0;  // 3 sigma

Vec2 to_robot(const Vec2& world, const FieldPose& pose) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const Vec2 d = world - pose.position();
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

Vec2 normal_of(double direction) { return {-std::sin(direction), std::cos(direction)}; }

}  // namespace

RobotObservation RobotObservation::line(double distance, double direction) {
  RobotObservation o;
  o.kind = ObservationKind::Line;
  // Keep the line itself fixed while folding the direction into [0, pi).
  const double folded = normalize_direction(direction);
  const double turns = std::round((direction - folded) / kPi);
  o.direction = folded;
  o.distance = std::fmod(std::fabs(turns), 2.0) == 1.0 ? -distance : distance;
  return o;
}

RobotObservation RobotObservation::corner(const Vec2& position, double orientation) {
  RobotObservation o;
  o.kind = ObservationKind::Corner;
  o.position = position;
  o.orientation = normalize_angle(orientation);
  return o;
}

RobotObservation RobotObservation::point(const Vec2& position) {
  RobotObservation o;
  o.kind = ObservationKind::PointFeature;
  o.position = position;
  return o;
}

FieldPose compose(const FieldPose& pose, const FieldPose& delta) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return {pose.x + c * delta.x - s * delta.y, pose.y + s * delta.x + c * delta.y,
          normalize_angle(pose.theta + delta.theta)};
}

void predict(std::vector<Particle>& particles, const FieldPose& odometry, const OdometryNoise& noise,
             std::mt19937_64& rng) {
  if (noise.x < 0.0 || noise.y < 0.0 || noise.theta < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "odometry noise must be non-negative");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& p : particles) {
    FieldPose d = odometry;
    d.x += noise.x * gauss(rng);
    d.y += noise.y * gauss(rng);
    d.theta += noise.theta * gauss(rng);
    p.pose = compose(p.pose, d);
  }
}

std::vector<RobotObservation> expected_observations(const FieldPose& pose, const FieldSpec& spec,
                                                    double max_range) {
  std::vector<RobotObservation> out;
  const Vec2 here = pose.position();
  for (const auto& seg : spec.line_segments) {
    if (point_segment_distance(here, seg.a, seg.b) > max_range) continue;
    const Vec2 a = to_robot(seg.a, pose);
    const Vec2 b = to_robot(seg.b, pose);
    const double dir = std::atan2(b.y() - a.y(), b.x() - a.x());
    out.push_back(RobotObservation::line(normal_of(dir).dot(a), dir));
  }
  for (const auto& c : field_corners(spec)) {
    if ((c.position - here).norm() > max_range) continue;
    out.push_back(RobotObservation::corner(to_robot(c.position, pose), c.orientation - pose.theta));
  }
  return out;
}

std::vector<RobotObservation> expected_point_features(const FieldPose& pose, const FieldSpec& spec,
                                                      double max_range) {
  std::vector<RobotObservation> out;
  for (const Vec2& post : goal_posts(spec)) {
    if ((post - pose.position()).norm() > max_range) continue;
    out.push_back(RobotObservation::point(to_robot(post, pose)));
  }
  return out;
}

LandmarkMap::LandmarkMap(const FieldSpec& spec, double visibility) : visibility_(visibility) {
  if (!(visibility > 0.0)) throw Error(ErrorKind::InvalidArgument, "visibility must be positive");
  for (const auto& seg : spec.line_segments) {
    const double dir = normalize_direction(std::atan2(seg.b.y() - seg.a.y(), seg.b.x() - seg.a.x()));
    lines_.push_back({dir, normal_of(dir).dot(seg.a), seg});
  }
  for (const auto& c : field_corners(spec)) corners_.push_back({c.position, c.orientation});
  points_ = goal_posts(spec);
}

double LandmarkMap::best_residual2(const RobotObservation& obs, const FieldPose& pose,
                                   const ObservationSigmas& s) const {
  double best = std::numeric_limits<double>::infinity();
  switch (obs.kind) {
    case ObservationKind::Line: {
      for (const auto& l : lines_) {
        if (point_segment_distance(pose.position(), l.segment.a, l.segment.b) > visibility_) continue;
        // The landmark seen from the pose, folded into [0, pi) like the observation.
        const double raw = l.direction - pose.theta;
        double expected_dir = normalize_direction(raw);
        double expected_dist = l.offset - normal_of(l.direction).dot(pose.position());
        if (std::fmod(std::fabs(std::round((raw - expected_dir) / kPi)), 2.0) == 1.0) expected_dist = -expected_dist;
        // Compare directions mod pi; crossing the fold flips the distance sign.
        const double diff = obs.direction - expected_dir;
        const double turns = std::round(diff / kPi);
        const double d_dir = diff - turns * kPi;
        if (turns != 0.0) expected_dist = -expected_dist;
        const double rd = (obs.distance - expected_dist) / s.distance;
        const double ra = d_dir / s.angle;
        best = std::min(best, rd * rd + ra * ra);
      }
      break;
    }
    case ObservationKind::Corner: {
      for (const auto& c : corners_) {
        const Vec2 e = to_robot(c.position, pose);
        if (e.squaredNorm() > visibility_ * visibility_) continue;
        const double rp2 = (obs.position - e).squaredNorm() / (s.position * s.position);
        const double ra = normalize_angle(obs.orientation - (c.orientation - pose.theta)) / s.angle;
        best = std::min(best, rp2 + ra * ra);
      }
      break;
    }
    case ObservationKind::PointFeature: {
      for (const Vec2& p : points_) {
        const Vec2 e = to_robot(p, pose);
        if (e.squaredNorm() > visibility_ * visibility_) continue;
        best = std::min(best, (obs.position - e).squaredNorm() / (s.position * s.position));
      }
      break;
    }
  }
  return best;
}

double observation_likelihood(const RobotObservation& obs, const FieldPose& pose, const LandmarkMap& map,
                              const ObservationSigmas& sigmas) {
  if (!(sigmas.distance > 0.0 && sigmas.position > 0.0 && sigmas.angle > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "observation sigmas must be positive");
  }
  const double r2 = map.best_residual2(obs, pose, sigmas);
  return std::exp(-0.5 * std::min(r2, kGate2));
}

double observation_likelihood(const RobotObservation& obs, const FieldPose& pose, const FieldSpec& spec,
                              const ObservationSigmas& sigmas) {
  return observation_likelihood(obs, pose, LandmarkMap(spec), sigmas);
}

double effective_sample_size(const std::vector<Particle>& particles) {
  double sum = 0.0;
  double sum2 = 0.0;
  for (const auto& p : particles) {
    sum += p.weight;
    sum2 += p.weight * p.weight;
  }
  return sum2 > 0.0 ? sum * sum / sum2 : 0.0;
}

void systematic_resample(std::vector<Particle>& particles, std::mt19937_64& rng) {
  const std::size_t n = particles.size();
  if (n == 0) return;
  double total = 0.0;
  for (const auto& p : particles) total += p.weight;
  std::uniform_real_distribution<double> uni(0.0, 1.0 / static_cast<double>(n));
  const double start = uni(rng);
  std::vector<Particle> out;
  out.reserve(n);
  double cumulative = particles[0].weight / total;
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double u = start + static_cast<double>(k) / static_cast<double>(n);
    while (u > cumulative && i + 1 < n) cumulative += particles[++i].weight / total;
    out.push_back({particles[i].pose, 1.0 / static_cast<double>(n)});
  }
  particles = std::move(out);
}

bool update_and_resample(std::vector<Particle>& particles, const std::vector<RobotObservation>& observations,
                         const LandmarkMap& map, const ObservationSigmas& sigmas, std::mt19937_64& rng,
                         double* mean_fit) {
  if (particles.empty()) throw Error(ErrorKind::InvalidArgument, "particle set is empty");
  if (!(sigmas.distance > 0.0 && sigmas.position > 0.0 && sigmas.angle > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "observation sigmas must be positive");
  }
  // Work in log space, rescaled by the best particle, so long observation
  // lists cannot underflow every weight at once.
  std::vector<double> log_w(particles.size(), -std::numeric_limits<double>::infinity());
  double best = -std::numeric_limits<double>::infinity();
  double fit = 0.0;
  double prior_total = 0.0;
  const double per_obs = observations.empty() ? 1.0 : 1.0 / static_cast<double>(observations.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (!(particles[i].weight > 0.0) || !std::isfinite(particles[i].weight)) continue;
    double ll = 0.0;
    for (const auto& obs : observations) ll -= 0.5 * std::min(map.best_residual2(obs, particles[i].pose, sigmas), kGate2);
    fit += particles[i].weight * std::exp(ll * per_obs);
    prior_total += particles[i].weight;
    log_w[i] = std::log(particles[i].weight) + ll;
    best = std::max(best, log_w[i]);
  }
  if (mean_fit) *mean_fit = prior_total > 0.0 ? fit / prior_total : 0.0;
  if (!std::isfinite(best)) throw Error(ErrorKind::Degenerate, "every particle weight is zero");
  double total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    particles[i].weight = std::exp(log_w[i] - best);
    total += particles[i].weight;
  }
  for (auto& p : particles) p.weight /= total;
  if (effective_sample_size(particles) < 0.5 * static_cast<double>(particles.size())) {
    systematic_resample(particles, rng);
    return true;
  }
  return false;
}

PoseEstimate estimate_pose(const std::vector<Particle>& particles) {
  PoseEstimate e;
  double total = 0.0;
  double mx = 0.0;
  double my = 0.0;
  double sc = 0.0;
  double ss = 0.0;
  for (const auto& p : particles) {
    total += p.weight;
    mx += p.weight * p.pose.x;
    my += p.weight * p.pose.y;
    sc += p.weight * std::cos(p.pose.theta);
    ss += p.weight * std::sin(p.pose.theta);
  }
  if (!(total > 0.0)) return e;
  mx /= total;
  my /= total;
  double var = 0.0;
  for (const auto& p : particles) {
    var += p.weight * ((p.pose.x - mx) * (p.pose.x - mx) + (p.pose.y - my) * (p.pose.y - my));
  }
  const double r = std::hypot(sc, ss) / total;
  e.pose = {mx, my, std::atan2(ss, sc)};
  e.sigma_xy = std::sqrt(var / total);
  e.sigma_theta = r >= 1.0 ? 0.0 : (r > 0.0 ? std::sqrt(-2.0 * std::log(r)) : std::numeric_limits<double>::infinity());
  return e;
}

std::vector<Particle> uniform_particles(std::size_t count, const Region& region, std::mt19937_64& rng) {
  if (!(region.x_max >= region.x_min && region.y_max >= region.y_min)) {
    throw Error(ErrorKind::InvalidArgument, "region bounds are inverted");
  }
  std::uniform_real_distribution<double> ux(region.x_min, region.x_max);
  std::uniform_real_distribution<double> uy(region.y_min, region.y_max);
  std::uniform_real_distribution<double> ut(-kPi, kPi);
  std::vector<Particle> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    out.push_back({{x, y, normalize_angle(ut(rng))}, 1.0 / static_cast<double>(count)});
  }
  return out;
}

ParticleFilter::ParticleFilter(const FieldSpec& spec, const FilterConfig& config, std::uint64_t seed)
    : map_(spec, config.match_range),
      config_(config),
      rng_(seed),
      corners_(field_corners(spec)),
      field_{-spec.length / 2.0, spec.length / 2.0, -spec.width / 2.0, spec.width / 2.0} {
  if (config.particles == 0) throw Error(ErrorKind::InvalidArgument, "particle count must be positive");
  if (!(config.reset_max_fraction >= 0.0 && config.reset_max_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "reset_max_fraction must lie in [0, 1]");
  }
  if (!(config.fit_rate_slow > 0.0 && config.fit_rate_slow <= config.fit_rate_fast && config.fit_rate_fast <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "fit rates must satisfy 0 < slow <= fast <= 1");
  }
  reset(field_);
}

void ParticleFilter::reset(const Region& region) {
  particles_ = uniform_particles(config_.particles, region, rng_);
  fit_started_ = false;
  last_injected_ = 0;
}

FieldPose ParticleFilter::corner_hypothesis(const RobotObservation& corner) {
  // The pose from which a layout corner would be seen exactly as observed.
  const FieldCorner& c = corners_[rng_() % corners_.size()];
  std::normal_distribution<double> pos(0.0, config_.sigmas.position);
  std::normal_distribution<double> ang(0.0, config_.sigmas.angle);
  const double theta = normalize_angle(c.orientation - corner.orientation + ang(rng_));
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const Vec2 offset(ct * corner.position.x() - st * corner.position.y(),
                    st * corner.position.x() + ct * corner.position.y());
  const Vec2 p = c.position - offset;
  return {p.x() + pos(rng_), p.y() + pos(rng_), theta};
}

void ParticleFilter::step(const FieldPose& odometry, const std::vector<RobotObservation>& observations) {
  predict(particles_, odometry, config_.odometry_noise, rng_);
  inject(observations);
  double fit = 1.0;
  update_and_resample(particles_, observations, map_, config_.sigmas, rng_, &fit);
  if (observations.empty()) return;
  if (!fit_started_) {
    fit_slow_ = fit_fast_ = fit;
    fit_started_ = true;
    return;
  }
  fit_slow_ += config_.fit_rate_slow * (fit - fit_slow_);
  fit_fast_ += config_.fit_rate_fast * (fit - fit_fast_);
}

void ParticleFilter::inject(const std::vector<RobotObservation>& observations) {
  // Redrawn before the update, so hypotheses that explain only the one corner
  // they were built from are weighted down by the rest of the observations.
  last_injected_ = 0;
  if (!fit_started_ || corners_.empty() || !(fit_slow_ > 0.0)) return;
  std::vector<const RobotObservation*> seen;
  for (const auto& o : observations) {
    if (o.kind == ObservationKind::Corner) seen.push_back(&o);
  }
  if (seen.empty()) return;
  const double fraction = std::min(config_.reset_max_fraction, std::max(0.0, 1.0 - fit_fast_ / fit_slow_));
  const auto count = static_cast<std::size_t>(fraction * static_cast<double>(particles_.size()));
  if (count == 0) return;
  double total = 0.0;
  for (auto& p : particles_) total += p.weight;
  for (auto& p : particles_) p.weight /= total;
  const double mean_w = 1.0 / static_cast<double>(particles_.size());
  for (std::size_t k = 0; k < count; ++k) {
    Particle& p = particles_[rng_() % particles_.size()];
    p.pose = corner_hypothesis(*seen[rng_() % seen.size()]);
    p.weight = mean_w;
  }
  last_injected_ = count;
}

}  // namespace fieldkit
