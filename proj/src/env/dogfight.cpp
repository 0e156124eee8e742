#include "pdo/env/dogfight.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace pdo::env {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double denom = a.norm() * b.norm();
  if (denom == 0.0) return 0.0;
  return std::acos(std::clamp(a.dot(b) / denom, -1.0, 1.0));
}

// Rotates v about unit axis k by angle theta (Rodrigues).
Eigen::Vector3d rotate(const Eigen::Vector3d& v, const Eigen::Vector3d& k, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return v * c + k.cross(v) * s + k * k.dot(v) * (1.0 - c);
}

AircraftState from_frame(const Eigen::Vector3d& position, double speed,
                         const Eigen::Vector3d& forward, const Eigen::Vector3d& right) {
  AircraftState s;
  s.position = position;
  s.speed = speed;
  s.heading = std::atan2(forward.y(), forward.x());
  s.pitch = std::asin(std::clamp(forward.z(), -1.0, 1.0));
  const Eigen::Vector3d level_right(std::sin(s.heading), -std::cos(s.heading), 0.0);
  const Eigen::Vector3d level_up = level_right.cross(forward).normalized();
  s.roll = std::atan2(-right.dot(level_up), right.dot(level_right));
  return s;
}

}  // namespace

BodyFrame body_frame(const AircraftState& s) {
  const double ch = std::cos(s.heading), sh = std::sin(s.heading);
  const double cp = std::cos(s.pitch), sp = std::sin(s.pitch);
  const double cr = std::cos(s.roll), sr = std::sin(s.roll);
  const Eigen::Vector3d forward(cp * ch, cp * sh, sp);
  const Eigen::Vector3d level_right(sh, -ch, 0.0);
  const Eigen::Vector3d level_up(-sp * ch, -sp * sh, cp);
  return {forward, cr * level_right - sr * level_up, sr * level_right + cr * level_up};
}

ControlAction ControlAction::from_vector(std::span<const double> a) {
  if (a.size() != 4) throw std::invalid_argument("ControlAction: expected 4 controls");
  auto c = [](double v) { return std::isfinite(v) ? std::clamp(v, -1.0, 1.0) : 0.0; };
  return {c(a[0]), c(a[1]), c(a[2]), c(a[3])};
}

std::string to_string(const Terminal& terminal) {
  const char* who = terminal.who == Side::kRed ? "red" : "blue";
  switch (terminal.kind) {
    case Terminal::Kind::kMaxSteps:
      return "max_steps";
    case Terminal::Kind::kOutOfBounds:
      return std::string("out_of_bounds:") + who;
    case Terminal::Kind::kLockWin:
      return std::string("lock_win:") + who;
  }
  return "unknown";
}

EngagementGeometry engagement_geometry(const AircraftState& attacker,
                                       const AircraftState& target) {
  const Eigen::Vector3d los = target.position - attacker.position;
  EngagementGeometry g;
  g.distance = los.norm();
  g.antenna_train_angle = angle_between(body_frame(attacker).forward, los);
  g.aspect_angle = angle_between(-body_frame(target).forward, -los);
  return g;
}

bool lock_check(const AircraftState& attacker, const AircraftState& target,
                double half_angle_deg, double range) {
  const EngagementGeometry g = engagement_geometry(attacker, target);
  return g.distance < range && g.antenna_train_angle <= half_angle_deg * kDeg + 1e-9;
}

AircraftState integrate(const AircraftState& s, const ControlAction& u,
                        const FlightLimits& limits, double dt) {
  const BodyFrame f = body_frame(s);
  const double p = u.roll * limits.max_roll_rate_deg * kDeg;
  const double q = u.elevator * limits.max_pitch_rate_deg * kDeg;
  const double r = u.rudder * limits.max_yaw_rate_deg * kDeg;
  // Body rates: roll about forward, pitch (nose up) about right, yaw (nose
  // right) about -up.
  const Eigen::Vector3d omega = p * f.forward + q * f.right - r * f.up;
  Eigen::Vector3d forward = f.forward;
  Eigen::Vector3d right = f.right;
  const double rate = omega.norm();
  if (rate > 0.0) {
    const Eigen::Vector3d axis = omega / rate;
    forward = rotate(forward, axis, rate * dt).normalized();
    right = rotate(right, axis, rate * dt);
    right = (right - right.dot(forward) * forward).normalized();
  }
  const double speed = std::clamp(s.speed + u.throttle_brake * limits.max_accel * dt,
                                  limits.min_speed, limits.max_speed);
  return from_frame(s.position + forward * speed * dt, speed, forward, right);
}

ControlAction expert_policy(const AircraftState& self, const AircraftState& target,
                            const DogfightConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> noise(-config.expert_noise, config.expert_noise);
  const BodyFrame f = body_frame(self);
  const Eigen::Vector3d los = target.position - self.position;
  const double vertical_error = std::atan2(los.dot(f.up), los.dot(f.forward));
  const double horizontal_error = std::atan2(los.dot(f.right), los.dot(f.forward));
  const double deadband = config.expert_deadband_deg * kDeg;
  const double mag = config.expert_magnitude;
  // Draw order is fixed so episodes replay exactly.
  const double n_throttle = noise(rng);
  const double n_elevator = noise(rng);
  const double n_roll = noise(rng);
  const double n_rudder = noise(rng);
  (void)n_throttle;

  ControlAction a;
  a.elevator = std::abs(vertical_error) > deadband ? std::copysign(mag, vertical_error) : n_elevator;
  a.rudder =
      std::abs(horizontal_error) > deadband ? std::copysign(mag, horizontal_error) : n_rudder;
  a.roll = n_roll;
  const EngagementGeometry g = engagement_geometry(self, target);
  const bool brake = g.aspect_angle < config.expert_brake_aspect_deg * kDeg &&
                     g.distance < config.expert_brake_distance;
  a.throttle_brake = brake ? -mag : mag;
  return a;
}

double dense_reward(const EngagementGeometry& previous, const EngagementGeometry& current,
                    bool being_locked, const DenseRewardWeights& weights) {
  const double pointing = std::cos(current.antenna_train_angle) -
                          std::cos(previous.antenna_train_angle);
  const double closure = (previous.distance - current.distance) / weights.max_distance;
  return weights.pointing * pointing + weights.closure * closure -
         (being_locked ? weights.locked_penalty : 0.0);
}

std::vector<double> behavior_descriptor(std::span<const ControlAction> actions) {
  if (actions.empty()) throw std::invalid_argument("behavior_descriptor: empty action log");
  double elevator = 0.0;
  double roll = 0.0;
  for (const auto& a : actions) {
    elevator += a.elevator;
    roll += a.roll;
  }
  const double n = static_cast<double>(actions.size());
  return {(elevator / n + 1.0) / 2.0, (roll / n + 1.0) / 2.0};
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows) {
  out << "step";
  for (const char* side : {"red", "blue"}) {
    for (const char* field : {"x", "y", "z", "speed", "heading", "pitch", "roll"}) {
      out << ',' << side << '_' << field;
    }
  }
  for (const char* side : {"red", "blue"}) {
    for (const char* field : {"throttle_brake", "elevator", "roll_cmd", "rudder"}) {
      out << ',' << side << '_' << field;
    }
  }
  out << ",red_locks,blue_locks,sparse_reward\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.step;
    for (const AircraftState* s : {&r.red, &r.blue}) {
      out << ',' << s->position.x() << ',' << s->position.y() << ',' << s->position.z() << ','
          << s->speed << ',' << s->heading << ',' << s->pitch << ',' << s->roll;
    }
    for (const ControlAction* a : {&r.red_action, &r.blue_action}) {
      out << ',' << a->throttle_brake << ',' << a->elevator << ',' << a->roll << ',' << a->rudder;
    }
    out << ',' << r.red_locks << ',' << r.blue_locks << ',' << r.sparse_reward << '\n';
  }
}

nlohmann::json to_json(const DogfightConfig& c) {
  return {{"dt", c.dt},
          {"max_steps", c.max_steps},
          {"lock_step_limit", c.lock_step_limit},
          {"lock_half_angle_deg", c.lock_half_angle_deg},
          {"lock_range", c.lock_range},
          {"half_width", c.half_width},
          {"min_altitude", c.min_altitude},
          {"max_altitude", c.max_altitude},
          {"spawn_separation", c.spawn_separation},
          {"spawn_altitude", c.spawn_altitude},
          {"spawn_speed", c.spawn_speed},
          {"spawn_position_jitter", c.spawn_position_jitter},
          {"spawn_heading_jitter_deg", c.spawn_heading_jitter_deg},
          {"out_of_bounds_penalty", c.out_of_bounds_penalty},
          {"expert_magnitude", c.expert_magnitude},
          {"expert_noise", c.expert_noise},
          {"expert_deadband_deg", c.expert_deadband_deg},
          {"expert_brake_aspect_deg", c.expert_brake_aspect_deg},
          {"expert_brake_distance", c.expert_brake_distance},
          {"limits",
           {{"min_speed", c.limits.min_speed},
            {"max_speed", c.limits.max_speed},
            {"max_accel", c.limits.max_accel},
            {"max_pitch_rate_deg", c.limits.max_pitch_rate_deg},
            {"max_roll_rate_deg", c.limits.max_roll_rate_deg},
            {"max_yaw_rate_deg", c.limits.max_yaw_rate_deg}}},
          {"dense",
           {{"pointing", c.dense.pointing},
            {"closure", c.dense.closure},
            {"locked_penalty", c.dense.locked_penalty},
            {"max_distance", c.dense.max_distance}}}};
}

DogfightConfig dogfight_config_from_json(const nlohmann::json& j) {
  DogfightConfig c;
#define PDO_READ(field) c.field = j.value(#field, c.field)
  PDO_READ(dt);
  PDO_READ(max_steps);
  PDO_READ(lock_step_limit);
  PDO_READ(lock_half_angle_deg);
  PDO_READ(lock_range);
  PDO_READ(half_width);
  PDO_READ(min_altitude);
  PDO_READ(max_altitude);
  PDO_READ(spawn_separation);
  PDO_READ(spawn_altitude);
  PDO_READ(spawn_speed);
  PDO_READ(spawn_position_jitter);
  PDO_READ(spawn_heading_jitter_deg);
  PDO_READ(out_of_bounds_penalty);
  PDO_READ(expert_magnitude);
  PDO_READ(expert_noise);
  PDO_READ(expert_deadband_deg);
  PDO_READ(expert_brake_aspect_deg);
  PDO_READ(expert_brake_distance);
#undef PDO_READ
  if (j.contains("limits")) {
    const auto& l = j.at("limits");
    c.limits.min_speed = l.value("min_speed", c.limits.min_speed);
    c.limits.max_speed = l.value("max_speed", c.limits.max_speed);
    c.limits.max_accel = l.value("max_accel", c.limits.max_accel);
    c.limits.max_pitch_rate_deg = l.value("max_pitch_rate_deg", c.limits.max_pitch_rate_deg);
    c.limits.max_roll_rate_deg = l.value("max_roll_rate_deg", c.limits.max_roll_rate_deg);
    c.limits.max_yaw_rate_deg = l.value("max_yaw_rate_deg", c.limits.max_yaw_rate_deg);
  }
  if (j.contains("dense")) {
    const auto& d = j.at("dense");
    c.dense.pointing = d.value("pointing", c.dense.pointing);
    c.dense.closure = d.value("closure", c.dense.closure);
    c.dense.locked_penalty = d.value("locked_penalty", c.dense.locked_penalty);
    c.dense.max_distance = d.value("max_distance", c.dense.max_distance);
  }
  return c;
}

DogfightEnv::DogfightEnv(DogfightConfig config) : config_(std::move(config)) {
  if (config_.max_steps < 1 || config_.lock_step_limit < 1 || config_.dt <= 0.0) {
    throw std::invalid_argument("DogfightEnv: invalid configuration");
  }
  reset(0);
}

Observation DogfightEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const double half = config_.spawn_separation / 2.0;
  const double pj = config_.spawn_position_jitter;
  const double hj = config_.spawn_heading_jitter_deg * kDeg;
  AircraftState red;
  red.position = {-half + pj * jitter(rng_), pj * jitter(rng_),
                  config_.spawn_altitude + pj * jitter(rng_)};
  red.heading = hj * jitter(rng_);
  red.speed = config_.spawn_speed;
  AircraftState blue;
  blue.position = {half + pj * jitter(rng_), pj * jitter(rng_),
                   config_.spawn_altitude + pj * jitter(rng_)};
  blue.heading = std::numbers::pi - hj * jitter(rng_);
  blue.heading = std::atan2(std::sin(blue.heading), std::cos(blue.heading));
  blue.speed = config_.spawn_speed;
  return reset_to(red, blue, rng_());
}

Observation DogfightEnv::reset_to(const AircraftState& red, const AircraftState& blue,
                                  std::uint64_t seed) {
  rng_.seed(seed);
  red_ = red;
  blue_ = blue;
  status_ = {};
  last_geometry_ = engagement_geometry(red_, blue_);
  red_actions_.clear();
  trajectory_.clear();
  return observe();
}

bool DogfightEnv::out_of_bounds(const AircraftState& s) const {
  return std::abs(s.position.x()) > config_.half_width ||
         std::abs(s.position.y()) > config_.half_width ||
         s.position.z() < config_.min_altitude || s.position.z() > config_.max_altitude;
}

StepResult DogfightEnv::step(std::span<const double> action) {
  if (status_.terminal) throw std::logic_error("DogfightEnv::step: episode finished");
  const ControlAction red_action = ControlAction::from_vector(action);
  const ControlAction blue_action = expert_policy(blue_, red_, config_, rng_);
  red_ = integrate(red_, red_action, config_.limits, config_.dt);
  blue_ = integrate(blue_, blue_action, config_.limits, config_.dt);
  red_actions_.push_back(red_action);
  ++status_.step;

  const bool red_locks = lock_check(red_, blue_, config_.lock_half_angle_deg, config_.lock_range);
  const bool blue_locks = lock_check(blue_, red_, config_.lock_half_angle_deg, config_.lock_range);
  status_.lock_steps_red += red_locks ? 1 : 0;
  status_.lock_steps_blue += blue_locks ? 1 : 0;
  const bool red_out = out_of_bounds(red_);
  const bool blue_out = out_of_bounds(blue_);

  StepResult out;
  out.sparse_reward = (red_locks ? 1.0 : 0.0) - (blue_locks ? 1.0 : 0.0) +
                      (red_out ? config_.out_of_bounds_penalty : 0.0);
  const EngagementGeometry geometry = engagement_geometry(red_, blue_);
  out.reward = out.sparse_reward +
               dense_reward(last_geometry_, geometry, blue_locks, config_.dense);
  last_geometry_ = geometry;

  if (red_out) {
    status_.terminal = Terminal{Terminal::Kind::kOutOfBounds, Side::kRed};
  } else if (blue_out) {
    status_.terminal = Terminal{Terminal::Kind::kOutOfBounds, Side::kBlue};
  } else if (status_.lock_steps_blue >= config_.lock_step_limit) {
    status_.terminal = Terminal{Terminal::Kind::kLockWin, Side::kBlue};
  } else if (status_.lock_steps_red >= config_.lock_step_limit) {
    status_.terminal = Terminal{Terminal::Kind::kLockWin, Side::kRed};
  } else if (status_.step >= config_.max_steps) {
    status_.terminal = Terminal{Terminal::Kind::kMaxSteps, Side::kRed};
  }
  out.done = status_.terminal.has_value();
  out.obs = observe();

  if (recording_) {
    trajectory_.push_back({status_.step, red_, blue_, red_action, blue_action, red_locks,
                           blue_locks, out.sparse_reward});
  }
  return out;
}

std::vector<double> DogfightEnv::behavior_descriptor() const {
  if (red_actions_.empty()) return {0.5, 0.5};
  return env::behavior_descriptor(red_actions_);
}

std::unique_ptr<Environment> DogfightEnv::clone() const {
  return std::make_unique<DogfightEnv>(config_);
}

Observation DogfightEnv::observe() const {
  const BodyFrame own = body_frame(red_);
  const BodyFrame opp = body_frame(blue_);
  const Eigen::Vector3d rel = blue_.position - red_.position;
  const double scale = config_.dense.max_distance;
  const double mid_speed = 0.5 * (config_.limits.min_speed + config_.limits.max_speed);
  const double half_speed = 0.5 * (config_.limits.max_speed - config_.limits.min_speed);
  const double mid_alt = 0.5 * (config_.min_altitude + config_.max_altitude);
  const double half_alt = 0.5 * (config_.max_altitude - config_.min_altitude);
  const EngagementGeometry g = engagement_geometry(red_, blue_);
  auto in_body = [&](const Eigen::Vector3d& v) {
    return Eigen::Vector3d(v.dot(own.forward), v.dot(own.right), v.dot(own.up));
  };
  const Eigen::Vector3d rel_b = in_body(rel) / scale;
  const Eigen::Vector3d opp_fwd = in_body(opp.forward);
  const Eigen::Vector3d opp_up = in_body(opp.up);
  return {red_.position.x() / config_.half_width,
          red_.position.y() / config_.half_width,
          (red_.position.z() - mid_alt) / half_alt,
          (red_.speed - mid_speed) / half_speed,
          std::cos(red_.heading),
          std::sin(red_.heading),
          std::sin(red_.pitch),
          std::cos(red_.roll),
          std::sin(red_.roll),
          rel_b.x(),
          rel_b.y(),
          rel_b.z(),
          opp_fwd.x(),
          opp_fwd.y(),
          opp_fwd.z(),
          opp_up.x(),
          opp_up.y(),
          opp_up.z(),
          (blue_.speed - mid_speed) / half_speed,
          g.distance / scale,
          g.antenna_train_angle / std::numbers::pi,
          g.aspect_angle / std::numbers::pi};
}

}  // namespace pdo::env
