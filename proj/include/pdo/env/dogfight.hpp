#pragma once

// Two-aircraft engagement in a bounded 3-D box. The learner flies "red"; a
// scripted expert flies "blue". World frame is x east, y north, z up (m).
// Heading is counter-clockwise from +x, pitch is nose-up positive, roll is
// right-wing-down positive.

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "json.hpp"
#include "pdo/env/environment.hpp"

namespace pdo::env {

struct AircraftState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double speed = 200.0;
  double heading = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

// Body axes expressed in the world frame.
struct BodyFrame {
  Eigen::Vector3d forward;
  Eigen::Vector3d right;
  Eigen::Vector3d up;
};

BodyFrame body_frame(const AircraftState& s);

// Control slots, each clamped to [-1, 1].
struct ControlAction {
  double throttle_brake = 0.0;
  double elevator = 0.0;
  double roll = 0.0;
  double rudder = 0.0;

  static ControlAction from_vector(std::span<const double> a);
  std::array<double, 4> as_array() const { return {throttle_brake, elevator, roll, rudder}; }
};

enum class Side { kRed, kBlue };

struct Terminal {
  enum class Kind { kMaxSteps, kOutOfBounds, kLockWin };
  Kind kind = Kind::kMaxSteps;
  Side who = Side::kRed;  // aircraft that left the box, or that held the lock
};

std::string to_string(const Terminal& terminal);

struct EpisodeStatus {
  int step = 0;
  int lock_steps_red = 0;   // steps on which red locked blue
  int lock_steps_blue = 0;  // steps on which blue locked red
  std::optional<Terminal> terminal;
};

struct FlightLimits {
  double min_speed = 50.0;
  double max_speed = 400.0;
  double max_accel = 10.0;            // m/s^2 at full throttle / brake
  double max_pitch_rate_deg = 30.0;   // elevator
  double max_roll_rate_deg = 90.0;    // ailerons
  double max_yaw_rate_deg = 15.0;     // rudder
};

struct DenseRewardWeights {
  double pointing = 0.1;
  double closure = 0.1;
  double locked_penalty = 0.01;
  double max_distance = 10000.0;
};

struct DogfightConfig {
  FlightLimits limits;
  DenseRewardWeights dense;
  double dt = 0.1;
  int max_steps = 3000;
  int lock_step_limit = 1000;
  double lock_half_angle_deg = 10.0;
  double lock_range = 1000.0;
  double half_width = 10000.0;  // |x|, |y| bound
  double min_altitude = 100.0;
  double max_altitude = 10000.0;
  double spawn_separation = 8000.0;
  double spawn_altitude = 5000.0;
  double spawn_speed = 200.0;
  double spawn_position_jitter = 200.0;
  double spawn_heading_jitter_deg = 5.0;
  double out_of_bounds_penalty = -1000.0;
  // Expert opponent
  double expert_magnitude = 0.9;
  double expert_noise = 0.1;
  double expert_deadband_deg = 1.0;
  double expert_brake_aspect_deg = 30.0;
  double expert_brake_distance = 3000.0;
};

nlohmann::json to_json(const DogfightConfig& config);
DogfightConfig dogfight_config_from_json(const nlohmann::json& j);

// Relative geometry from an attacker towards a target.
struct EngagementGeometry {
  double distance = 0.0;
  double antenna_train_angle = 0.0;  // attacker nose vs line of sight, radians
  double aspect_angle = 0.0;         // target tail vs line of sight target->attacker
};

EngagementGeometry engagement_geometry(const AircraftState& attacker,
                                       const AircraftState& target);

// Target inside the forward cone (half-angle inclusive) and strictly inside
// the range.
bool lock_check(const AircraftState& attacker, const AircraftState& target,
                double half_angle_deg = 10.0, double range = 1000.0);

// One integration step of the point-mass-with-attitude model.
AircraftState integrate(const AircraftState& s, const ControlAction& u,
                        const FlightLimits& limits, double dt);

// Scripted pursuer: elevator and rudder at +-magnitude towards the target
// (noise inside the deadband), brake when close behind the target, roll and
// inactive slots uniform noise.
ControlAction expert_policy(const AircraftState& self, const AircraftState& target,
                            const DogfightConfig& config, std::mt19937_64& rng);

// Learning-only shaping: reward for pointing at and closing on the target,
// small penalty while locked by the opponent.
double dense_reward(const EngagementGeometry& previous, const EngagementGeometry& current,
                    bool being_locked, const DenseRewardWeights& weights);

// Mean elevator and roll mapped from [-1, 1] to [0, 1].
std::vector<double> behavior_descriptor(std::span<const ControlAction> actions);

struct TrajectoryRow {
  int step = 0;
  AircraftState red;
  AircraftState blue;
  ControlAction red_action;
  ControlAction blue_action;
  bool red_locks = false;
  bool blue_locks = false;
  double sparse_reward = 0.0;
};

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows);

class DogfightEnv final : public Environment {
 public:
  explicit DogfightEnv(DogfightConfig config = {});

  std::string name() const override { return "dogfight"; }
  int obs_dim() const override { return kObsDim; }
  policy::ActionSpace action_space() const override {
    return policy::ActionSpace::continuous(4);
  }
  Observation reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  int bd_dim() const override { return 2; }
  std::vector<double> behavior_descriptor() const override;
  double qd_offset() const override { return -2000.0; }
  std::unique_ptr<Environment> clone() const override;

  // Places both aircraft explicitly (tests, scripted scenarios).
  Observation reset_to(const AircraftState& red, const AircraftState& blue, std::uint64_t seed);

  const DogfightConfig& config() const { return config_; }
  const AircraftState& red() const { return red_; }
  const AircraftState& blue() const { return blue_; }
  const EpisodeStatus& status() const { return status_; }
  bool out_of_bounds(const AircraftState& s) const;

  void set_recording(bool on) { recording_ = on; }
  const std::vector<TrajectoryRow>& trajectory() const { return trajectory_; }

  static constexpr int kObsDim = 22;

 private:
  Observation observe() const;

  DogfightConfig config_;
  AircraftState red_;
  AircraftState blue_;
  EpisodeStatus status_;
  std::mt19937_64 rng_;
  EngagementGeometry last_geometry_;
  std::vector<ControlAction> red_actions_;
  bool recording_ = false;
  std::vector<TrajectoryRow> trajectory_;
};

}  // namespace pdo::env
