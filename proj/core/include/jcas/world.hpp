#pragma once

#include <string>
#include <vector>

#include "jcas/geometry.hpp"
#include "jcas/ids.hpp"
#include "jcas/messages.hpp"

namespace jcas {

class Rng;

// Attributes a real deployment would never see on the wire; used only by
// privacy oracles to verify that sanitised outputs cannot be traced back.
struct PiiProfile {
  std::string identity;
  std::string home_area;

  bool operator==(const PiiProfile&) const = default;
};

struct Target {
  std::string id;
  Vec2 position;
  Vec2 velocity;  // metres per tick
  TargetClass cls{TargetClass::object};
  PiiProfile pii;
};

struct SuPose {
  std::string su_id;
  Vec2 position;
  double detection_range{50.0};
  double noise_sigma{0.0};

  bool valid() const { return detection_range > 0.0 && noise_sigma >= 0.0; }
};

// Minimal 2D environment: point targets on linear trajectories, circular
// detection, additive Gaussian noise on echo range and bearing.
class World {
 public:
  void add_target(Target t) { targets_.push_back(std::move(t)); }

  const std::vector<Target>& targets() const { return targets_; }
  const Target* find_target(const std::string& id) const;

  void step(Tick dt);

  // One echo per target within detection range. Echo range/bearing are the
  // true values plus Gaussian noise(sigma); strength falls off linearly with
  // distance, clamped into (0, 1]. raw_object_ref carries the target id.
  std::vector<Echo> sense(const SuPose& pose, Rng& rng) const;

  std::vector<std::string> targets_in_range(const SuPose& pose) const;

 private:
  std::vector<Target> targets_;
};

}  // namespace jcas
