#include "jcas/world.hpp"

#include <algorithm>
#include <cmath>

#include "jcas/rng.hpp"

namespace jcas {

double Rng::gaussian(double sigma) {
  if (sigma <= 0.0) return 0.0;
  if (have_spare_) {
    have_spare_ = false;
    return spare_ * sigma;
  }
  // Box-Muller with draws in (0, 1].
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double mag = std::sqrt(-2.0 * std::log(u1));
  spare_ = mag * std::sin(2.0 * M_PI * u2);
  have_spare_ = true;
  return mag * std::cos(2.0 * M_PI * u2) * sigma;
}

const Target* World::find_target(const std::string& id) const {
  for (const Target& t : targets_) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

void World::step(Tick dt) {
  const double d = static_cast<double>(dt);
  for (Target& t : targets_) {
    t.position = t.position + t.velocity * d;
  }
}

std::vector<Echo> World::sense(const SuPose& pose, Rng& rng) const {
  std::vector<Echo> echoes;
  constexpr double kMinStrength = 1e-3;
  for (const Target& t : targets_) {
    const Vec2 delta = t.position - pose.position;
    const double dist = norm(delta);
    if (dist > pose.detection_range) continue;
    Echo e;
    e.range_m = std::max(0.0, dist + rng.gaussian(pose.noise_sigma));
    e.bearing_rad =
        std::atan2(delta.y, delta.x) + rng.gaussian(pose.noise_sigma * 0.01);
    e.strength = std::clamp(1.0 - dist / pose.detection_range, kMinStrength, 1.0);
    e.raw_object_ref = t.id;
    echoes.push_back(std::move(e));
  }
  return echoes;
}

std::vector<std::string> World::targets_in_range(const SuPose& pose) const {
  std::vector<std::string> out;
  for (const Target& t : targets_) {
    if (distance(t.position, pose.position) <= pose.detection_range) {
      out.push_back(t.id);
    }
  }
  return out;
}

}  // namespace jcas
