#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jcas/controls.hpp"
#include "jcas/engine.hpp"
#include "jcas/messages.hpp"
#include "jcas/nef.hpp"
#include "jcas/scf.hpp"
#include "jcas/spctm.hpp"
#include "jcas/spf.hpp"
#include "jcas/world.hpp"

namespace jcas {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& field, const std::string& what)
      : std::runtime_error("scenario field '" + field + "': " + what),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SuSpec {
  std::string name;
  Vec2 position;
  double detection_range{100.0};
  double noise_sigma{0.0};
  bool ue_hosted{false};
  bool preprocessed{false};
  std::map<std::string, bool> consent;  // purpose -> switch (UE only)
  Rect allowed_area{{-1e12, -1e12}, {1e12, 1e12}};
  double min_granularity_contribution{0.0};

  SuPose pose() const {
    return SuPose{name, position, detection_range, noise_sigma};
  }
};

struct AppSpec {
  std::string name;
  std::vector<Rect> permitted_areas;
  double granularity_floor{1.0};
  std::vector<ResultSpec> sensing_types;
};

struct RequestAction {
  Tick at{0};
  std::string app;
  SensingRequest request;
  bool bad_credentials{false};
  std::uint32_t repeat{1};
};

struct ConsentAction {
  Tick at{0};
  std::string subject;
  std::string purpose;
  bool grant{false};
};

struct AuditAction {
  Tick at{0};
  std::string subject;
};

struct ChannelTuning {
  Tick latency{1};
  std::uint32_t capacity{64};
};

struct Scenario {
  std::string name{"scenario"};
  std::uint64_t seed{1};
  Tick duration{200};

  std::vector<Target> targets;
  std::vector<SuSpec> sus;
  std::vector<AppSpec> apps;
  std::vector<SensingPolicy> policies;
  std::vector<ConsentRecord> consents;

  std::vector<RequestAction> requests;
  std::vector<ConsentAction> consent_actions;
  std::vector<AuditAction> audits;

  ControlProfile profile;  // all-off by default
  ControlEngine::Options control_options;
  std::map<Flow, RateLimiter::Config> rate_limits;
  ChannelTuning channel_defaults;
  std::map<Flow, ChannelTuning> channel_overrides;

  ScfNode::Config scf;
  SpfNode::Config spf;
  Spctm::Config spctm;
  NefNode::Config nef;

  bool with_third_party{true};
  std::vector<std::string> threats;  // threat scenario ids for the matrix

  ChannelTuning tuning_for(Flow f) const {
    auto it = channel_overrides.find(f);
    return it == channel_overrides.end() ? channel_defaults : it->second;
  }
};

// Loads and validates a scenario document (JSON tree of key-value sections).
// Parse and reference errors name the offending field.
Scenario load_scenario_file(const std::string& path);
Scenario parse_scenario_text(const std::string& text);

// Cross-reference validation (every scripted principal resolves, etc.).
// Returns human-readable problems; empty means valid.
std::vector<std::string> validate_scenario(const Scenario& s);

}  // namespace jcas
