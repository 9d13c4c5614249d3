#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcas/engine.hpp"
#include "jcas/fabric.hpp"
#include "jcas/world.hpp"

namespace jcas {

// Sensing unit: network-hosted SUs obey SCF configuration; UE-hosted SUs put
// the user in control with a local consent switch per purpose, a local area
// and granularity policy, and a local disclosure log.
class SuNode : public Node {
 public:
  struct LocalControls {
    std::map<std::string, bool> consent_by_purpose;
    Rect allowed_area{{-1e12, -1e12}, {1e12, 1e12}};
    // Declines configurations requesting finer output than this.
    double min_granularity_contribution{0.0};
    std::vector<std::string> disclosure_log;
  };

  struct Config {
    bool ue_hosted = false;
    bool preprocessed = false;  // preprocessed data goes out on TX_DATA
    LocalControls local;
  };

  SuNode(Fabric& fabric, ControlEngine& engine, World& world, SuPose pose,
         Config config);

  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;
  void on_tick() override;

  const SuPose& pose() const { return pose_; }
  const Config& config() const { return config_; }
  std::size_t measurements_sent() const { return measurements_sent_; }
  const std::vector<std::string>& local_disclosure_log() const {
    return config_.local.disclosure_log;
  }

 private:
  struct TaskState {
    RadioSessionConfig config;
    std::optional<TransparencyMode> transparency;
    bool accepted{false};
    bool transparency_alerted{false};
    std::uint32_t send_failures{0};
    bool unreachable_alerted{false};
    std::vector<std::string> sensed_targets;  // for notify_after
    bool notified_after{false};
  };

  void apply_config(const RadioSessionConfig& cfg);
  void apply_transparency(const TransparencyConfig& cfg);
  void decline(const RadioSessionConfig& cfg, Reason reason);
  void execute_task(const std::string& task_id, TaskState& task);

  Fabric& fabric_;
  ControlEngine& engine_;
  World& world_;
  SuPose pose_;
  Config config_;
  PrincipalId id_;
  std::map<std::string, TaskState> tasks_;
  std::size_t measurements_sent_{0};
};

}  // namespace jcas
