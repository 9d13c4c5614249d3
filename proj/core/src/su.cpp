#include "jcas/su.hpp"

#include <algorithm>
#include <cmath>

namespace jcas {

SuNode::SuNode(Fabric& fabric, ControlEngine& engine, World& world,
               SuPose pose, Config config)
    : fabric_(fabric),
      engine_(engine),
      world_(world),
      pose_(std::move(pose)),
      config_(std::move(config)),
      id_(make_principal(
          config_.ue_hosted ? PrincipalKind::UE_SU : PrincipalKind::SU,
          pose_.su_id)) {
  fabric_.register_node(this);
}

void SuNode::decline(const RadioSessionConfig& cfg, Reason reason) {
  ConfigAck ack;
  ack.task_id = cfg.task_id;
  ack.su_id = pose_.su_id;
  ack.accepted = false;
  ack.reason = reason;
  for (std::uint64_t ch : fabric_.channels_for(Flow::CONFIG_RADIO_ACK)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::CONFIG_RADIO_ACK,
                     ack);
    break;
  }
}

void SuNode::apply_config(const RadioSessionConfig& cfg) {
  if (config_.ue_hosted) {
    auto consent = config_.local.consent_by_purpose.find(cfg.purpose);
    if (consent == config_.local.consent_by_purpose.end() ||
        !consent->second) {
      decline(cfg, Reason::no_consent);
      return;
    }
    // Local policy enforcement is governed by the UE's access-control switch.
    if (engine_.switches(Flow::CONFIG_RADIO_SESSION).access_control) {
      bool area_ok = true;
      for (const auto& cell : cfg.area.cells()) {
        if (!config_.local.allowed_area.contains(cfg.area.cell_center(cell))) {
          area_ok = false;
          break;
        }
      }
      if (!area_ok) {
        fabric_.alert(id_, "access_control",
                      "configuration outside local policy area");
        decline(cfg, Reason::policy_violation);
        return;
      }
      if (cfg.granularity_m <
          config_.local.min_granularity_contribution - 1e-9) {
        fabric_.alert(id_, "access_control",
                      "configuration finer than local policy allows");
        decline(cfg, Reason::policy_violation);
        return;
      }
    }
  }
  TaskState& task = tasks_[cfg.task_id];  // at most one config per task_id
  task.config = cfg;
  task.accepted = true;
  ConfigAck ack;
  ack.task_id = cfg.task_id;
  ack.su_id = pose_.su_id;
  ack.accepted = true;
  for (std::uint64_t ch : fabric_.channels_for(Flow::CONFIG_RADIO_ACK)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::CONFIG_RADIO_ACK,
                     ack);
    break;
  }
}

void SuNode::apply_transparency(const TransparencyConfig& cfg) {
  TaskState& task = tasks_[cfg.task_id];
  task.transparency = cfg.mode;
}

void SuNode::on_deliver(const Envelope& env) {
  switch (env.interface) {
    case Flow::CONFIG_RADIO_SESSION:
      apply_config(std::get<RadioSessionConfig>(env.payload));
      break;
    case Flow::CONFIG_TRANSPARENCY:
      apply_transparency(std::get<TransparencyConfig>(env.payload));
      break;
    default:
      fabric_.emit_event(EventKind::warning, id_, "operational",
                         "unexpected flow " +
                             std::string(to_string(env.interface)));
  }
}

void SuNode::execute_task(const std::string& task_id, TaskState& task) {
  const Schedule& s = task.config.schedule;
  const Tick now = fabric_.now();
  if (now < s.start) return;
  const Tick elapsed = now - s.start;

  // notify_after transparency fires once when the task window closes.
  if (elapsed >= s.duration) {
    if (task.transparency == TransparencyMode::notify_after &&
        !task.notified_after) {
      task.notified_after = true;
      TransparencyNotice notice;
      notice.task_id = task_id;
      notice.su_id = pose_.su_id;
      notice.mode = TransparencyMode::notify_after;
      notice.reached_targets = task.sensed_targets;
      std::sort(notice.reached_targets.begin(), notice.reached_targets.end());
      notice.reached_targets.erase(
          std::unique(notice.reached_targets.begin(),
                      notice.reached_targets.end()),
          notice.reached_targets.end());
      for (std::uint64_t ch :
           fabric_.channels_for(Flow::TRANSPARENCY_BROADCAST)) {
        const Channel& channel = fabric_.channel(ch);
        if (channel.config.endpoint_a.name != id_.name) continue;
        engine_.dispatch(id_, channel.config.endpoint_b,
                         Flow::TRANSPARENCY_BROADCAST, notice);
        break;
      }
    }
    return;
  }
  if (s.period == 0 || elapsed % s.period != 0) return;
  if (elapsed / s.period >= s.duration / s.period) return;

  // A task that promised transparency signalling but never received a valid
  // instruction does not sense: fail closed rather than sense unannounced.
  if (task.config.transparency_expected && !task.transparency.has_value()) {
    if (!task.transparency_alerted) {
      task.transparency_alerted = true;
      fabric_.alert(id_, "operational",
                    "transparency instruction missing for task " + task_id +
                        "; sensing withheld");
    }
    return;
  }

  std::vector<Echo> echoes = world_.sense(pose_, fabric_.rng());
  for (const Echo& e : echoes) task.sensed_targets.push_back(e.raw_object_ref);

  Measurement m;
  m.su_id = pose_.su_id;
  m.task_id = task_id;
  m.captured_at = now;
  m.echoes = std::move(echoes);
  m.preprocessed = config_.preprocessed;
  const Flow data_flow = config_.preprocessed ? Flow::TX_DATA : Flow::RX_DATA;
  const bool sent =
      engine_.dispatch(id_, task.config.ingress.node, data_flow, m);
  if (!sent) {
    if (++task.send_failures > 2 && !task.unreachable_alerted) {
      task.unreachable_alerted = true;
      fabric_.alert(id_, "operational",
                    "ingress unreachable for task " + task_id);
    }
  } else {
    task.send_failures = 0;
    ++measurements_sent_;
    if (config_.ue_hosted) {
      config_.local.disclosure_log.push_back(
          "tick=" + std::to_string(now) + ";task=" + task_id +
          ";purpose=" + task.config.purpose);
    }
  }

  if (task.transparency == TransparencyMode::broadcast_during) {
    TransparencyNotice notice;
    notice.task_id = task_id;
    notice.su_id = pose_.su_id;
    notice.mode = TransparencyMode::broadcast_during;
    notice.reached_targets = world_.targets_in_range(pose_);
    for (std::uint64_t ch :
         fabric_.channels_for(Flow::TRANSPARENCY_BROADCAST)) {
      const Channel& channel = fabric_.channel(ch);
      if (channel.config.endpoint_a.name != id_.name) continue;
      engine_.dispatch(id_, channel.config.endpoint_b,
                       Flow::TRANSPARENCY_BROADCAST, notice);
      break;
    }
  }
}

void SuNode::on_tick() {
  for (auto& [task_id, task] : tasks_) {
    if (!task.accepted) continue;
    execute_task(task_id, task);
  }
}

}  // namespace jcas
