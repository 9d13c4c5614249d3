#include "jcas/engine.hpp"

namespace jcas {

ControlEngine::ControlEngine(Fabric& fabric, KeyRegistry keys,
                             ControlProfile profile)
    : ControlEngine(fabric, std::move(keys), std::move(profile), Options()) {}

ControlEngine::ControlEngine(Fabric& fabric, KeyRegistry keys,
                             ControlProfile profile, Options options)
    : fabric_(fabric),
      keys_(std::move(keys)),
      profile_(std::move(profile)),
      authenticator_(keys_, options.lockout_failures),
      sealer_(keys_, options.replay_window) {
  authenticator_.set_alert_handler(
      [this](const PrincipalId& p, const std::string& what) {
        fabric_.alert(p, "authn", what);
      });
}

void ControlEngine::attach() {
  fabric_.set_gate([this](const Channel& ch, const Envelope& env) {
    return gate(ch, env);
  });
  fabric_.set_admission([this](const Channel& ch, const Envelope& env) {
    return admit(ch, env);
  });
}

const Token& ControlEngine::token_for(const PrincipalId& p) {
  auto it = tokens_.find(p.name);
  if (it != tokens_.end()) return it->second;
  constexpr Tick kLongLived = 1ull << 40;
  Token t = authenticator_.issue(p, fabric_.now(), kLongLived,
                                 ++nonce_counter_);
  return tokens_.emplace(p.name, std::move(t)).first->second;
}

bool ControlEngine::dispatch(const PrincipalId& sender,
                             const PrincipalId& receiver, Flow flow,
                             Payload payload) {
  auto channel_id = fabric_.find_channel(sender.name, receiver.name, flow);
  if (!channel_id) {
    fabric_.emit_event(EventKind::warning, sender, "operational",
                       "no channel for " + std::string(to_string(flow)) +
                           " to " + receiver.name);
    return false;
  }
  const ControlSwitches& sw = switches(flow);
  Envelope env = fabric_.make_envelope(flow, sender, receiver,
                                       std::move(payload));
  if (sw.authn) env.credentials = token_for(sender);
  if (sw.seal || sw.replay_protect) {
    sealer_.seal(env, *channel_id, /*confidential=*/sw.seal);
  }
  fabric_.send(*channel_id, std::move(env));
  return true;
}

bool ControlEngine::admit(const Channel& /*ch*/, const Envelope& env) {
  const ControlSwitches& sw = switches(env.interface);
  if (!sw.rate_limit) return true;
  return limiter_.admit(env.interface, env.sender.name, fabric_.now());
}

GateDecision ControlEngine::gate(const Channel& ch, const Envelope& env) {
  const ControlSwitches& sw = switches(env.interface);
  const PrincipalId& receiver = env.receiver;
  if (sw.validate) {
    ValidationResult vr = validate(env);
    if (!vr.ok()) {
      fabric_.alert(receiver, "validate",
                    "schema violation on " +
                        std::string(to_string(env.interface)) + ": " +
                        vr.violations.front());
      return {false};
    }
  }
  // SENS_REQ is authenticated in-protocol by the NEF so the application gets
  // an explicit rejection; every other flow authenticates at the gate.
  if (sw.authn && env.interface != Flow::SENS_REQ) {
    AuthOutcome out =
        authenticator_.authenticate(env.credentials, env.sender, fabric_.now());
    if (out != AuthOutcome::ok) {
      fabric_.alert(receiver, "authn",
                    "authentication failure from " + env.sender.name + " on " +
                        std::string(to_string(env.interface)));
      return {false};
    }
  }
  if (sw.seal || sw.replay_protect) {
    bool gap = false;
    OpenOutcome out = sealer_.open(env, ch.id, /*check_integrity=*/sw.seal,
                                   /*check_replay=*/sw.replay_protect, &gap);
    if (gap) {
      fabric_.alert(receiver, "replay_protect",
                    "sequence gap on " +
                        std::string(to_string(env.interface)) +
                        ": deliveries removed in transit");
    }
    if (out == OpenOutcome::integrity_error || out == OpenOutcome::missing_seal) {
      fabric_.alert(receiver, "seal",
                    "integrity_error on " +
                        std::string(to_string(env.interface)));
      return {false};
    }
    if (out == OpenOutcome::replay_error) {
      fabric_.alert(receiver, "replay_protect",
                    "replay_error on " +
                        std::string(to_string(env.interface)));
      return {false};
    }
  }
  if (sw.access_control) {
    if (!access_.check(env.sender, env.receiver, env.interface)) {
      fabric_.alert(receiver, "access_control",
                    "denied " + env.sender.name + " -> " + env.receiver.name +
                        " on " + std::string(to_string(env.interface)));
      return {false};
    }
  }
  return {true};
}

}  // namespace jcas
