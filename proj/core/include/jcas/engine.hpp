#pragma once

#include <map>
#include <optional>
#include <string>

#include "jcas/controls.hpp"
#include "jcas/fabric.hpp"

namespace jcas {

// Applies the active ControlProfile on both sides of the fabric: outgoing
// envelopes get credentials and seals per the interface switches, incoming
// envelopes pass schema validation, authentication, seal/replay checks, and
// access control before reaching a node. Mitigation rejections are traced as
// blocked verdicts plus an alert naming the control.
class ControlEngine {
 public:
  struct Options {
    std::uint32_t lockout_failures = 3;
    std::uint32_t replay_window = 64;
  };

  ControlEngine(Fabric& fabric, KeyRegistry keys, ControlProfile profile);
  ControlEngine(Fabric& fabric, KeyRegistry keys, ControlProfile profile,
                Options options);

  // Installs gate + admission hooks on the fabric.
  void attach();

  const ControlProfile& profile() const { return profile_; }
  const ControlSwitches& switches(Flow f) const { return profile_.at(f); }
  const KeyRegistry& keys() const { return keys_; }

  Authenticator& authenticator() { return authenticator_; }
  Sealer& sealer() { return sealer_; }
  AccessController& access() { return access_; }
  RateLimiter& rate_limiter() { return limiter_; }

  // Cached long-lived token for a legitimate principal.
  const Token& token_for(const PrincipalId& p);

  // Sends `payload` from `sender` to `receiver` over the matching channel,
  // applying sender-side controls. Returns false (with a warning event) when
  // no such channel exists.
  bool dispatch(const PrincipalId& sender, const PrincipalId& receiver,
                Flow flow, Payload payload);

  GateDecision gate(const Channel& ch, const Envelope& env);
  bool admit(const Channel& ch, const Envelope& env);

 private:
  Fabric& fabric_;
  KeyRegistry keys_;
  ControlProfile profile_;
  Authenticator authenticator_;
  Sealer sealer_;
  AccessController access_;
  RateLimiter limiter_;
  std::map<std::string, Token> tokens_;
  std::uint64_t nonce_counter_{0};
};

}  // namespace jcas
