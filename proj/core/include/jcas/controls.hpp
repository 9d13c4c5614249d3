#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcas/ids.hpp"
#include "jcas/messages.hpp"

namespace jcas {

// 128-bit key for the keyed one-way tag backend.
using TagKey = std::array<std::uint8_t, 16>;

// Keyed one-way 64-bit tag over arbitrary bytes. Default backend is
// SipHash-2-4 (libsodium crypto_shorthash); swappable for real crypto.
class TagBackend {
 public:
  virtual ~TagBackend() = default;
  virtual std::uint64_t tag(std::string_view data, const TagKey& key) const = 0;
};

const TagBackend& default_tag_backend();

std::uint64_t keyed_tag(std::string_view data, const TagKey& key);

// Per-interface mitigation switches.
struct ControlSwitches {
  bool authn{false};
  bool seal{false};
  bool replay_protect{false};
  bool access_control{false};
  bool rate_limit{false};
  bool pseudonymise{false};
  bool sanitise{false};
  bool validate{false};

  bool operator==(const ControlSwitches&) const = default;

  static ControlSwitches all_on() {
    return {true, true, true, true, true, true, true, true};
  }
  static ControlSwitches all_off() { return {}; }
};

struct ControlProfile {
  ControlSwitches defaults;
  std::map<Flow, ControlSwitches> per_interface;

  const ControlSwitches& at(Flow f) const {
    auto it = per_interface.find(f);
    return it == per_interface.end() ? defaults : it->second;
  }
  void set(Flow f, ControlSwitches s) { per_interface[f] = s; }

  static ControlProfile all_on() { return {ControlSwitches::all_on(), {}}; }
  static ControlProfile all_off() { return {ControlSwitches::all_off(), {}}; }

  bool operator==(const ControlProfile&) const = default;
};

// Trusted key registry: token signing key, per-interface seal keys, and the
// pseudonymisation secret. Keys are derived deterministically from the run
// seed by the simulation builder.
class KeyRegistry {
 public:
  void set_token_key(TagKey k) { token_key_ = k; }
  void set_seal_key(TagKey k) { seal_key_ = k; }
  void set_pseudonym_secret(TagKey k) { pseudonym_secret_ = k; }
  // Principals listed here hold the seal key and may read confidential
  // payloads.
  void grant_seal_key(const std::string& principal_name);
  bool holds_seal_key(const std::string& principal_name) const;

  const TagKey& token_key() const { return token_key_; }
  const TagKey& seal_key() const { return seal_key_; }
  const TagKey& pseudonym_secret() const { return pseudonym_secret_; }

 private:
  TagKey token_key_{};
  TagKey seal_key_{};
  TagKey pseudonym_secret_{};
  std::vector<std::string> keyholders_;
};

enum class AuthOutcome : std::uint8_t { ok, invalid, expired, locked_out };

// Identity verification with a consecutive-failure lockout.
class Authenticator {
 public:
  using AlertFn = std::function<void(const PrincipalId&, const std::string&)>;

  Authenticator(const KeyRegistry& keys, std::uint32_t max_failures = 3)
      : keys_(keys), max_failures_(max_failures) {}

  void set_alert_handler(AlertFn fn) { alert_ = std::move(fn); }

  Token issue(const PrincipalId& principal, Tick now, Tick ttl,
              std::uint64_t nonce) const;

  // Verifies `cred` as proof of `principal` at `now`. Failures count toward
  // lockout; the M-th consecutive failure locks the principal and raises a
  // single alert. A locked principal always fails until unlock().
  AuthOutcome authenticate(const std::optional<Token>& cred,
                           const PrincipalId& principal, Tick now);

  bool is_locked(const PrincipalId& principal) const;
  void unlock(const PrincipalId& principal);

 private:
  bool verify(const Token& t, const PrincipalId& principal, Tick now,
              AuthOutcome& why) const;
  std::uint64_t token_tag(const Token& t) const;

  const KeyRegistry& keys_;
  std::uint32_t max_failures_;
  std::map<std::string, std::uint32_t> failures_;
  std::map<std::string, bool> locked_;
  AlertFn alert_;
};

enum class OpenOutcome : std::uint8_t {
  ok,
  integrity_error,
  replay_error,
  missing_seal,
};

// Integrity + confidentiality + replay sealing over canonical payload bytes.
class Sealer {
 public:
  explicit Sealer(const KeyRegistry& keys, std::uint32_t replay_window = 64)
      : keys_(keys), replay_window_(replay_window) {}

  // Attaches a SealTag; sequence numbers count per channel.
  void seal(Envelope& e, std::uint64_t channel_id, bool confidential);

  // Verification only; no replay bookkeeping.
  OpenOutcome verify_integrity(const Envelope& e) const;

  // Integrity (when check_integrity) plus sequence-window replay check
  // (when check_replay). Also reports sequence gaps: a jump in the incoming
  // sequence means deliveries were removed in transit.
  OpenOutcome open(const Envelope& e, std::uint64_t channel_id,
                   bool check_integrity, bool check_replay,
                   bool* gap_detected = nullptr);

  std::uint64_t integrity_tag(const Envelope& e) const;

 private:
  struct WindowState {
    std::uint64_t max_seen{0};
    std::uint64_t mask{0};  // bit i = (max_seen - i) seen
    bool any{false};
  };

  const KeyRegistry& keys_;
  std::uint32_t replay_window_;
  std::map<std::uint64_t, std::uint64_t> next_seq_;
  std::map<std::uint64_t, WindowState> windows_;
};

// Subject/object/operation rules with default deny.
struct AccessRule {
  std::optional<PrincipalKind> subject_kind;  // nullopt = any kind
  std::string subject_name;                   // empty = any name
  std::optional<PrincipalKind> object_kind;
  std::string object_name;
  std::vector<Flow> operations;  // empty = any flow
};

class AccessController {
 public:
  using DecisionFn = std::function<void(const PrincipalId&, const PrincipalId&,
                                        Flow, bool)>;

  void add_rule(AccessRule rule) { rules_.push_back(std::move(rule)); }
  void clear() { rules_.clear(); }
  void set_decision_log(DecisionFn fn) { log_ = std::move(fn); }

  bool check(const PrincipalId& subject, const PrincipalId& object,
             Flow operation) const;

 private:
  std::vector<AccessRule> rules_;
  DecisionFn log_;
};

// Fixed-window per-sender budget.
class RateLimiter {
 public:
  struct Config {
    std::uint64_t budget{10};
    Tick window{10};
  };

  void configure(Flow f, Config c) { config_[f] = c; }
  std::optional<Config> config_for(Flow f) const;

  // True = admit, false = shed.
  bool admit(Flow f, const std::string& sender, Tick now);

 private:
  std::map<Flow, Config> config_;
  std::map<std::pair<std::uint8_t, std::string>,
           std::pair<std::uint64_t, std::uint64_t>>
      counters_;  // (flow, sender) -> (window index, count)
};

// Deterministic per-(raw id, session) pseudonym; one-way without the secret.
std::string pseudonymize(const std::string& raw_id,
                         const std::string& session_id, const TagKey& secret);

}  // namespace jcas
