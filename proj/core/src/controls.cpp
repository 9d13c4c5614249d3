#include "jcas/controls.hpp"

#include <sodium.h>

#include <algorithm>

#include "jcas/codec.hpp"

namespace jcas {

namespace {

class SipHashBackend : public TagBackend {
 public:
  SipHashBackend() {
    // Safe to call repeatedly; never fails after first success.
    if (sodium_init() < 0) std::abort();
  }
  std::uint64_t tag(std::string_view data, const TagKey& key) const override {
    static_assert(crypto_shorthash_KEYBYTES == 16);
    std::array<unsigned char, crypto_shorthash_BYTES> out{};
    crypto_shorthash(out.data(),
                     reinterpret_cast<const unsigned char*>(data.data()),
                     data.size(), key.data());
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(out[i]) << (8 * i);
    }
    return v;
  }
};

}  // namespace

const TagBackend& default_tag_backend() {
  static const SipHashBackend backend;
  return backend;
}

std::uint64_t keyed_tag(std::string_view data, const TagKey& key) {
  return default_tag_backend().tag(data, key);
}

void KeyRegistry::grant_seal_key(const std::string& principal_name) {
  if (!holds_seal_key(principal_name)) keyholders_.push_back(principal_name);
}

bool KeyRegistry::holds_seal_key(const std::string& principal_name) const {
  return std::find(keyholders_.begin(), keyholders_.end(), principal_name) !=
         keyholders_.end();
}

std::uint64_t Authenticator::token_tag(const Token& t) const {
  codec::Writer w;
  w.u8(static_cast<std::uint8_t>(t.principal.kind));
  w.str(t.principal.name);
  w.u64(t.issued_at);
  w.u64(t.expiry);
  w.u64(t.nonce);
  return keyed_tag(w.bytes(), keys_.token_key());
}

Token Authenticator::issue(const PrincipalId& principal, Tick now, Tick ttl,
                           std::uint64_t nonce) const {
  Token t;
  t.principal = principal;
  t.issued_at = now;
  t.expiry = now + ttl;
  t.nonce = nonce;
  t.tag = token_tag(t);
  return t;
}

bool Authenticator::verify(const Token& t, const PrincipalId& principal,
                           Tick now, AuthOutcome& why) const {
  if (t.principal != principal) {
    why = AuthOutcome::invalid;
    return false;
  }
  if (t.tag != token_tag(t)) {
    why = AuthOutcome::invalid;
    return false;
  }
  if (now > t.expiry) {
    why = AuthOutcome::expired;
    return false;
  }
  return true;
}

AuthOutcome Authenticator::authenticate(const std::optional<Token>& cred,
                                        const PrincipalId& principal,
                                        Tick now) {
  const std::string& key = principal.name;
  if (locked_[key]) return AuthOutcome::locked_out;

  AuthOutcome why = AuthOutcome::invalid;
  bool ok = cred.has_value() && verify(*cred, principal, now, why);
  if (ok) {
    failures_[key] = 0;
    return AuthOutcome::ok;
  }
  if (++failures_[key] >= max_failures_) {
    locked_[key] = true;
    if (alert_) alert_(principal, "authentication lockout");
  }
  return why;
}

bool Authenticator::is_locked(const PrincipalId& principal) const {
  auto it = locked_.find(principal.name);
  return it != locked_.end() && it->second;
}

void Authenticator::unlock(const PrincipalId& principal) {
  locked_[principal.name] = false;
  failures_[principal.name] = 0;
}

std::uint64_t Sealer::integrity_tag(const Envelope& e) const {
  codec::Writer w;
  w.u64(e.msg_id);
  w.u8(static_cast<std::uint8_t>(e.interface));
  w.str(e.sender.name);
  const std::string payload = encode_payload(e.payload);
  w.str(payload);
  if (e.seal) w.u64(e.seal->sequence);
  return keyed_tag(w.bytes(), keys_.seal_key());
}

void Sealer::seal(Envelope& e, std::uint64_t channel_id, bool confidential) {
  SealTag tag;
  tag.sequence = ++next_seq_[channel_id];
  tag.confidential = confidential;
  e.seal = tag;
  e.seal->integrity = integrity_tag(e);
}

OpenOutcome Sealer::verify_integrity(const Envelope& e) const {
  if (!e.seal) return OpenOutcome::missing_seal;
  if (e.seal->integrity != integrity_tag(e)) {
    return OpenOutcome::integrity_error;
  }
  return OpenOutcome::ok;
}

OpenOutcome Sealer::open(const Envelope& e, std::uint64_t channel_id,
                         bool check_integrity, bool check_replay,
                         bool* gap_detected) {
  if (gap_detected) *gap_detected = false;
  if (!e.seal) return OpenOutcome::missing_seal;
  if (check_integrity && e.seal->integrity != integrity_tag(e)) {
    return OpenOutcome::integrity_error;
  }
  if (check_replay) {
    WindowState& win = windows_[channel_id];
    const std::uint64_t seq = e.seal->sequence;
    if (!win.any) {
      win.any = true;
      win.max_seen = seq;
      win.mask = 1;
      if (gap_detected && seq > 1) *gap_detected = true;
      return OpenOutcome::ok;
    }
    if (seq > win.max_seen) {
      const std::uint64_t shift = seq - win.max_seen;
      if (gap_detected && shift > 1) *gap_detected = true;
      win.mask = shift >= 64 ? 0 : win.mask << shift;
      win.mask |= 1;
      win.max_seen = seq;
      return OpenOutcome::ok;
    }
    const std::uint64_t age = win.max_seen - seq;
    if (age >= replay_window_) return OpenOutcome::replay_error;
    if (win.mask & (1ull << age)) return OpenOutcome::replay_error;
    win.mask |= 1ull << age;
  }
  return OpenOutcome::ok;
}

bool AccessController::check(const PrincipalId& subject,
                             const PrincipalId& object, Flow operation) const {
  bool allowed = false;
  for (const AccessRule& r : rules_) {
    if (r.subject_kind && *r.subject_kind != subject.kind) continue;
    if (!r.subject_name.empty() && r.subject_name != subject.name) continue;
    if (r.object_kind && *r.object_kind != object.kind) continue;
    if (!r.object_name.empty() && r.object_name != object.name) continue;
    if (!r.operations.empty() &&
        std::find(r.operations.begin(), r.operations.end(), operation) ==
            r.operations.end()) {
      continue;
    }
    allowed = true;
    break;
  }
  if (log_) log_(subject, object, operation, allowed);
  return allowed;
}

std::optional<RateLimiter::Config> RateLimiter::config_for(Flow f) const {
  auto it = config_.find(f);
  if (it == config_.end()) return std::nullopt;
  return it->second;
}

bool RateLimiter::admit(Flow f, const std::string& sender, Tick now) {
  auto cfg = config_for(f);
  if (!cfg) return true;
  const std::uint64_t window_index = cfg->window == 0 ? 0 : now / cfg->window;
  auto& [current_window, count] =
      counters_[{static_cast<std::uint8_t>(f), sender}];
  if (current_window != window_index) {
    current_window = window_index;
    count = 0;
  }
  if (count >= cfg->budget) return false;
  ++count;
  return true;
}

std::string pseudonymize(const std::string& raw_id,
                         const std::string& session_id, const TagKey& secret) {
  codec::Writer w;
  w.str(raw_id);
  w.str(session_id);
  const std::uint64_t t = keyed_tag(w.bytes(), secret);
  static const char* hex = "0123456789abcdef";
  std::string out = "p-";
  for (int i = 15; i >= 0; --i) {
    out.push_back(hex[(t >> (4 * i)) & 0xF]);
  }
  return out;
}

}  // namespace jcas
