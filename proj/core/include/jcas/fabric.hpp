#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "jcas/ids.hpp"
#include "jcas/messages.hpp"
#include "jcas/rng.hpp"

namespace jcas {

enum class Verdict : std::uint8_t { delivered, dropped, blocked, tampered };

enum class EventKind : std::uint8_t {
  alert,
  suppression,
  disposal,
  warning,
  policy_change,
  rollback,
  info,
};

std::string_view to_string(Verdict v);
std::string_view to_string(EventKind k);

struct FlowRecord {
  Tick tick{0};
  Envelope envelope;
  std::uint64_t channel_id{0};
  Verdict verdict{Verdict::delivered};
  bool crosses_boundary{false};

  bool operator==(const FlowRecord&) const = default;
};

struct EventRecord {
  Tick tick{0};
  PrincipalId emitter;
  EventKind kind{EventKind::info};
  std::string control;  // raising control ("authn", "seal", ...) or "operational"
  std::string detail;

  bool operator==(const EventRecord&) const = default;
};

using TraceRecord = std::variant<FlowRecord, EventRecord>;

struct Trace {
  std::uint64_t seed{0};
  std::vector<TraceRecord> records;

  bool operator==(const Trace&) const = default;
};

// Canonical trace encoding; doubles as the on-disk format (length-prefixed
// records after a small header).
std::string encode_trace_record(const TraceRecord& r);
TraceRecord decode_trace_record(std::string_view bytes);
std::string encode_trace(const Trace& t);
Trace decode_trace(std::string_view bytes);
void write_trace_file(const std::string& path, const Trace& t);
Trace read_trace_file(const std::string& path);

struct ChannelConfig {
  PrincipalId endpoint_a;  // sender side
  PrincipalId endpoint_b;  // receiver side
  Flow interface{Flow::SENS_REQ};
  Tick latency{1};
  std::uint32_t capacity_per_tick{64};
};

class Fabric;

// Adversary hook on a channel. May observe, mutate (tampered), or drop the
// message before delivery.
class Interceptor {
 public:
  virtual ~Interceptor() = default;
  struct Result {
    bool drop{false};
    bool tampered{false};
  };
  virtual Result on_message(Fabric& fabric, std::uint64_t channel_id,
                            Envelope& env) = 0;
};

struct Channel {
  std::uint64_t id{0};
  ChannelConfig config;
  bool crosses_boundary{false};
  std::vector<Interceptor*> interceptors;
};

class Node {
 public:
  virtual ~Node() = default;
  virtual const PrincipalId& principal() const = 0;
  virtual void on_deliver(const Envelope& env) = 0;
  virtual void on_tick() {}
};

// Receiver-side mitigation gate, applied after capacity accounting and
// before delivery. Returns pass=false to refuse the envelope (verdict
// blocked); the gate is responsible for raising its own alert events.
struct GateDecision {
  bool pass{true};
};
using GateFn = std::function<GateDecision(const Channel&, const Envelope&)>;

// Admission control applied before capacity accounting (rate limiting).
using AdmitFn = std::function<bool(const Channel&, const Envelope&)>;

// Deterministic discrete-event simulation core: virtual clock, one event
// queue with total order (tick, channel id, msg id), node registry, channels
// with trust-boundary annotation, interceptor hooks, seeded randomness, and
// trace capture. Strictly single-threaded.
class Fabric {
 public:
  explicit Fabric(std::uint64_t seed) : rng_(seed) { trace_.seed = seed; }

  Rng& rng() { return rng_; }
  Tick now() const { return now_; }

  void register_node(Node* node);
  bool has_node(const std::string& name) const;
  Node* find_node(const std::string& name);

  std::uint64_t open_channel(const ChannelConfig& config);
  const Channel& channel(std::uint64_t id) const;
  // First channel matching (sender name, receiver name, flow).
  std::optional<std::uint64_t> find_channel(const std::string& sender,
                                            const std::string& receiver,
                                            Flow f) const;
  std::vector<std::uint64_t> channels_for(Flow f) const;
  const std::map<std::uint64_t, Channel>& channels() const { return channels_; }

  void install_interceptor(std::uint64_t channel_id, Interceptor* i);

  std::uint64_t next_msg_id() { return ++msg_id_; }

  Envelope make_envelope(Flow f, const PrincipalId& sender,
                         const PrincipalId& receiver, Payload payload,
                         std::optional<Token> credentials = std::nullopt);

  // Schedules delivery at now + latency, subject to capacity, interceptors,
  // and gates. Throws on unknown channel or interface mismatch.
  void send(std::uint64_t channel_id, Envelope env);

  // Adversarial injection: same mechanics as send but keeps the envelope
  // exactly as crafted (including msg_id and seal) when fresh_msg_id is
  // false, which is how replays re-enter the fabric.
  void inject(std::uint64_t channel_id, Envelope env, bool fresh_msg_id);

  void set_gate(GateFn fn) { gate_ = std::move(fn); }
  void set_admission(AdmitFn fn) { admission_ = std::move(fn); }

  void add_tick_hook(std::function<void(Tick)> hook);

  void emit_event(EventKind kind, const PrincipalId& emitter,
                  const std::string& control, const std::string& detail);
  void alert(const PrincipalId& emitter, const std::string& control,
             const std::string& detail);

  // Processes every tick in [now, t): tick hooks, then due deliveries in
  // deterministic order, then node on_tick in registration order. Returns
  // the accumulated trace. Requires t >= now.
  const Trace& run_until(Tick t);

  const Trace& trace() const { return trace_; }

  // Undelivered envelopes still in the queue; zero means the run drained.
  std::size_t pending() const { return queue_.size(); }

  // Trust-domain pairs (canonically ordered) observed on boundary-crossing
  // deliveries so far.
  std::set<std::pair<TrustDomain, TrustDomain>> crossing_pairs() const;

 private:
  struct Pending {
    Tick tick;
    std::uint64_t channel_id;
    std::uint64_t msg_id;
    Envelope env;
    bool operator<(const Pending& o) const {
      if (tick != o.tick) return tick < o.tick;
      if (channel_id != o.channel_id) return channel_id < o.channel_id;
      return msg_id < o.msg_id;
    }
  };

  void process_tick();
  void deliver(Pending p);
  void record_flow(Tick tick, const Envelope& env, const Channel& ch,
                   Verdict v);

  Rng rng_;
  Tick now_{0};
  std::uint64_t msg_id_{0};
  std::map<std::string, Node*> nodes_;
  std::vector<Node*> node_order_;
  std::map<std::uint64_t, Channel> channels_;
  std::uint64_t next_channel_id_{0};
  std::multiset<Pending> queue_;
  std::map<std::uint64_t, std::uint32_t> deliveries_this_tick_;  // per channel
  std::vector<std::function<void(Tick)>> tick_hooks_;
  GateFn gate_;
  AdmitFn admission_;
  Trace trace_;
};

}  // namespace jcas
