#include "jcas/fabric.hpp"

#include <fstream>
#include <stdexcept>

#include "jcas/codec.hpp"

namespace jcas {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::delivered:
      return "delivered";
    case Verdict::dropped:
      return "dropped";
    case Verdict::blocked:
      return "blocked";
    case Verdict::tampered:
      return "tampered";
  }
  return "?";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::alert:
      return "alert";
    case EventKind::suppression:
      return "suppression";
    case EventKind::disposal:
      return "disposal";
    case EventKind::warning:
      return "warning";
    case EventKind::policy_change:
      return "policy_change";
    case EventKind::rollback:
      return "rollback";
    case EventKind::info:
      return "info";
  }
  return "?";
}

std::string encode_trace_record(const TraceRecord& r) {
  codec::Writer w;
  if (const auto* f = std::get_if<FlowRecord>(&r)) {
    w.u8(0);
    w.u64(f->tick);
    w.str(encode(f->envelope));
    w.u64(f->channel_id);
    w.u8(static_cast<std::uint8_t>(f->verdict));
    w.boolean(f->crosses_boundary);
  } else {
    const auto& e = std::get<EventRecord>(r);
    w.u8(1);
    w.u64(e.tick);
    w.u8(static_cast<std::uint8_t>(e.emitter.kind));
    w.str(e.emitter.name);
    w.u8(static_cast<std::uint8_t>(e.emitter.trust_domain));
    w.u8(static_cast<std::uint8_t>(e.kind));
    w.str(e.control);
    w.str(e.detail);
  }
  return w.take();
}

TraceRecord decode_trace_record(std::string_view bytes) {
  codec::Reader r(bytes);
  const std::uint8_t tag = r.u8();
  if (tag == 0) {
    FlowRecord f;
    f.tick = r.u64();
    f.envelope = decode(r.str());
    f.channel_id = r.u64();
    std::uint8_t v = r.u8();
    if (v > 3) r.fail("bad verdict");
    f.verdict = static_cast<Verdict>(v);
    f.crosses_boundary = r.boolean();
    r.expect_done();
    return f;
  }
  if (tag == 1) {
    EventRecord e;
    e.tick = r.u64();
    std::uint8_t kind = r.u8();
    if (kind > 10) r.fail("bad principal kind");
    e.emitter.kind = static_cast<PrincipalKind>(kind);
    e.emitter.name = r.str();
    std::uint8_t dom = r.u8();
    if (dom > 5) r.fail("bad trust domain");
    e.emitter.trust_domain = static_cast<TrustDomain>(dom);
    std::uint8_t ek = r.u8();
    if (ek > 6) r.fail("bad event kind");
    e.kind = static_cast<EventKind>(ek);
    e.control = r.str();
    e.detail = r.str();
    r.expect_done();
    return e;
  }
  r.fail("bad trace record tag");
}

std::string encode_trace(const Trace& t) {
  codec::Writer w;
  w.str("JCTR");
  w.u32(1);
  w.u64(t.seed);
  w.u32(static_cast<std::uint32_t>(t.records.size()));
  for (const TraceRecord& r : t.records) {
    w.str(encode_trace_record(r));
  }
  return w.take();
}

Trace decode_trace(std::string_view bytes) {
  codec::Reader r(bytes);
  if (r.str() != "JCTR") r.fail("bad trace magic");
  if (r.u32() != 1) r.fail("unsupported trace version");
  Trace t;
  t.seed = r.u64();
  const std::uint32_t n = r.u32();
  t.records.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    t.records.push_back(decode_trace_record(r.str()));
  }
  r.expect_done();
  return t;
}

void write_trace_file(const std::string& path, const Trace& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  const std::string bytes = encode_trace(t);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return decode_trace(bytes);
}

void Fabric::register_node(Node* node) {
  const std::string& name = node->principal().name;
  if (nodes_.count(name) > 0) {
    throw std::invalid_argument("duplicate node id: " + name);
  }
  nodes_[name] = node;
  node_order_.push_back(node);
}

bool Fabric::has_node(const std::string& name) const {
  return nodes_.count(name) > 0;
}

Node* Fabric::find_node(const std::string& name) {
  auto it = nodes_.find(name);
  return it == nodes_.end() ? nullptr : it->second;
}

std::uint64_t Fabric::open_channel(const ChannelConfig& config) {
  if (config.capacity_per_tick == 0) {
    throw std::invalid_argument("channel capacity must be >= 1");
  }
  if (config.latency == 0) {
    throw std::invalid_argument("channel latency must be >= 1");
  }
  Channel ch;
  ch.id = next_channel_id_++;
  ch.config = config;
  ch.crosses_boundary =
      config.endpoint_a.trust_domain != config.endpoint_b.trust_domain;
  channels_[ch.id] = std::move(ch);
  return next_channel_id_ - 1;
}

const Channel& Fabric::channel(std::uint64_t id) const {
  auto it = channels_.find(id);
  if (it == channels_.end()) throw std::invalid_argument("unknown channel");
  return it->second;
}

std::optional<std::uint64_t> Fabric::find_channel(const std::string& sender,
                                                  const std::string& receiver,
                                                  Flow f) const {
  for (const auto& [id, ch] : channels_) {
    if (ch.config.interface == f && ch.config.endpoint_a.name == sender &&
        ch.config.endpoint_b.name == receiver) {
      return id;
    }
  }
  return std::nullopt;
}

std::vector<std::uint64_t> Fabric::channels_for(Flow f) const {
  std::vector<std::uint64_t> out;
  for (const auto& [id, ch] : channels_) {
    if (ch.config.interface == f) out.push_back(id);
  }
  return out;
}

void Fabric::install_interceptor(std::uint64_t channel_id, Interceptor* i) {
  auto it = channels_.find(channel_id);
  if (it == channels_.end()) throw std::invalid_argument("unknown channel");
  it->second.interceptors.push_back(i);
}

Envelope Fabric::make_envelope(Flow f, const PrincipalId& sender,
                               const PrincipalId& receiver, Payload payload,
                               std::optional<Token> credentials) {
  Envelope e;
  e.msg_id = next_msg_id();
  e.interface = f;
  e.sender = sender;
  e.receiver = receiver;
  e.sent_at = now_;
  e.credentials = std::move(credentials);
  e.payload = std::move(payload);
  return e;
}

void Fabric::send(std::uint64_t channel_id, Envelope env) {
  const Channel& ch = channel(channel_id);
  if (ch.config.interface != env.interface) {
    throw std::invalid_argument("envelope interface does not match channel");
  }
  Pending p;
  p.tick = now_ + ch.config.latency;
  p.channel_id = channel_id;
  p.msg_id = env.msg_id;
  p.env = std::move(env);
  queue_.insert(std::move(p));
}

void Fabric::inject(std::uint64_t channel_id, Envelope env,
                    bool fresh_msg_id) {
  if (fresh_msg_id) env.msg_id = next_msg_id();
  env.sent_at = now_;
  send(channel_id, std::move(env));
}

void Fabric::add_tick_hook(std::function<void(Tick)> hook) {
  tick_hooks_.push_back(std::move(hook));
}

void Fabric::emit_event(EventKind kind, const PrincipalId& emitter,
                        const std::string& control,
                        const std::string& detail) {
  EventRecord e;
  e.tick = now_;
  e.emitter = emitter;
  e.kind = kind;
  e.control = control;
  e.detail = detail;
  trace_.records.push_back(std::move(e));
}

void Fabric::alert(const PrincipalId& emitter, const std::string& control,
                   const std::string& detail) {
  emit_event(EventKind::alert, emitter, control, detail);
}

const Trace& Fabric::run_until(Tick t) {
  if (t < now_) throw std::invalid_argument("run_until into the past");
  while (now_ < t) {
    process_tick();
    ++now_;
  }
  return trace_;
}

void Fabric::process_tick() {
  deliveries_this_tick_.clear();
  for (auto& hook : tick_hooks_) hook(now_);
  // Deliveries due this tick, in (channel, msg_id) order. Messages injected
  // during delivery processing are scheduled at now + latency >= now + 1 and
  // therefore never reorder the current tick.
  while (!queue_.empty() && queue_.begin()->tick == now_) {
    Pending p = *queue_.begin();
    queue_.erase(queue_.begin());
    deliver(std::move(p));
  }
  for (Node* n : node_order_) n->on_tick();
}

void Fabric::record_flow(Tick tick, const Envelope& env, const Channel& ch,
                         Verdict v) {
  FlowRecord f;
  f.tick = tick;
  f.envelope = env;
  f.channel_id = ch.id;
  f.verdict = v;
  f.crosses_boundary = ch.crosses_boundary;
  trace_.records.push_back(std::move(f));
}

void Fabric::deliver(Pending p) {
  Channel& ch = channels_.at(p.channel_id);
  bool tampered = false;
  for (Interceptor* i : ch.interceptors) {
    Interceptor::Result r = i->on_message(*this, ch.id, p.env);
    tampered = tampered || r.tampered;
    if (r.drop) {
      record_flow(now_, p.env, ch, Verdict::dropped);
      return;
    }
  }
  if (admission_ && !admission_(ch, p.env)) {
    record_flow(now_, p.env, ch, Verdict::blocked);
    return;
  }
  if (++deliveries_this_tick_[ch.id] > ch.config.capacity_per_tick) {
    record_flow(now_, p.env, ch, Verdict::dropped);
    return;
  }
  if (gate_) {
    GateDecision d = gate_(ch, p.env);
    if (!d.pass) {
      record_flow(now_, p.env, ch, Verdict::blocked);
      return;
    }
  }
  auto it = nodes_.find(p.env.receiver.name);
  if (it == nodes_.end()) {
    emit_event(EventKind::warning, p.env.sender, "operational",
               "delivery to unregistered receiver " + p.env.receiver.name);
    record_flow(now_, p.env, ch, Verdict::dropped);
    return;
  }
  record_flow(now_, p.env, ch, tampered ? Verdict::tampered : Verdict::delivered);
  it->second->on_deliver(p.env);
}

std::set<std::pair<TrustDomain, TrustDomain>> Fabric::crossing_pairs() const {
  std::set<std::pair<TrustDomain, TrustDomain>> out;
  for (const TraceRecord& r : trace_.records) {
    const auto* f = std::get_if<FlowRecord>(&r);
    if (!f || !f->crosses_boundary) continue;
    if (f->verdict != Verdict::delivered && f->verdict != Verdict::tampered) {
      continue;
    }
    const auto& ch = channels_.at(f->channel_id);
    TrustDomain a = ch.config.endpoint_a.trust_domain;
    TrustDomain b = ch.config.endpoint_b.trust_domain;
    if (static_cast<int>(a) > static_cast<int>(b)) std::swap(a, b);
    out.insert({a, b});
  }
  return out;
}

}  // namespace jcas
