#include "jcas/spf.hpp"

#include <algorithm>
#include <cmath>

namespace jcas {

SpfNode::SpfNode(Fabric& fabric, ControlEngine& engine,
                 const std::vector<SuPose>& su_registry, Config config)
    : fabric_(fabric),
      engine_(engine),
      config_(std::move(config)),
      id_(make_principal(PrincipalKind::SPF, "spf")) {
  for (const SuPose& pose : su_registry) su_poses_[pose.su_id] = pose;
  fabric_.register_node(this);
}

std::size_t SpfNode::active_sessions() const {
  std::size_t n = 0;
  for (const auto& [sid, s] : sessions_) {
    if (s.state == SessionState::created || s.state == SessionState::active) {
      ++n;
    }
  }
  return n;
}

std::optional<SessionState> SpfNode::session_state(
    const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second.state;
}

std::optional<std::size_t> SpfNode::ephemeral_size(
    const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end() || it->second.state == SessionState::disposed) {
    return std::nullopt;
  }
  return it->second.buffer.size() + it->second.interim.size();
}

std::vector<std::string> SpfNode::retained_raw_refs() const {
  std::vector<std::string> out;
  for (const auto& [sid, s] : sessions_) {
    for (const Measurement& m : s.buffer) {
      for (const Echo& e : m.echoes) {
        if (!e.raw_object_ref.empty()) out.push_back(e.raw_object_ref);
      }
    }
    for (const SensingResultItem& item : s.interim) {
      for (const Detection& d : item.detections) {
        if (!d.object_ref.empty() && d.object_ref.rfind("p-", 0) != 0 &&
            d.object_ref.rfind("det-", 0) != 0) {
          out.push_back(d.object_ref);
        }
      }
    }
  }
  return out;
}

std::optional<std::vector<Measurement>> SpfNode::snoop_ephemeral(
    const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  const Session& s = it->second;
  if (s.isolation == IsolationClass::isolated) return std::nullopt;
  if (s.state == SessionState::disposed) return std::nullopt;
  return s.buffer;
}

IsolationClass SpfNode::isolation_for_new_sessions() const {
  // Sessions are provisioned in isolated environments when resource
  // compartmentalisation is switched on for the inter-session interface.
  return engine_.switches(Flow::INTERPROCESS_STREAM).access_control
             ? IsolationClass::isolated
             : IsolationClass::plain;
}

void SpfNode::send_orch(OrchVerb verb, const std::string& session_id,
                        std::uint64_t version) {
  OrchestrationCommand cmd;
  cmd.verb = verb;
  cmd.session_id = session_id;
  cmd.new_policy_version = version;
  engine_.dispatch(id_, id_, Flow::PROCESSING_ORCH_FLOW, cmd);
}

void SpfNode::handle_proc_req(const ProcessingRequest& req,
                              const PrincipalId& from) {
  ProcessingResponse resp;
  resp.task_id = req.task_id;
  auto existing = sessions_.find(req.task_id);
  const bool reusable =
      existing != sessions_.end() &&
      existing->second.state != SessionState::disposed &&
      existing->second.state != SessionState::disposing;
  if (!reusable && active_sessions() >= config_.capacity) {
    resp.success = false;
    resp.reason = Reason::resource_exhausted;
    engine_.dispatch(id_, from, Flow::PROC_RESP, resp);
    return;
  }
  Session& s = sessions_[req.task_id];
  if (s.state == SessionState::disposed) {
    // Task ids are session-scoped; a disposed session never comes back.
    resp.success = false;
    resp.reason = Reason::policy_violation;
    engine_.dispatch(id_, from, Flow::PROC_RESP, resp);
    return;
  }
  s.session_id = req.task_id;
  s.state = SessionState::created;
  s.isolation = isolation_for_new_sessions();
  s.ingress = EndpointRef{id_, next_port_++};
  if (req.reporting == ReportingStyle::stream) {
    s.egress = EndpointRef{id_, next_port_++};
  }
  s.request = req;
  s.requester = from;
  s.last_data_tick = fabric_.now();

  // Fetch the current processing policies before serving data (round 0 is a
  // fetch, not a renegotiation).
  NegotiationProposal fetch;
  fetch.session_id = req.task_id;
  fetch.requester = id_;
  fetch.granularity_m = 1.0;
  fetch.granularity_ticks = 1;
  fetch.round = 0;
  fetch.source_policy_ids = {};
  for (std::uint64_t ch : fabric_.channels_for(Flow::POL_REQ)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::POL_REQ, fetch);
    break;
  }
}

void SpfNode::handle_pol_resp(const NegotiationReply& reply) {
  auto it = sessions_.find(reply.session_id);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  if (reply.verdict == NegotiationVerdict::failed) {
    if (reply.unsolicited && s.state == SessionState::active) {
      // Policy became unsatisfiable mid-session: end before any further
      // disclosure.
      fabric_.emit_event(EventKind::policy_change, id_, "operational",
                         "session " + s.session_id +
                             " policy unsatisfiable; ending");
      send_orch(OrchVerb::end, s.session_id, 0);
      end_session(s.session_id);
    } else if (s.state == SessionState::created) {
      ProcessingResponse resp;
      resp.task_id = s.session_id;
      resp.success = false;
      resp.reason = Reason::policy_violation;
      engine_.dispatch(id_, s.requester, Flow::PROC_RESP, resp);
      sessions_.erase(it);
    }
    return;
  }
  if (!reply.policy) return;
  if (s.state == SessionState::created) {
    s.policy = *reply.policy;
    s.state = SessionState::active;
    send_orch(OrchVerb::start, s.session_id, s.policy.version);
    ProcessingResponse resp;
    resp.task_id = s.session_id;
    resp.success = true;
    resp.session_id = s.session_id;
    resp.ingress = s.ingress;
    resp.egress = s.egress;
    engine_.dispatch(id_, s.requester, Flow::PROC_RESP, resp);
  } else if (s.state == SessionState::active &&
             reply.policy->version > s.policy.version) {
    s.policy = *reply.policy;
    send_orch(OrchVerb::modify, s.session_id, s.policy.version);
  }
}

void SpfNode::handle_orch(const OrchestrationCommand& cmd) {
  if (cmd.verb == OrchVerb::end) end_session(cmd.session_id);
}

void SpfNode::ingest(const Measurement& m) {
  auto it = sessions_.find(m.task_id);
  if (it == sessions_.end() || it->second.state != SessionState::active) {
    fabric_.alert(id_, "operational",
                  "measurement for unknown or stale ingress (task " +
                      m.task_id + ") dropped");
    return;
  }
  it->second.buffer.push_back(m);
  it->second.last_data_tick = fabric_.now();
}

std::vector<SensingResultItem> SpfNode::process_window(Session& s) {
  const bool sanitise = engine_.switches(Flow::RESULT_STREAM).sanitise;
  const bool pseudonymise =
      engine_.switches(Flow::RESULT_STREAM).pseudonymise;
  const double granularity = s.policy.constraints.min_granularity_m;

  struct Cluster {
    Vec2 sum{0, 0};
    double strength_sum{0};
    std::size_t n{0};
    std::string raw_ref;
    Vec2 centroid() const { return {sum.x / n, sum.y / n}; }
  };
  std::vector<Cluster> clusters;
  double max_sigma = 0.0;

  for (std::size_t i = s.processed_upto; i < s.buffer.size(); ++i) {
    const Measurement& m = s.buffer[i];
    auto pose_it = su_poses_.find(m.su_id);
    if (pose_it == su_poses_.end()) continue;
    const SuPose& pose = pose_it->second;
    max_sigma = std::max(max_sigma, pose.noise_sigma);
    const double gate = std::max(2.0 * max_sigma, 1e-6);
    for (const Echo& e : m.echoes) {
      Vec2 p{pose.position.x + e.range_m * std::cos(e.bearing_rad),
             pose.position.y + e.range_m * std::sin(e.bearing_rad)};
      // Greedy nearest-neighbour association within the gate.
      Cluster* best = nullptr;
      double best_d = gate;
      for (Cluster& c : clusters) {
        const double d = distance(c.centroid(), p);
        if (d <= best_d) {
          best_d = d;
          best = &c;
        }
      }
      if (best) {
        best->sum = best->sum + p;
        best->strength_sum += e.strength;
        best->n += 1;
      } else {
        clusters.push_back(
            Cluster{p, e.strength, 1, e.raw_object_ref});
      }
    }
  }
  s.processed_upto = s.buffer.size();

  SensingResultItem item;
  item.session_id = s.session_id;
  item.produced_at = fabric_.now();
  std::size_t ordinal = 0;
  for (const Cluster& c : clusters) {
    // Consent scope: detections of excluded subjects never leave processing.
    if (std::find(s.policy.excluded_subjects.begin(),
                  s.policy.excluded_subjects.end(),
                  c.raw_ref) != s.policy.excluded_subjects.end()) {
      continue;
    }
    Detection d;
    std::optional<TargetClass> cls =
        config_.classifier ? config_.classifier(c.raw_ref) : std::nullopt;
    d.cls = cls.value_or(TargetClass::object);
    const auto& classes = s.policy.constraints.target_classes;
    if (!classes.empty() &&
        std::find(classes.begin(), classes.end(), d.cls) == classes.end()) {
      continue;
    }
    d.confidence = std::clamp(c.strength_sum / static_cast<double>(c.n), 0.0, 1.0);
    if (sanitise) {
      d.position = quantise(c.centroid(), granularity);
      d.object_ref =
          pseudonymise
              ? pseudonymize(c.raw_ref, s.session_id,
                             engine_.keys().pseudonym_secret())
              : "det-" + std::to_string(ordinal);
    } else {
      d.position = c.centroid();
      d.object_ref = c.raw_ref;
    }
    ++ordinal;
    item.detections.push_back(std::move(d));
  }
  item.disclosure_level =
      sanitise ? DisclosureLevel::sanitised : DisclosureLevel::raw;

  std::vector<SensingResultItem> out;
  const bool event_style = s.request.reporting == ReportingStyle::event;
  if (!event_style || !item.detections.empty()) out.push_back(item);
  return out;
}

void SpfNode::disclose(Session& s, const SensingResultItem& item) {
  s.interim.push_back(item);  // interim results stay in the ephemeral store
  for (std::uint64_t ch : fabric_.channels_for(Flow::RESULT_STREAM)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::RESULT_STREAM,
                     item);
    break;
  }
  if (config_.record_uc_data) {
    for (std::uint64_t ch : fabric_.channels_for(Flow::RECORD_STREAM)) {
      const Channel& channel = fabric_.channel(ch);
      if (channel.config.endpoint_a.name != id_.name) continue;
      engine_.dispatch(id_, channel.config.endpoint_b, Flow::RECORD_STREAM,
                       item);
      break;
    }
  }
}

bool SpfNode::share(const std::string& from_session,
                    const std::string& to_session,
                    const SensingResultItem& item) {
  auto a = sessions_.find(from_session);
  auto b = sessions_.find(to_session);
  if (a == sessions_.end() || b == sessions_.end() ||
      a->second.state != SessionState::active ||
      b->second.state != SessionState::active) {
    fabric_.alert(id_, "operational", "share with inactive session refused");
    return false;
  }
  const auto& ca = a->second.policy.constraints.target_classes;
  const auto& cb = b->second.policy.constraints.target_classes;
  bool scopes_intersect = false;
  for (TargetClass t : ca) {
    if (std::find(cb.begin(), cb.end(), t) != cb.end()) {
      scopes_intersect = true;
      break;
    }
  }
  if (!scopes_intersect ||
      a->second.policy.version != b->second.policy.version) {
    fabric_.alert(id_, "access_control",
                  "policy-incompatible share " + from_session + " -> " +
                      to_session + " refused");
    return false;
  }
  if (item.disclosure_level != DisclosureLevel::sanitised) {
    fabric_.alert(id_, "operational", "unsanitised share refused");
    return false;
  }
  engine_.dispatch(id_, id_, Flow::INTERPROCESS_STREAM, item);
  b->second.interim.push_back(item);
  return true;
}

void SpfNode::end_session(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  if (s.state == SessionState::disposed) return;  // idempotent
  s.state = SessionState::disposing;
  s.buffer.clear();
  s.buffer.shrink_to_fit();
  s.interim.clear();
  s.interim.shrink_to_fit();
  s.processed_upto = 0;
  s.ingress = EndpointRef{};  // ingress invalidated
  s.state = SessionState::disposed;
  fabric_.emit_event(EventKind::disposal, id_, "operational",
                     "session " + session_id + " disposed");
}

void SpfNode::on_deliver(const Envelope& env) {
  switch (env.interface) {
    case Flow::PROC_REQ:
      handle_proc_req(std::get<ProcessingRequest>(env.payload), env.sender);
      break;
    case Flow::POL_RESP:
      handle_pol_resp(std::get<NegotiationReply>(env.payload));
      break;
    case Flow::PROCESSING_ORCH_FLOW:
      handle_orch(std::get<OrchestrationCommand>(env.payload));
      break;
    case Flow::TX_DATA:
    case Flow::RX_DATA:
      ingest(std::get<Measurement>(env.payload));
      break;
    case Flow::INTERPROCESS_STREAM:
      break;  // loopback delivery; effect applied in share()
    default:
      fabric_.emit_event(EventKind::warning, id_, "operational",
                         "unexpected flow " +
                             std::string(to_string(env.interface)));
  }
}

void SpfNode::on_tick() {
  const Tick now = fabric_.now();
  for (auto& [sid, s] : sessions_) {
    if (s.state != SessionState::active) continue;
    const Schedule& sched = s.request.schedule;
    if (now <= sched.start) continue;
    const Tick elapsed = now - sched.start;
    if (sched.period == 0 || elapsed % sched.period != 0) continue;
    const Tick reports = sched.duration / sched.period;
    const Tick k = elapsed / sched.period;
    if (k > reports) continue;

    // Continuity monitoring: a scheduled window with no data at all is a
    // deletion/jamming indicator.
    const bool continuity =
        engine_.switches(Flow::RX_DATA).replay_protect ||
        engine_.switches(Flow::TX_DATA).replay_protect;
    const bool window_empty = s.processed_upto == s.buffer.size();
    if (continuity && window_empty && s.last_heartbeat_alert != now) {
      s.last_heartbeat_alert = now;
      fabric_.alert(id_, "replay_protect",
                    "no sensing data arrived for session " + sid +
                        " in a scheduled window");
    }
    for (SensingResultItem& item : process_window(s)) {
      disclose(s, item);
    }
  }
}

}  // namespace jcas
