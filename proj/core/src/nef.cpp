#include "jcas/nef.hpp"

#include <algorithm>
#include <set>

namespace jcas {

NefNode::NefNode(Fabric& fabric, ControlEngine& engine, Config config)
    : fabric_(fabric),
      engine_(engine),
      config_(config),
      id_(make_principal(PrincipalKind::NEF, "nef")) {
  fabric_.register_node(this);
}

void NefNode::register_app(AppRegistration reg) {
  registrations_[reg.app.name] = std::move(reg);
}

void NefNode::respond(const PrincipalId& app, SensingResponse resp) {
  engine_.dispatch(id_, app, Flow::SENS_RESPONSE, std::move(resp));
}

void NefNode::handle_sens_req(const Envelope& env) {
  const auto& req = std::get<SensingRequest>(env.payload);
  SensingResponse resp;
  resp.request_id = req.request_id;
  resp.status = RespStatus::rejected;

  // Application authentication happens here (not at the transport gate) so
  // the requester receives an explicit rejection and lockout applies.
  if (engine_.switches(Flow::SENS_REQ).authn) {
    AuthOutcome out = engine_.authenticator().authenticate(
        env.credentials, env.sender, fabric_.now());
    if (out != AuthOutcome::ok) {
      resp.reason = Reason::unauthenticated;
      respond(env.sender, resp);
      return;
    }
  }
  auto reg = registrations_.find(env.sender.name);
  if (reg == registrations_.end()) {
    resp.reason = Reason::unauthorised;
    respond(env.sender, resp);
    return;
  }
  if (engine_.switches(Flow::SENS_REQ).validate) {
    ValidationResult vr = validate(env);
    if (!vr.ok()) {
      fabric_.alert(id_, "validate",
                    "malformed sensing request " + req.request_id + ": " +
                        vr.violations.front());
      resp.reason = Reason::policy_violation;
      respond(env.sender, resp);
      return;
    }
  }
  // Registration-level permissions: geo-areas, granularity floor, types.
  const AppRegistration& r = reg->second;
  bool area_ok = r.permitted_areas.empty();
  for (const Rect& area : r.permitted_areas) {
    if (req.target_spec.area.within(area)) {
      area_ok = true;
      break;
    }
  }
  if (!area_ok || req.qod.spatial_m + 1e-9 < r.granularity_floor ||
      (!r.sensing_types.empty() &&
       std::find(r.sensing_types.begin(), r.sensing_types.end(),
                 req.result_spec) == r.sensing_types.end())) {
    resp.reason = Reason::policy_violation;
    respond(env.sender, resp);
    return;
  }

  pending_[req.request_id] = PendingRequest{req, env.sender, {}};
  PolicyQuery query;
  query.app_id = env.sender;
  query.request = req;
  for (std::uint64_t ch : fabric_.channels_for(Flow::SENS_POL_REQ)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::SENS_POL_REQ,
                     query);
    return;
  }
  // No policy function reachable: fail closed.
  pending_.erase(req.request_id);
  resp.status = RespStatus::failed;
  resp.reason = Reason::resource_exhausted;
  respond(env.sender, resp);
}

void NefNode::handle_policy_decision(const PolicyDecision& d) {
  if (d.unsolicited) {
    // Policy-change push: refresh the route for the session it names.
    if (d.bundle) {
      auto it = sessions_.find(d.bundle->session_id);
      if (it != sessions_.end()) {
        it->second.policy_version = d.bundle->version;
        it->second.granularity_m = d.bundle->constraints.min_granularity_m;
        it->second.last_policy_change = fabric_.now();
      }
    }
    return;
  }
  auto it = pending_.find(d.request_id);
  if (it == pending_.end()) return;
  PendingRequest& pending = it->second;
  if (!d.allow) {
    SensingResponse resp;
    resp.request_id = d.request_id;
    resp.status = RespStatus::rejected;
    resp.reason = d.reason.value_or(Reason::policy_violation);
    respond(pending.app, resp);
    pending_.erase(it);
    return;
  }
  pending.policy_id = d.policy_id;
  SensingRequest relayed = pending.request;
  relayed.policy_ref = d.policy_id;
  for (std::uint64_t ch : fabric_.channels_for(Flow::JCAS_API_REQ)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::JCAS_API_REQ,
                     relayed);
    return;
  }
  SensingResponse resp;
  resp.request_id = d.request_id;
  resp.status = RespStatus::failed;
  resp.reason = Reason::resource_exhausted;
  respond(pending.app, resp);
  pending_.erase(it);
}

void NefNode::handle_api_resp(const SensingResponse& api) {
  auto it = pending_.find(api.request_id);
  if (it == pending_.end()) return;
  PendingRequest& pending = it->second;
  SensingResponse resp;
  resp.request_id = api.request_id;
  if (api.status == RespStatus::accepted && api.result_channel) {
    const std::string& session_id = *api.result_channel;
    SessionRoute& route = sessions_[session_id];
    Subscriber sub;
    sub.app = pending.app;
    sub.request_id = api.request_id;
    sub.policy_id = pending.policy_id;
    sub.purpose = pending.request.purpose;
    route.subscribers.push_back(std::move(sub));
    resp.status = RespStatus::accepted;
    resp.result_channel = "rs://" + session_id;
    resp.policy_id = pending.policy_id;
  } else {
    resp.status = RespStatus::failed;
    resp.reason = api.reason.value_or(Reason::resource_exhausted);
  }
  respond(pending.app, resp);
  pending_.erase(it);
}

void NefNode::suppress(const std::string& why,
                       const SensingResultItem& item) {
  fabric_.emit_event(EventKind::suppression, id_, "operational",
                     "item for session " + item.session_id + " suppressed: " +
                         why);
}

void NefNode::relay_result(const SensingResultItem& item) {
  auto it = sessions_.find(item.session_id);
  if (it == sessions_.end()) {
    fabric_.alert(id_, "operational",
                  "result for unknown session " + item.session_id);
    return;
  }
  SessionRoute& route = it->second;
  route.items_seen += 1;

  // Items produced under a superseded policy version are never released.
  if (route.last_policy_change > 0 &&
      item.produced_at < route.last_policy_change) {
    suppress("produced under stale policy version", item);
    return;
  }
  if (item.disclosure_level != DisclosureLevel::sanitised) {
    suppress("disclosure level raw", item);
    return;
  }
  // Current-policy re-check every Nth item (default every item).
  if (config_.revalidate_every > 0 &&
      route.items_seen % config_.revalidate_every == 0 &&
      route.granularity_m > 0.0) {
    for (const Detection& d : item.detections) {
      if (!on_grid(d.position, route.granularity_m)) {
        suppress("position finer than session policy granularity", item);
        return;
      }
    }
  }

  std::set<std::string> subjects;
  for (const Detection& d : item.detections) subjects.insert(d.object_ref);
  std::string subject_csv;
  for (const std::string& s : subjects) {
    if (!subject_csv.empty()) subject_csv += ",";
    subject_csv += s;
  }

  for (const Subscriber& sub : route.subscribers) {
    if (!engine_.dispatch(id_, sub.app, Flow::RESULT_STREAM, item)) continue;
    DisclosureRecord rec;
    rec.recipient = sub.app;
    rec.data_description = "session=" + item.session_id +
                           ";items=" + std::to_string(item.detections.size()) +
                           ";subjects=" + subject_csv;
    rec.purpose = sub.purpose;
    rec.obligations =
        sub.obligations.empty() ? "results stay with recipient" : sub.obligations;
    rec.timestamp = fabric_.now();
    rec.applied_policy_id = sub.policy_id;
    for (std::uint64_t ch : fabric_.channels_for(Flow::DISCLOSURE_LOG)) {
      const Channel& channel = fabric_.channel(ch);
      if (channel.config.endpoint_a.name != id_.name) continue;
      engine_.dispatch(id_, channel.config.endpoint_b, Flow::DISCLOSURE_LOG,
                       rec);
      break;
    }
  }
}

void NefNode::on_deliver(const Envelope& env) {
  switch (env.interface) {
    case Flow::SENS_REQ:
      handle_sens_req(env);
      break;
    case Flow::SENS_POL_RESP:
      handle_policy_decision(std::get<PolicyDecision>(env.payload));
      break;
    case Flow::JCAS_API_RESP:
      handle_api_resp(std::get<SensingResponse>(env.payload));
      break;
    case Flow::RESULT_STREAM:
      relay_result(std::get<SensingResultItem>(env.payload));
      break;
    default:
      fabric_.emit_event(EventKind::warning, id_, "operational",
                         "unexpected flow " +
                             std::string(to_string(env.interface)));
  }
}

}  // namespace jcas
