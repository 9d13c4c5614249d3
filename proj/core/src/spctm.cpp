#include "jcas/spctm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "jcas/codec.hpp"

namespace jcas {

namespace {

constexpr double kGranEps = 1e-9;

std::vector<TargetClass> all_classes() {
  return {TargetClass::person, TargetClass::vehicle, TargetClass::object};
}

std::vector<ResultSpec> all_specs() {
  return {ResultSpec::event_notification, ResultSpec::object_list,
          ResultSpec::track_stream};
}

template <typename T>
std::vector<T> normalised(std::vector<T> v, std::vector<T> if_empty) {
  if (v.empty()) v = std::move(if_empty);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <typename T>
std::vector<T> intersect_sorted(const std::vector<T>& a,
                                const std::vector<T>& b) {
  std::vector<T> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

bool rect_less(const Rect& a, const Rect& b) {
  return std::tie(a.lo.x, a.lo.y, a.hi.x, a.hi.y) <
         std::tie(b.lo.x, b.lo.y, b.hi.x, b.hi.y);
}

std::string zero_pad(std::uint64_t n) {
  std::string s = std::to_string(n);
  while (s.size() < 8) s.insert(s.begin(), '0');
  return s;
}

// data_description format written by the NEF:
//   session=<sid>;purpose=<p>;items=<n>;subjects=<a,b,c>
std::string description_field(const std::string& desc,
                              const std::string& field) {
  const std::string needle = field + "=";
  auto pos = desc.find(needle);
  if (pos == std::string::npos) return {};
  pos += needle.size();
  auto end = desc.find(';', pos);
  return desc.substr(pos, end == std::string::npos ? std::string::npos
                                                   : end - pos);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ComposeResult compose_constraints(const std::vector<SensingPolicy>& policies,
                                  const std::vector<ConsentRecord>& consents,
                                  const std::string& purpose) {
  ComposeResult out;
  if (policies.empty()) {
    out.error = "unsatisfiable";
    return out;
  }
  PolicyConstraints c;
  c.target_classes = all_classes();
  c.sensing_types = all_specs();
  bool first = true;
  std::optional<Rect> area;
  std::set<std::string> apps;
  std::set<std::string> obligations;
  Tick retention = 0;
  bool any_retention = false;
  for (const SensingPolicy& p : policies) {
    const PolicyConstraints& in = p.constraints;
    for (const std::string& a : in.app_ids) apps.insert(a);
    c.target_classes = intersect_sorted(
        c.target_classes, normalised(in.target_classes, all_classes()));
    c.sensing_types = intersect_sorted(
        c.sensing_types, normalised(in.sensing_types, all_specs()));
    if (first) {
      area = in.allowed_area;
    } else if (area) {
      area = Rect::intersect(*area, in.allowed_area);
    }
    for (const Rect& z : in.restricted_zones) c.restricted_zones.push_back(z);
    c.min_granularity_m = first ? in.min_granularity_m
                                : std::max(c.min_granularity_m,
                                           in.min_granularity_m);
    c.min_granularity_ticks =
        first ? in.min_granularity_ticks
              : std::max(c.min_granularity_ticks, in.min_granularity_ticks);
    if (in.required_disclosure == DisclosureLevel::sanitised) {
      c.required_disclosure = DisclosureLevel::sanitised;
    } else if (first) {
      c.required_disclosure = in.required_disclosure;
    }
    if (!in.obligations.empty()) obligations.insert(in.obligations);
    c.transparency = first ? in.transparency
                           : std::max(c.transparency, in.transparency);
    if (in.retention_ticks > 0) {
      retention = any_retention ? std::min(retention, in.retention_ticks)
                                : in.retention_ticks;
      any_retention = true;
    }
    first = false;
  }
  if (!area || c.target_classes.empty() || c.sensing_types.empty()) {
    out.error = "unsatisfiable";
    return out;
  }
  c.allowed_area = *area;
  c.app_ids.assign(apps.begin(), apps.end());
  std::sort(c.restricted_zones.begin(), c.restricted_zones.end(), rect_less);
  c.restricted_zones.erase(
      std::unique(c.restricted_zones.begin(), c.restricted_zones.end()),
      c.restricted_zones.end());
  {
    std::string joined;
    for (const std::string& o : obligations) {
      if (!joined.empty()) joined += "; ";
      joined += o;
    }
    c.obligations = joined;
  }
  c.retention_ticks = any_retention ? retention : 0;

  // Latest consent per subject for this purpose; revoked subjects leave the
  // scope. Ties resolve to revoked.
  std::map<std::string, ConsentRecord> latest;
  for (const ConsentRecord& r : consents) {
    if (r.purpose != purpose) continue;
    auto it = latest.find(r.subject);
    if (it == latest.end() || r.updated_at > it->second.updated_at ||
        (r.updated_at == it->second.updated_at &&
         r.status == ConsentStatus::revoked)) {
      latest[r.subject] = r;
    }
  }
  for (const auto& [subject, rec] : latest) {
    if (rec.status == ConsentStatus::revoked) {
      out.excluded_subjects.push_back(subject);
    }
  }
  out.constraints = std::move(c);
  return out;
}

Spctm::Spctm(Fabric& fabric, ControlEngine& engine, Store& store)
    : Spctm(fabric, engine, store, Config()) {}

Spctm::Spctm(Fabric& fabric, ControlEngine& engine, Store& store,
             Config config)
    : fabric_(fabric),
      engine_(engine),
      store_(store),
      config_(config),
      id_(make_principal(PrincipalKind::SPCTM, "spctm")) {
  fabric_.register_node(this);
}

void Spctm::add_policy(const SensingPolicy& p) {
  store_.put(Category::sensing_policy, p.policy_id, encode_record(p),
             fabric_.now(), std::nullopt);
}

void Spctm::add_consent(const ConsentRecord& c) {
  store_.put(Category::consent, c.subject + "|" + c.purpose, encode_record(c),
             fabric_.now(), std::nullopt);
}

std::vector<SensingPolicy> Spctm::load_policies(
    const std::vector<std::string>& ids) {
  std::vector<SensingPolicy> out;
  for (const std::string& id : ids) {
    auto rec = store_.get(Category::sensing_policy, id);
    if (!rec) continue;
    try {
      out.push_back(decode_sensing_policy(rec->value));
    } catch (const codec::DecodeError&) {
      fabric_.emit_event(EventKind::warning, id_, "operational",
                         "undecodable policy record " + id);
    }
  }
  return out;
}

std::vector<SensingPolicy> Spctm::applicable_policies(
    const std::string& app_name) {
  std::vector<std::string> keys;
  for (const StoreRecord& r :
       store_.query(Category::sensing_policy, nullptr)) {
    keys.push_back(r.key);
  }
  std::vector<SensingPolicy> out;
  for (const SensingPolicy& p : load_policies(keys)) {
    const auto& apps = p.constraints.app_ids;
    if (apps.empty() ||
        std::find(apps.begin(), apps.end(), app_name) != apps.end()) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<ConsentRecord> Spctm::current_consents() const {
  std::vector<ConsentRecord> out;
  for (const StoreRecord& r : store_.query(Category::consent, nullptr)) {
    try {
      out.push_back(decode_consent_record(r.value));
    } catch (const codec::DecodeError&) {
    }
  }
  return out;
}

PolicyDecision Spctm::evaluate(const PolicyQuery& query) {
  PolicyDecision d;
  d.request_id = query.request.request_id;
  const SensingRequest& req = query.request;

  auto deny = [&](Reason reason, const std::string& violated) {
    d.allow = false;
    d.reason = reason;
    d.violated = violated;
    store_.put(Category::session_policy,
               "decision:" + zero_pad(++next_policy_id_),
               encode_tagged_payload(d), fabric_.now(), std::nullopt);
    return d;
  };

  std::vector<SensingPolicy> applicable =
      applicable_policies(query.app_id.name);
  if (applicable.empty()) return deny(Reason::unauthorised, "unknown app");

  ComposeResult cr =
      compose_constraints(applicable, current_consents(), req.purpose);
  if (!cr.ok()) return deny(Reason::policy_violation, cr.error);
  const PolicyConstraints& c = *cr.constraints;

  if (std::find(c.sensing_types.begin(), c.sensing_types.end(),
                req.result_spec) == c.sensing_types.end()) {
    return deny(Reason::policy_violation, "sensing_type");
  }
  if (req.qod.spatial_m + kGranEps < c.min_granularity_m ||
      req.qod.temporal_ticks < c.min_granularity_ticks) {
    return deny(Reason::policy_violation, "granularity");
  }
  if (!req.target_spec.area.within(c.allowed_area)) {
    return deny(Reason::policy_violation, "geo");
  }
  for (const Rect& z : c.restricted_zones) {
    if (req.target_spec.area.overlaps(z)) {
      return deny(Reason::policy_violation, "geo_restricted");
    }
  }

  const std::string policy_id = "pol-" + zero_pad(++next_policy_id_);
  EvalContext ctx;
  ctx.policy_id = policy_id;
  ctx.app = query.app_id;
  ctx.request_id = req.request_id;
  ctx.purpose = req.purpose;
  for (const SensingPolicy& p : applicable) {
    ctx.applicable_policy_ids.push_back(p.policy_id);
  }
  eval_contexts_[policy_id] = ctx;

  d.allow = true;
  d.policy_id = policy_id;
  SessionPolicy bundle;
  bundle.session_id = policy_id;
  bundle.constraints = c;
  bundle.source_policy_ids = ctx.applicable_policy_ids;
  bundle.excluded_subjects = cr.excluded_subjects;
  bundle.version = 1;
  d.bundle = bundle;
  store_.put(Category::session_policy, "decision:" + policy_id,
             encode_tagged_payload(d), fabric_.now(), std::nullopt);
  return d;
}

NegotiationReply Spctm::negotiate(const NegotiationProposal& proposal) {
  NegotiationReply r;
  r.session_id = proposal.session_id;
  r.round = proposal.round;

  // Round 0 is a fetch of the current session policy, not a renegotiation.
  if (proposal.round == 0) {
    auto it = sessions_.find(proposal.session_id);
    if (it == sessions_.end() || !it->second.active) {
      r.verdict = NegotiationVerdict::failed;
    } else {
      r.verdict = NegotiationVerdict::accepted;
      r.policy = it->second.current;
    }
    return r;
  }

  SessionContext& sess = sessions_[proposal.session_id];
  sess.rounds_used += 1;
  if (sess.rounds_used > config_.negotiation_rounds) {
    r.verdict = NegotiationVerdict::failed;
    fabric_.emit_event(EventKind::warning, id_, "operational",
                       "negotiation for " + proposal.session_id +
                           " failed after " +
                           std::to_string(config_.negotiation_rounds) +
                           " rounds");
    return r;
  }

  std::set<std::string> source_ids;
  std::string purpose = proposal.purpose;
  for (const std::string& pid : proposal.source_policy_ids) {
    auto it = eval_contexts_.find(pid);
    if (it == eval_contexts_.end()) {
      r.verdict = NegotiationVerdict::failed;
      return r;
    }
    for (const std::string& src : it->second.applicable_policy_ids) {
      source_ids.insert(src);
    }
    if (purpose.empty()) purpose = it->second.purpose;
  }
  std::vector<std::string> ids(source_ids.begin(), source_ids.end());
  ComposeResult cr =
      compose_constraints(load_policies(ids), current_consents(), purpose);
  if (!cr.ok()) {
    r.verdict = NegotiationVerdict::failed;
    return r;
  }
  if (proposal.granularity_m + kGranEps < cr.constraints->min_granularity_m ||
      proposal.granularity_ticks < cr.constraints->min_granularity_ticks) {
    r.verdict = NegotiationVerdict::counter;
    r.counter_granularity_m = cr.constraints->min_granularity_m;
    r.counter_granularity_ticks = cr.constraints->min_granularity_ticks;
    return r;
  }

  PolicyConstraints effective = *cr.constraints;
  // The negotiated (coarser or equal) granularity becomes the session's
  // operating floor.
  effective.min_granularity_m =
      std::max(effective.min_granularity_m, proposal.granularity_m);
  effective.min_granularity_ticks =
      std::max(effective.min_granularity_ticks, proposal.granularity_ticks);

  if (sess.current.session_id.empty()) sess.current.version = 0;
  sess.current.session_id = proposal.session_id;
  sess.current.constraints = effective;
  sess.current.source_policy_ids = proposal.source_policy_ids;
  sess.current.excluded_subjects = cr.excluded_subjects;
  sess.current.version += 1;
  sess.purpose = purpose;
  sess.active = true;
  sess.rounds_used = 0;
  store_.put(Category::session_policy, "session:" + proposal.session_id,
             encode_record(sess.current), fabric_.now(), std::nullopt);

  r.verdict = NegotiationVerdict::accepted;
  r.policy = sess.current;
  return r;
}

void Spctm::record_consent(const ConsentRecord& c) {
  ConsentRecord stamped = c;
  stamped.updated_at = fabric_.now();
  add_consent(stamped);

  // Recompose every active session for this purpose whose exclusion set
  // changes, and push the new version to NEF, SCF, and SPF.
  for (auto& [sid, sess] : sessions_) {
    if (!sess.active || sess.purpose != c.purpose) continue;
    std::set<std::string> source_ids;
    for (const std::string& pid : sess.current.source_policy_ids) {
      auto it = eval_contexts_.find(pid);
      if (it == eval_contexts_.end()) continue;
      for (const std::string& src : it->second.applicable_policy_ids) {
        source_ids.insert(src);
      }
    }
    std::vector<std::string> ids(source_ids.begin(), source_ids.end());
    ComposeResult cr = compose_constraints(load_policies(ids),
                                           current_consents(), sess.purpose);
    if (!cr.ok()) {
      // Session no longer satisfiable: direct the SPF to end it.
      sess.active = false;
      NegotiationReply push;
      push.session_id = sid;
      push.verdict = NegotiationVerdict::failed;
      push.unsolicited = true;
      for (std::uint64_t ch : fabric_.channels_for(Flow::POL_RESP)) {
        const Channel& channel = fabric_.channel(ch);
        if (channel.config.endpoint_a.name != id_.name) continue;
        engine_.dispatch(id_, channel.config.endpoint_b, Flow::POL_RESP, push);
      }
      continue;
    }
    if (cr.excluded_subjects == sess.current.excluded_subjects) continue;
    PolicyConstraints effective = *cr.constraints;
    effective.min_granularity_m =
        std::max(effective.min_granularity_m,
                 sess.current.constraints.min_granularity_m);
    effective.min_granularity_ticks =
        std::max(effective.min_granularity_ticks,
                 sess.current.constraints.min_granularity_ticks);
    sess.current.constraints = effective;
    sess.current.excluded_subjects = cr.excluded_subjects;
    sess.current.version += 1;
    store_.put(Category::session_policy, "session:" + sid,
               encode_record(sess.current), fabric_.now(), std::nullopt);
    fabric_.emit_event(EventKind::policy_change, id_, "operational",
                       "session " + sid + " recomposed to version " +
                           std::to_string(sess.current.version));
    push_session_policy(sess);
  }
}

void Spctm::revoke_consent(const std::string& subject,
                           const std::string& purpose) {
  auto existing = consent_status(subject, purpose);
  if (!existing) {
    fabric_.emit_event(EventKind::warning, id_, "operational",
                       "revocation for unknown consent " + subject + "|" +
                           purpose);
    return;
  }
  ConsentRecord c;
  c.subject = subject;
  c.purpose = purpose;
  c.status = ConsentStatus::revoked;
  record_consent(c);
}

void Spctm::push_session_policy(const SessionContext& sess) {
  NegotiationReply push;
  push.session_id = sess.current.session_id;
  push.verdict = NegotiationVerdict::accepted;
  push.policy = sess.current;
  push.unsolicited = true;
  push.round = 0;
  for (std::uint64_t ch : fabric_.channels_for(Flow::POL_RESP)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::POL_RESP, push);
  }
  PolicyDecision note;
  note.request_id = sess.current.session_id;
  note.allow = true;
  note.policy_id = sess.current.session_id;
  note.bundle = sess.current;
  note.unsolicited = true;
  for (std::uint64_t ch : fabric_.channels_for(Flow::SENS_POL_RESP)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::SENS_POL_RESP,
                     note);
  }
}

bool Spctm::log_disclosure(const DisclosureRecord& rec) {
  if (rec.timestamp > fabric_.now()) {
    fabric_.emit_event(EventKind::warning, id_, "operational",
                       "disclosure record with future timestamp rejected");
    return false;
  }
  const std::string key = "dl-" + zero_pad(++disclosure_seq_);
  store_.put(Category::disclosure_log, key, encode_tagged_payload(rec),
             fabric_.now(), std::nullopt);
  return true;
}

TransparencyExchange Spctm::transparency_report(const std::string& subject,
                                                const PrincipalId& requester) {
  TransparencyExchange ex;
  ex.is_query = false;
  ex.subject = subject;
  for (const StoreRecord& r :
       store_.query(Category::disclosure_log, nullptr)) {
    auto payload = decode_tagged_payload(r.value);
    if (!payload) continue;
    const auto* rec = std::get_if<DisclosureRecord>(&*payload);
    if (!rec) continue;
    const std::string sid =
        description_field(rec->data_description, "session");
    const std::vector<std::string> subjects =
        split_csv(description_field(rec->data_description, "subjects"));
    const std::string pseudo =
        pseudonymize(subject, sid, engine_.keys().pseudonym_secret());
    bool match = false;
    for (const std::string& s : subjects) {
      if (s == subject || s == pseudo) {
        match = true;
        break;
      }
    }
    if (match) ex.records.push_back(*rec);
  }
  // The report access itself becomes part of the transparency data.
  store_.put(Category::transparency, "report-" + zero_pad(++disclosure_seq_),
             "subject=" + subject + ";requester=" + requester.name +
                 ";records=" + std::to_string(ex.records.size()),
             fabric_.now(), std::nullopt);
  return ex;
}

std::optional<ConsentStatus> Spctm::consent_status(
    const std::string& subject, const std::string& purpose) const {
  auto recs = store_.query(Category::consent, [&](const StoreRecord& r) {
    return r.key == subject + "|" + purpose;
  });
  if (recs.empty()) return std::nullopt;
  try {
    return decode_consent_record(recs.front().value).status;
  } catch (const codec::DecodeError&) {
    return std::nullopt;
  }
}

std::optional<SessionPolicy> Spctm::session_policy(
    const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second.current;
}

void Spctm::end_session(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it != sessions_.end()) it->second.active = false;
}

std::size_t Spctm::disclosure_count() const {
  return store_.count(Category::disclosure_log);
}

void Spctm::on_deliver(const Envelope& env) {
  switch (env.interface) {
    case Flow::SENS_POL_REQ: {
      const auto& q = std::get<PolicyQuery>(env.payload);
      PolicyDecision d = evaluate(q);
      engine_.dispatch(id_, env.sender, Flow::SENS_POL_RESP, d);
      break;
    }
    case Flow::POL_REQ: {
      const auto& p = std::get<NegotiationProposal>(env.payload);
      NegotiationReply r = negotiate(p);
      engine_.dispatch(id_, env.sender, Flow::POL_RESP, r);
      break;
    }
    case Flow::DISCLOSURE_LOG: {
      log_disclosure(std::get<DisclosureRecord>(env.payload));
      break;
    }
    case Flow::TRANSPARENCY_DISCLOSURE: {
      const auto& ex = std::get<TransparencyExchange>(env.payload);
      if (ex.is_query) {
        TransparencyExchange report =
            transparency_report(ex.subject, env.sender);
        engine_.dispatch(id_, env.sender, Flow::TRANSPARENCY_DISCLOSURE,
                         report);
      }
      break;
    }
    default:
      fabric_.emit_event(EventKind::warning, id_, "operational",
                         "unexpected flow " +
                             std::string(to_string(env.interface)));
  }
}

}  // namespace jcas
