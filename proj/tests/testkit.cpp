#include "testkit.hpp"

#include <algorithm>

namespace jcas::testkit {

namespace {

template <typename T>
T pick(Rng& rng, std::initializer_list<T> options) {
  auto it = options.begin();
  std::advance(it, static_cast<long>(rng.below(options.size())));
  return *it;
}

}  // namespace

std::string Gen::name(const std::string& prefix) {
  return prefix + "-" + std::to_string(++counter_);
}

PrincipalId Gen::principal(PrincipalKind kind) {
  return make_principal(kind, name("p"));
}

PrincipalId Gen::any_principal() {
  auto kind = static_cast<PrincipalKind>(rng_.below(10));  // not ADVERSARY
  return principal(kind);
}

Rect Gen::rect() {
  double x = rng_.uniform(-500.0, 500.0);
  double y = rng_.uniform(-500.0, 500.0);
  double w = rng_.uniform(10.0, 400.0);
  double h = rng_.uniform(10.0, 400.0);
  return Rect{{x, y}, {x + w, y + h}};
}

ConvexPolygon Gen::polygon() {
  if (rng_.below(2) == 0) return ConvexPolygon::rectangle(rect());
  // Triangle with guaranteed area.
  double x = rng_.uniform(-400.0, 400.0);
  double y = rng_.uniform(-400.0, 400.0);
  return ConvexPolygon{{{x, y},
                        {x + rng_.uniform(20.0, 100.0), y},
                        {x, y + rng_.uniform(20.0, 100.0)}}};
}

Token Gen::token() {
  Token t;
  t.principal = any_principal();
  t.issued_at = rng_.below(100);
  t.expiry = t.issued_at + 1 + rng_.below(1000);
  t.nonce = rng_.next_u64();
  t.tag = rng_.next_u64();
  return t;
}

SensingRequest Gen::sensing_request() {
  SensingRequest q;
  q.request_id = name("req");
  q.app_id = principal(PrincipalKind::APP);
  q.target_spec.area = polygon();
  if (rng_.below(3) == 0) {
    q.target_spec.class_filter =
        pick(rng_, {TargetClass::person, TargetClass::vehicle,
                    TargetClass::object});
  }
  q.result_spec = pick(rng_, {ResultSpec::event_notification,
                              ResultSpec::object_list,
                              ResultSpec::track_stream});
  q.qos = static_cast<std::uint8_t>(rng_.below(4));
  q.qod.spatial_m = rng_.uniform(1.0, 100.0);
  q.qod.temporal_ticks = 1 + rng_.below(20);
  q.periodicity = 1 + rng_.below(20);
  q.duration = 1 + rng_.below(500);
  q.purpose = name("purpose");
  return q;
}

SensingResponse Gen::sensing_response() {
  SensingResponse s;
  s.request_id = name("req");
  s.status = pick(rng_, {RespStatus::accepted, RespStatus::rejected,
                         RespStatus::failed});
  if (s.status == RespStatus::accepted) {
    s.result_channel = name("chan");
    s.policy_id = name("pol");
  } else {
    s.reason = pick(rng_, {Reason::unauthenticated, Reason::unauthorised,
                           Reason::policy_violation, Reason::no_consent,
                           Reason::resource_exhausted});
  }
  return s;
}

Detection Gen::detection() {
  Detection d;
  d.object_ref = name("obj");
  d.position = {rng_.uniform(-500.0, 500.0), rng_.uniform(-500.0, 500.0)};
  d.cls = pick(rng_, {TargetClass::person, TargetClass::vehicle,
                      TargetClass::object});
  d.confidence = rng_.uniform();
  return d;
}

Echo Gen::echo() {
  Echo e;
  e.range_m = rng_.uniform(0.0, 200.0);
  e.bearing_rad = rng_.uniform(-3.14, 3.14);
  e.strength = rng_.uniform(0.01, 1.0);
  e.raw_object_ref = name("t");
  return e;
}

Measurement Gen::measurement() {
  Measurement m;
  m.su_id = name("su");
  m.task_id = name("task");
  m.captured_at = rng_.below(1000);
  const auto n = rng_.below(5);
  for (std::uint64_t i = 0; i < n; ++i) m.echoes.push_back(echo());
  m.preprocessed = rng_.below(2) == 1;
  return m;
}

SensingResultItem Gen::result_item() {
  SensingResultItem item;
  item.session_id = name("task");
  item.produced_at = rng_.below(1000);
  const auto n = rng_.below(5);
  for (std::uint64_t i = 0; i < n; ++i) item.detections.push_back(detection());
  item.disclosure_level = DisclosureLevel::sanitised;
  return item;
}

DisclosureRecord Gen::disclosure_record() {
  DisclosureRecord d;
  d.recipient = principal(PrincipalKind::APP);
  d.data_description = "session=" + name("task") + ";subjects=" + name("p");
  d.purpose = name("purpose");
  d.obligations = "no onward transfer";
  d.timestamp = rng_.below(1000);
  d.applied_policy_id = name("pol");
  return d;
}

PolicyConstraints Gen::constraints() {
  PolicyConstraints c;
  if (rng_.below(2) == 0) c.app_ids.push_back(name("app"));
  c.target_classes = {TargetClass::person, TargetClass::vehicle,
                      TargetClass::object};
  if (rng_.below(3) == 0) c.target_classes.pop_back();
  c.allowed_area = Rect{{-1000.0, -1000.0}, {rng_.uniform(0.0, 1000.0),
                                             rng_.uniform(0.0, 1000.0)}};
  if (rng_.below(3) == 0) c.restricted_zones.push_back(rect());
  c.sensing_types = {ResultSpec::event_notification, ResultSpec::object_list,
                     ResultSpec::track_stream};
  if (rng_.below(3) == 0) c.sensing_types.pop_back();
  c.min_granularity_m = rng_.uniform(1.0, 50.0);
  c.min_granularity_ticks = 1 + rng_.below(10);
  c.required_disclosure = DisclosureLevel::sanitised;
  c.obligations = rng_.below(2) == 0 ? "" : name("obligation");
  c.transparency = pick(rng_, {TransparencyMode::none,
                               TransparencyMode::notify_after,
                               TransparencyMode::broadcast_during});
  c.retention_ticks = rng_.below(2) == 0 ? 0 : 100 + rng_.below(900);
  return c;
}

SensingPolicy Gen::sensing_policy() {
  SensingPolicy p;
  p.policy_id = name("policy");
  p.constraints = constraints();
  return p;
}

ConsentRecord Gen::consent(const std::string& purpose) {
  ConsentRecord c;
  c.subject = name("subject");
  c.purpose = purpose;
  c.scope = "all";
  c.status = rng_.below(4) == 0 ? ConsentStatus::revoked
                                : ConsentStatus::granted;
  c.updated_at = rng_.below(100);
  return c;
}

SessionPolicy Gen::session_policy() {
  SessionPolicy s;
  s.session_id = name("task");
  s.constraints = constraints();
  s.source_policy_ids = {name("pol"), name("pol")};
  s.excluded_subjects = {name("subject")};
  s.version = 1 + rng_.below(5);
  return s;
}

Payload Gen::payload_for(Flow f) {
  switch (payload_index_for(f)) {
    case 0:
      return sensing_request();
    case 1:
      return sensing_response();
    case 2: {
      PolicyQuery q;
      q.app_id = principal(PrincipalKind::APP);
      q.request = sensing_request();
      return q;
    }
    case 3: {
      PolicyDecision d;
      d.request_id = name("req");
      d.allow = rng_.below(2) == 1;
      if (!d.allow) {
        d.reason = Reason::policy_violation;
        d.violated = "granularity";
      } else {
        d.policy_id = name("pol");
        d.bundle = session_policy();
      }
      return d;
    }
    case 4:
      return disclosure_record();
    case 5: {
      NegotiationProposal p;
      p.session_id = name("task");
      p.requester = principal(PrincipalKind::SCF);
      p.granularity_m = rng_.uniform(1.0, 100.0);
      p.granularity_ticks = 1 + rng_.below(10);
      p.round = 1 + static_cast<std::uint32_t>(rng_.below(3));
      p.source_policy_ids = {name("pol")};
      p.purpose = name("purpose");
      return p;
    }
    case 6: {
      NegotiationReply r;
      r.session_id = name("task");
      r.verdict = pick(rng_, {NegotiationVerdict::accepted,
                              NegotiationVerdict::counter,
                              NegotiationVerdict::failed});
      if (r.verdict == NegotiationVerdict::accepted) r.policy = session_policy();
      if (r.verdict == NegotiationVerdict::counter) {
        r.counter_granularity_m = rng_.uniform(1.0, 100.0);
        r.counter_granularity_ticks = 1 + rng_.below(10);
      }
      return r;
    }
    case 7: {
      ProcessingRequest p;
      p.task_id = name("task");
      p.estimate = {"detections", 256 + rng_.below(1024), 1 + rng_.below(10)};
      p.priority = static_cast<std::uint8_t>(rng_.below(4));
      p.reporting = pick(rng_, {ReportingStyle::single, ReportingStyle::stream,
                                ReportingStyle::event});
      p.policy_id = name("pol");
      p.policy_version = 1 + rng_.below(5);
      p.schedule = {rng_.below(50), 1 + rng_.below(10), 1 + rng_.below(200)};
      return p;
    }
    case 8: {
      ProcessingResponse p;
      p.task_id = name("task");
      p.success = rng_.below(2) == 1;
      if (p.success) {
        p.session_id = name("task");
        p.ingress = EndpointRef{principal(PrincipalKind::SPF), rng_.below(100)};
        if (rng_.below(2) == 1) {
          p.egress =
              EndpointRef{principal(PrincipalKind::SPF), rng_.below(100)};
        }
      } else {
        p.reason = Reason::resource_exhausted;
      }
      return p;
    }
    case 9: {
      RadioSessionConfig c;
      c.task_id = name("task");
      c.area = CellRegion::rasterize(polygon(),
                                     Rect{{-2000, -2000}, {2000, 2000}}, 10.0);
      if (c.area.empty()) {
        c.area = CellRegion{10.0, {CellRegion::Cell{0, 0}}};
      }
      c.schedule = {rng_.below(50), 1 + rng_.below(10), 1 + rng_.below(200)};
      c.granularity_m = rng_.uniform(1.0, 100.0);
      c.granularity_ticks = 1 + rng_.below(10);
      c.ingress = EndpointRef{principal(PrincipalKind::SPF), rng_.below(100)};
      c.purpose = name("purpose");
      c.transparency_expected = rng_.below(2) == 1;
      return c;
    }
    case 10: {
      TransparencyConfig c;
      c.task_id = name("task");
      c.mode = pick(rng_, {TransparencyMode::none, TransparencyMode::notify_after,
                           TransparencyMode::broadcast_during});
      return c;
    }
    case 11: {
      ConfigAck a;
      a.task_id = name("task");
      a.su_id = name("su");
      a.accepted = rng_.below(2) == 1;
      if (!a.accepted) a.reason = Reason::no_consent;
      return a;
    }
    case 12:
      return measurement();
    case 13:
      return result_item();
    case 14: {
      OrchestrationCommand c;
      c.verb = pick(rng_, {OrchVerb::start, OrchVerb::modify, OrchVerb::end});
      c.session_id = name("task");
      if (c.verb == OrchVerb::modify) c.new_policy_version = 2 + rng_.below(5);
      return c;
    }
    case 15: {
      TransparencyExchange e;
      e.is_query = rng_.below(2) == 1;
      e.subject = name("subject");
      if (!e.is_query) {
        const auto n = rng_.below(3);
        for (std::uint64_t i = 0; i < n; ++i) {
          e.records.push_back(disclosure_record());
        }
      }
      return e;
    }
    case 16: {
      TransparencyNotice n;
      n.task_id = name("task");
      n.su_id = name("su");
      n.mode = TransparencyMode::broadcast_during;
      const auto k = rng_.below(4);
      for (std::uint64_t i = 0; i < k; ++i) {
        n.reached_targets.push_back(name("t"));
      }
      return n;
    }
    default:
      return sensing_request();
  }
}

Envelope Gen::envelope(Flow f) {
  Envelope e;
  e.msg_id = ++counter_;
  e.interface = f;
  e.sender = any_principal();
  e.receiver = any_principal();
  e.sent_at = rng_.below(1000);
  if (rng_.below(2) == 1) e.credentials = token();
  e.payload = payload_for(f);
  if (rng_.below(2) == 1) {
    SealTag s;
    s.integrity = rng_.next_u64();
    s.confidential = rng_.below(2) == 1;
    s.sequence = rng_.below(1000);
    e.seal = s;
  }
  return e;
}

Envelope Gen::any_envelope() {
  return envelope(static_cast<Flow>(rng_.below(kFlowCount)));
}

}  // namespace jcas::testkit
