#include "jcas/messages.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "jcas/codec.hpp"

namespace jcas {

using codec::Reader;
using codec::Writer;

namespace {

// ---- field caps used by schema validation (anti-oversize) ----
constexpr std::size_t kMaxString = 4096;
constexpr std::size_t kMaxListItems = 10000;
constexpr std::size_t kMaxVertices = 64;
constexpr std::size_t kMaxCells = 100000;
constexpr Tick kMaxTicks = 1000000;

template <typename E>
E checked_enum(Reader& r, std::uint8_t max, const char* what) {
  std::uint8_t v = r.u8();
  if (v > max) r.fail(std::string("bad enum value for ") + what);
  return static_cast<E>(v);
}

// ---- encoders / decoders for building blocks ----

void w_vec2(Writer& w, Vec2 v) {
  w.f64(v.x);
  w.f64(v.y);
}
Vec2 r_vec2(Reader& r) {
  Vec2 v;
  v.x = r.f64();
  v.y = r.f64();
  return v;
}

void w_rect(Writer& w, const Rect& r) {
  w_vec2(w, r.lo);
  w_vec2(w, r.hi);
}
Rect r_rect(Reader& r) {
  Rect out;
  out.lo = r_vec2(r);
  out.hi = r_vec2(r);
  return out;
}

void w_polygon(Writer& w, const ConvexPolygon& p) {
  w.list(p.vertices(), w_vec2);
}
ConvexPolygon r_polygon(Reader& r) {
  return ConvexPolygon{r.list<Vec2>([](Reader& rr) { return r_vec2(rr); })};
}

void w_cells(Writer& w, const CellRegion& c) {
  w.f64(c.granularity());
  w.list(c.cells(), [](Writer& ww, const CellRegion::Cell& cell) {
    ww.i64(cell.ix);
    ww.i64(cell.iy);
  });
}
CellRegion r_cells(Reader& r) {
  double g = r.f64();
  auto cells = r.list<CellRegion::Cell>([](Reader& rr) {
    CellRegion::Cell c;
    c.ix = rr.i64();
    c.iy = rr.i64();
    return c;
  });
  return CellRegion{g, std::move(cells)};
}

void w_principal(Writer& w, const PrincipalId& p) {
  w.u8(static_cast<std::uint8_t>(p.kind));
  w.str(p.name);
  w.u8(static_cast<std::uint8_t>(p.trust_domain));
}
PrincipalId r_principal(Reader& r) {
  PrincipalId p;
  p.kind = checked_enum<PrincipalKind>(r, 10, "PrincipalKind");
  p.name = r.str();
  p.trust_domain = checked_enum<TrustDomain>(r, 5, "TrustDomain");
  return p;
}

void w_token(Writer& w, const Token& t) {
  w_principal(w, t.principal);
  w.u64(t.issued_at);
  w.u64(t.expiry);
  w.u64(t.nonce);
  w.u64(t.tag);
}
Token r_token(Reader& r) {
  Token t;
  t.principal = r_principal(r);
  t.issued_at = r.u64();
  t.expiry = r.u64();
  t.nonce = r.u64();
  t.tag = r.u64();
  return t;
}

void w_seal(Writer& w, const SealTag& s) {
  w.u64(s.integrity);
  w.boolean(s.confidential);
  w.u64(s.sequence);
}
SealTag r_seal(Reader& r) {
  SealTag s;
  s.integrity = r.u64();
  s.confidential = r.boolean();
  s.sequence = r.u64();
  return s;
}

void w_schedule(Writer& w, const Schedule& s) {
  w.u64(s.start);
  w.u64(s.period);
  w.u64(s.duration);
}
Schedule r_schedule(Reader& r) {
  Schedule s;
  s.start = r.u64();
  s.period = r.u64();
  s.duration = r.u64();
  return s;
}

void w_endpoint(Writer& w, const EndpointRef& e) {
  w_principal(w, e.node);
  w.u64(e.port);
}
EndpointRef r_endpoint(Reader& r) {
  EndpointRef e;
  e.node = r_principal(r);
  e.port = r.u64();
  return e;
}

void w_constraints(Writer& w, const PolicyConstraints& c) {
  w.list(c.app_ids, [](Writer& ww, const std::string& s) { ww.str(s); });
  w.list(c.target_classes, [](Writer& ww, TargetClass t) {
    ww.u8(static_cast<std::uint8_t>(t));
  });
  w_rect(w, c.allowed_area);
  w.list(c.restricted_zones, w_rect);
  w.list(c.sensing_types, [](Writer& ww, ResultSpec t) {
    ww.u8(static_cast<std::uint8_t>(t));
  });
  w.f64(c.min_granularity_m);
  w.u64(c.min_granularity_ticks);
  w.u8(static_cast<std::uint8_t>(c.required_disclosure));
  w.str(c.obligations);
  w.u8(static_cast<std::uint8_t>(c.transparency));
  w.u64(c.retention_ticks);
}
PolicyConstraints r_constraints(Reader& r) {
  PolicyConstraints c;
  c.app_ids = r.list<std::string>([](Reader& rr) { return rr.str(); });
  c.target_classes = r.list<TargetClass>([](Reader& rr) {
    return checked_enum<TargetClass>(rr, 2, "TargetClass");
  });
  c.allowed_area = r_rect(r);
  c.restricted_zones = r.list<Rect>([](Reader& rr) { return r_rect(rr); });
  c.sensing_types = r.list<ResultSpec>([](Reader& rr) {
    return checked_enum<ResultSpec>(rr, 2, "ResultSpec");
  });
  c.min_granularity_m = r.f64();
  c.min_granularity_ticks = r.u64();
  c.required_disclosure =
      checked_enum<DisclosureLevel>(r, 1, "DisclosureLevel");
  c.obligations = r.str();
  c.transparency = checked_enum<TransparencyMode>(r, 2, "TransparencyMode");
  c.retention_ticks = r.u64();
  return c;
}

void w_session_policy(Writer& w, const SessionPolicy& s) {
  w.str(s.session_id);
  w_constraints(w, s.constraints);
  w.list(s.source_policy_ids,
         [](Writer& ww, const std::string& v) { ww.str(v); });
  w.list(s.excluded_subjects,
         [](Writer& ww, const std::string& v) { ww.str(v); });
  w.u64(s.version);
}
SessionPolicy r_session_policy(Reader& r) {
  SessionPolicy s;
  s.session_id = r.str();
  s.constraints = r_constraints(r);
  s.source_policy_ids =
      r.list<std::string>([](Reader& rr) { return rr.str(); });
  s.excluded_subjects =
      r.list<std::string>([](Reader& rr) { return rr.str(); });
  s.version = r.u64();
  return s;
}

void w_request(Writer& w, const SensingRequest& q) {
  w.str(q.request_id);
  w_principal(w, q.app_id);
  w_polygon(w, q.target_spec.area);
  w.opt(q.target_spec.class_filter, [](Writer& ww, TargetClass t) {
    ww.u8(static_cast<std::uint8_t>(t));
  });
  w.u8(static_cast<std::uint8_t>(q.result_spec));
  w.u8(q.qos);
  w.f64(q.qod.spatial_m);
  w.u64(q.qod.temporal_ticks);
  w.u64(q.periodicity);
  w.u64(q.duration);
  w.str(q.purpose);
  w.str(q.policy_ref);
}
SensingRequest r_request(Reader& r) {
  SensingRequest q;
  q.request_id = r.str();
  q.app_id = r_principal(r);
  q.target_spec.area = r_polygon(r);
  q.target_spec.class_filter = r.opt<TargetClass>([](Reader& rr) {
    return checked_enum<TargetClass>(rr, 2, "TargetClass");
  });
  q.result_spec = checked_enum<ResultSpec>(r, 2, "ResultSpec");
  q.qos = r.u8();
  q.qod.spatial_m = r.f64();
  q.qod.temporal_ticks = r.u64();
  q.periodicity = r.u64();
  q.duration = r.u64();
  q.purpose = r.str();
  q.policy_ref = r.str();
  return q;
}

void w_response(Writer& w, const SensingResponse& s) {
  w.str(s.request_id);
  w.u8(static_cast<std::uint8_t>(s.status));
  w.opt(s.reason,
        [](Writer& ww, Reason v) { ww.u8(static_cast<std::uint8_t>(v)); });
  w.opt(s.result_channel,
        [](Writer& ww, const std::string& v) { ww.str(v); });
  w.opt(s.policy_id, [](Writer& ww, const std::string& v) { ww.str(v); });
}
SensingResponse r_response(Reader& r) {
  SensingResponse s;
  s.request_id = r.str();
  s.status = checked_enum<RespStatus>(r, 2, "RespStatus");
  s.reason = r.opt<Reason>(
      [](Reader& rr) { return checked_enum<Reason>(rr, 4, "Reason"); });
  s.result_channel = r.opt<std::string>([](Reader& rr) { return rr.str(); });
  s.policy_id = r.opt<std::string>([](Reader& rr) { return rr.str(); });
  return s;
}

void w_record(Writer& w, const DisclosureRecord& d) {
  w_principal(w, d.recipient);
  w.str(d.data_description);
  w.str(d.purpose);
  w.str(d.obligations);
  w.u64(d.timestamp);
  w.str(d.applied_policy_id);
}
DisclosureRecord r_record(Reader& r) {
  DisclosureRecord d;
  d.recipient = r_principal(r);
  d.data_description = r.str();
  d.purpose = r.str();
  d.obligations = r.str();
  d.timestamp = r.u64();
  d.applied_policy_id = r.str();
  return d;
}

void w_echo(Writer& w, const Echo& e) {
  w.f64(e.range_m);
  w.f64(e.bearing_rad);
  w.f64(e.strength);
  w.str(e.raw_object_ref);
}
Echo r_echo(Reader& r) {
  Echo e;
  e.range_m = r.f64();
  e.bearing_rad = r.f64();
  e.strength = r.f64();
  e.raw_object_ref = r.str();
  return e;
}

void w_detection(Writer& w, const Detection& d) {
  w.str(d.object_ref);
  w_vec2(w, d.position);
  w.u8(static_cast<std::uint8_t>(d.cls));
  w.f64(d.confidence);
}
Detection r_detection(Reader& r) {
  Detection d;
  d.object_ref = r.str();
  d.position = r_vec2(r);
  d.cls = checked_enum<TargetClass>(r, 2, "TargetClass");
  d.confidence = r.f64();
  return d;
}

struct PayloadWriter {
  Writer& w;
  void operator()(const SensingRequest& p) { w_request(w, p); }
  void operator()(const SensingResponse& p) { w_response(w, p); }
  void operator()(const PolicyQuery& p) {
    w_principal(w, p.app_id);
    w_request(w, p.request);
  }
  void operator()(const PolicyDecision& p) {
    w.str(p.request_id);
    w.boolean(p.allow);
    w.opt(p.reason,
          [](Writer& ww, Reason v) { ww.u8(static_cast<std::uint8_t>(v)); });
    w.str(p.violated);
    w.str(p.policy_id);
    w.opt(p.bundle, [](Writer& ww, const SessionPolicy& v) {
      w_session_policy(ww, v);
    });
    w.boolean(p.unsolicited);
  }
  void operator()(const DisclosureRecord& p) { w_record(w, p); }
  void operator()(const NegotiationProposal& p) {
    w.str(p.session_id);
    w_principal(w, p.requester);
    w.f64(p.granularity_m);
    w.u64(p.granularity_ticks);
    w.u32(p.round);
    w.list(p.source_policy_ids,
           [](Writer& ww, const std::string& v) { ww.str(v); });
    w.str(p.purpose);
  }
  void operator()(const NegotiationReply& p) {
    w.str(p.session_id);
    w.u8(static_cast<std::uint8_t>(p.verdict));
    w.opt(p.policy, [](Writer& ww, const SessionPolicy& v) {
      w_session_policy(ww, v);
    });
    w.f64(p.counter_granularity_m);
    w.u64(p.counter_granularity_ticks);
    w.u32(p.round);
    w.boolean(p.unsolicited);
  }
  void operator()(const ProcessingRequest& p) {
    w.str(p.task_id);
    w.str(p.estimate.data_type);
    w.u64(p.estimate.bytes_per_report);
    w.u64(p.estimate.period_ticks);
    w.u8(p.priority);
    w.u8(static_cast<std::uint8_t>(p.reporting));
    w.str(p.policy_id);
    w.u64(p.policy_version);
    w_schedule(w, p.schedule);
  }
  void operator()(const ProcessingResponse& p) {
    w.str(p.task_id);
    w.boolean(p.success);
    w.opt(p.reason,
          [](Writer& ww, Reason v) { ww.u8(static_cast<std::uint8_t>(v)); });
    w.str(p.session_id);
    w.opt(p.ingress,
          [](Writer& ww, const EndpointRef& v) { w_endpoint(ww, v); });
    w.opt(p.egress,
          [](Writer& ww, const EndpointRef& v) { w_endpoint(ww, v); });
  }
  void operator()(const RadioSessionConfig& p) {
    w.str(p.task_id);
    w_cells(w, p.area);
    w_schedule(w, p.schedule);
    w.f64(p.granularity_m);
    w.u64(p.granularity_ticks);
    w_endpoint(w, p.ingress);
    w.str(p.purpose);
    w.boolean(p.transparency_expected);
  }
  void operator()(const TransparencyConfig& p) {
    w.str(p.task_id);
    w.u8(static_cast<std::uint8_t>(p.mode));
  }
  void operator()(const ConfigAck& p) {
    w.str(p.task_id);
    w.str(p.su_id);
    w.boolean(p.accepted);
    w.opt(p.reason,
          [](Writer& ww, Reason v) { ww.u8(static_cast<std::uint8_t>(v)); });
  }
  void operator()(const Measurement& p) {
    w.str(p.su_id);
    w.str(p.task_id);
    w.u64(p.captured_at);
    w.list(p.echoes, w_echo);
    w.boolean(p.preprocessed);
  }
  void operator()(const SensingResultItem& p) {
    w.str(p.session_id);
    w.u64(p.produced_at);
    w.list(p.detections, w_detection);
    w.u8(static_cast<std::uint8_t>(p.disclosure_level));
  }
  void operator()(const OrchestrationCommand& p) {
    w.u8(static_cast<std::uint8_t>(p.verb));
    w.str(p.session_id);
    w.u64(p.new_policy_version);
  }
  void operator()(const TransparencyExchange& p) {
    w.boolean(p.is_query);
    w.str(p.subject);
    w.list(p.records, w_record);
  }
  void operator()(const TransparencyNotice& p) {
    w.str(p.task_id);
    w.str(p.su_id);
    w.u8(static_cast<std::uint8_t>(p.mode));
    w.list(p.reached_targets,
           [](Writer& ww, const std::string& v) { ww.str(v); });
  }
};

Payload read_payload(Reader& r, std::size_t index) {
  switch (index) {
    case 0:
      return r_request(r);
    case 1:
      return r_response(r);
    case 2: {
      PolicyQuery p;
      p.app_id = r_principal(r);
      p.request = r_request(r);
      return p;
    }
    case 3: {
      PolicyDecision p;
      p.request_id = r.str();
      p.allow = r.boolean();
      p.reason = r.opt<Reason>(
          [](Reader& rr) { return checked_enum<Reason>(rr, 4, "Reason"); });
      p.violated = r.str();
      p.policy_id = r.str();
      p.bundle = r.opt<SessionPolicy>(
          [](Reader& rr) { return r_session_policy(rr); });
      p.unsolicited = r.boolean();
      return p;
    }
    case 4:
      return r_record(r);
    case 5: {
      NegotiationProposal p;
      p.session_id = r.str();
      p.requester = r_principal(r);
      p.granularity_m = r.f64();
      p.granularity_ticks = r.u64();
      p.round = r.u32();
      p.source_policy_ids =
          r.list<std::string>([](Reader& rr) { return rr.str(); });
      p.purpose = r.str();
      return p;
    }
    case 6: {
      NegotiationReply p;
      p.session_id = r.str();
      p.verdict = checked_enum<NegotiationVerdict>(r, 2, "NegotiationVerdict");
      p.policy = r.opt<SessionPolicy>(
          [](Reader& rr) { return r_session_policy(rr); });
      p.counter_granularity_m = r.f64();
      p.counter_granularity_ticks = r.u64();
      p.round = r.u32();
      p.unsolicited = r.boolean();
      return p;
    }
    case 7: {
      ProcessingRequest p;
      p.task_id = r.str();
      p.estimate.data_type = r.str();
      p.estimate.bytes_per_report = r.u64();
      p.estimate.period_ticks = r.u64();
      p.priority = r.u8();
      p.reporting = checked_enum<ReportingStyle>(r, 2, "ReportingStyle");
      p.policy_id = r.str();
      p.policy_version = r.u64();
      p.schedule = r_schedule(r);
      return p;
    }
    case 8: {
      ProcessingResponse p;
      p.task_id = r.str();
      p.success = r.boolean();
      p.reason = r.opt<Reason>(
          [](Reader& rr) { return checked_enum<Reason>(rr, 4, "Reason"); });
      p.session_id = r.str();
      p.ingress =
          r.opt<EndpointRef>([](Reader& rr) { return r_endpoint(rr); });
      p.egress = r.opt<EndpointRef>([](Reader& rr) { return r_endpoint(rr); });
      return p;
    }
    case 9: {
      RadioSessionConfig p;
      p.task_id = r.str();
      p.area = r_cells(r);
      p.schedule = r_schedule(r);
      p.granularity_m = r.f64();
      p.granularity_ticks = r.u64();
      p.ingress = r_endpoint(r);
      p.purpose = r.str();
      p.transparency_expected = r.boolean();
      return p;
    }
    case 10: {
      TransparencyConfig p;
      p.task_id = r.str();
      p.mode = checked_enum<TransparencyMode>(r, 2, "TransparencyMode");
      return p;
    }
    case 11: {
      ConfigAck p;
      p.task_id = r.str();
      p.su_id = r.str();
      p.accepted = r.boolean();
      p.reason = r.opt<Reason>(
          [](Reader& rr) { return checked_enum<Reason>(rr, 4, "Reason"); });
      return p;
    }
    case 12: {
      Measurement p;
      p.su_id = r.str();
      p.task_id = r.str();
      p.captured_at = r.u64();
      p.echoes = r.list<Echo>([](Reader& rr) { return r_echo(rr); });
      p.preprocessed = r.boolean();
      return p;
    }
    case 13: {
      SensingResultItem p;
      p.session_id = r.str();
      p.produced_at = r.u64();
      p.detections =
          r.list<Detection>([](Reader& rr) { return r_detection(rr); });
      p.disclosure_level =
          checked_enum<DisclosureLevel>(r, 1, "DisclosureLevel");
      return p;
    }
    case 14: {
      OrchestrationCommand p;
      p.verb = checked_enum<OrchVerb>(r, 2, "OrchVerb");
      p.session_id = r.str();
      p.new_policy_version = r.u64();
      return p;
    }
    case 15: {
      TransparencyExchange p;
      p.is_query = r.boolean();
      p.subject = r.str();
      p.records =
          r.list<DisclosureRecord>([](Reader& rr) { return r_record(rr); });
      return p;
    }
    case 16: {
      TransparencyNotice p;
      p.task_id = r.str();
      p.su_id = r.str();
      p.mode = checked_enum<TransparencyMode>(r, 2, "TransparencyMode");
      p.reached_targets =
          r.list<std::string>([](Reader& rr) { return rr.str(); });
      return p;
    }
    default:
      r.fail("unknown payload tag");
  }
}

// Exhaustive flow -> payload variant index table.
constexpr std::array<std::size_t, kFlowCount> kFlowPayload = []() {
  std::array<std::size_t, kFlowCount> t{};
  auto set = [&t](Flow f, std::size_t idx) {
    t[static_cast<std::size_t>(f)] = idx;
  };
  set(Flow::SENS_REQ, 0);
  set(Flow::SENS_RESPONSE, 1);
  set(Flow::SENS_POL_REQ, 2);
  set(Flow::SENS_POL_RESP, 3);
  set(Flow::DISCLOSURE_LOG, 4);
  set(Flow::JCAS_API_REQ, 0);
  set(Flow::JCAS_API_RESP, 1);
  set(Flow::POL_REQ, 5);
  set(Flow::POL_RESP, 6);
  set(Flow::PROC_REQ, 7);
  set(Flow::PROC_RESP, 8);
  set(Flow::CONFIG_RADIO_SESSION, 9);
  set(Flow::CONFIG_TRANSPARENCY, 10);
  set(Flow::CONFIG_RADIO_ACK, 11);
  set(Flow::TX_DATA, 12);
  set(Flow::RX_DATA, 12);
  set(Flow::RESULT_STREAM, 13);
  set(Flow::RECORD_STREAM, 13);
  set(Flow::INTERPROCESS_STREAM, 13);
  set(Flow::PROCESSING_ORCH_FLOW, 14);
  set(Flow::TRANSPARENCY_DISCLOSURE, 15);
  set(Flow::TRANSPARENCY_BROADCAST, 16);
  return t;
}();

static_assert(kFlowPayload.size() == kFlowCount,
              "every flow must map to exactly one payload type");
static_assert(std::variant_size_v<Payload> == 17,
              "payload variant drifted from the flow table");

void check_string(std::vector<std::string>& v, std::string_view field,
                  const std::string& s) {
  if (s.size() > kMaxString) {
    v.push_back(std::string(field) + " exceeds maximum length");
  }
}

struct PayloadValidator {
  std::vector<std::string>& v;

  void operator()(const SensingRequest& p) {
    check_string(v, "request_id", p.request_id);
    check_string(v, "purpose", p.purpose);
    if (!p.target_spec.area.valid()) {
      v.push_back("target_spec area non-degenerate");
    }
    if (p.target_spec.area.vertices().size() > kMaxVertices) {
      v.push_back("target_spec area has too many vertices");
    }
    if (!(p.qod.spatial_m > 0.0) || !std::isfinite(p.qod.spatial_m)) {
      v.push_back("granularity > 0");
    }
    if (p.qod.temporal_ticks == 0) v.push_back("temporal granularity > 0");
    if (p.duration == 0) v.push_back("duration > 0");
    if (p.periodicity == 0) v.push_back("periodicity > 0");
    if (p.qos > 3) v.push_back("qos priority in 0..3");
    if (p.duration > kMaxTicks) v.push_back("duration exceeds maximum");
    if (p.periodicity > kMaxTicks) v.push_back("periodicity exceeds maximum");
  }
  void operator()(const SensingResponse& p) {
    if (p.status == RespStatus::accepted && !p.result_channel) {
      v.push_back("accepted response requires result_channel");
    }
    if (p.status != RespStatus::accepted && !p.reason) {
      v.push_back("rejected/failed response requires reason");
    }
  }
  void operator()(const PolicyQuery& p) { (*this)(p.request); }
  void operator()(const PolicyDecision& p) {
    if (p.bundle) check_constraints(p.bundle->constraints);
  }
  void operator()(const DisclosureRecord& p) {
    if (p.recipient.name.empty()) v.push_back("recipient non-empty");
    if (p.data_description.empty()) v.push_back("data_description non-empty");
    if (p.purpose.empty()) v.push_back("purpose non-empty");
    if (p.obligations.empty()) v.push_back("obligations non-empty");
    if (p.applied_policy_id.empty()) {
      v.push_back("applied_policy_id non-empty");
    }
    check_string(v, "data_description", p.data_description);
  }
  void operator()(const NegotiationProposal& p) {
    if (!(p.granularity_m > 0.0) || !std::isfinite(p.granularity_m)) {
      v.push_back("granularity > 0");
    }
    if (p.granularity_ticks == 0) v.push_back("temporal granularity > 0");
  }
  void operator()(const NegotiationReply& p) {
    if (p.policy) check_constraints(p.policy->constraints);
  }
  void operator()(const ProcessingRequest& p) {
    if (p.estimate.period_ticks == 0) v.push_back("estimate period > 0");
    if (p.schedule.period == 0) v.push_back("schedule period > 0");
    if (p.schedule.duration == 0) v.push_back("schedule duration > 0");
    if (p.schedule.duration > kMaxTicks) {
      v.push_back("schedule duration exceeds maximum");
    }
    if (p.priority > 3) v.push_back("priority in 0..3");
  }
  void operator()(const ProcessingResponse& p) {
    if (p.success && !p.ingress) {
      v.push_back("successful PROC_RESP requires ingress point");
    }
    if (!p.success && !p.reason) v.push_back("failed PROC_RESP requires reason");
  }
  void operator()(const RadioSessionConfig& p) {
    if (!(p.granularity_m > 0.0) || !std::isfinite(p.granularity_m)) {
      v.push_back("granularity > 0");
    }
    if (p.schedule.period == 0) v.push_back("schedule period > 0");
    if (p.schedule.duration == 0) v.push_back("schedule duration > 0");
    if (p.area.cells().size() > kMaxCells) v.push_back("area too large");
    if (p.area.empty()) v.push_back("area non-empty");
  }
  void operator()(const TransparencyConfig&) {}
  void operator()(const ConfigAck& p) {
    if (!p.accepted && !p.reason) v.push_back("declined ack requires reason");
  }
  void operator()(const Measurement& p) {
    if (p.echoes.size() > kMaxListItems) v.push_back("too many echoes");
    for (const Echo& e : p.echoes) {
      if (e.range_m < 0.0 || !std::isfinite(e.range_m)) {
        v.push_back("echo range >= 0");
        break;
      }
    }
    for (const Echo& e : p.echoes) {
      if (!(e.strength > 0.0) || e.strength > 1.0) {
        v.push_back("echo strength in (0, 1]");
        break;
      }
    }
  }
  void operator()(const SensingResultItem& p) {
    if (p.detections.size() > kMaxListItems) v.push_back("too many detections");
    for (const Detection& d : p.detections) {
      if (d.confidence < 0.0 || d.confidence > 1.0) {
        v.push_back("confidence in [0, 1]");
        break;
      }
    }
  }
  void operator()(const OrchestrationCommand&) {}
  void operator()(const TransparencyExchange& p) {
    check_string(v, "subject", p.subject);
  }
  void operator()(const TransparencyNotice& p) {
    if (p.reached_targets.size() > kMaxListItems) {
      v.push_back("too many reached targets");
    }
  }

  void check_constraints(const PolicyConstraints& c) {
    if (!(c.min_granularity_m > 0.0)) v.push_back("granularity > 0");
    if (c.min_granularity_ticks == 0) v.push_back("temporal granularity > 0");
    if (!c.allowed_area.valid()) v.push_back("allowed_area valid geometry");
    for (const Rect& z : c.restricted_zones) {
      if (!z.valid()) {
        v.push_back("restricted zone valid geometry");
        break;
      }
    }
  }
};

}  // namespace

std::size_t payload_index_for(Flow f) {
  return kFlowPayload[static_cast<std::size_t>(f)];
}

bool payload_matches(Flow f, const Payload& p) {
  return p.index() == payload_index_for(f);
}

ValidationResult validate(const Envelope& e) {
  ValidationResult out;
  if (!domain_consistent(e.sender)) {
    out.violations.push_back("sender kind/trust_domain mismatch");
  }
  if (!domain_consistent(e.receiver)) {
    out.violations.push_back("receiver kind/trust_domain mismatch");
  }
  if (e.sender.name.empty()) out.violations.push_back("sender name non-empty");
  if (e.receiver.name.empty()) {
    out.violations.push_back("receiver name non-empty");
  }
  if (!payload_matches(e.interface, e.payload)) {
    out.violations.push_back("interface/payload mismatch");
    return out;  // payload checks below assume the right type
  }
  PayloadValidator pv{out.violations};
  std::visit(pv, e.payload);
  // Stream releases must already be sanitised.
  if (e.interface == Flow::RESULT_STREAM || e.interface == Flow::RECORD_STREAM) {
    const auto& item = std::get<SensingResultItem>(e.payload);
    if (item.disclosure_level != DisclosureLevel::sanitised) {
      out.violations.push_back("stream items must be sanitised");
    }
  }
  return out;
}

std::string encode_payload(const Payload& p) {
  Writer w;
  std::visit(PayloadWriter{w}, p);
  return w.take();
}

std::string encode_tagged_payload(const Payload& p) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(p.index()));
  std::visit(PayloadWriter{w}, p);
  return w.take();
}

std::optional<Payload> decode_tagged_payload(std::string_view bytes) {
  try {
    Reader r(bytes);
    std::uint8_t tag = r.u8();
    if (tag >= std::variant_size_v<Payload>) return std::nullopt;
    Payload p = read_payload(r, tag);
    r.expect_done();
    return p;
  } catch (const codec::DecodeError&) {
    return std::nullopt;
  }
}

std::string encode_record(const SensingPolicy& p) {
  Writer w;
  w.str(p.policy_id);
  w_constraints(w, p.constraints);
  return w.take();
}

SensingPolicy decode_sensing_policy(std::string_view bytes) {
  Reader r(bytes);
  SensingPolicy p;
  p.policy_id = r.str();
  p.constraints = r_constraints(r);
  r.expect_done();
  return p;
}

std::string encode_record(const ConsentRecord& c) {
  Writer w;
  w.str(c.subject);
  w.str(c.purpose);
  w.str(c.scope);
  w.u8(static_cast<std::uint8_t>(c.status));
  w.u64(c.updated_at);
  return w.take();
}

ConsentRecord decode_consent_record(std::string_view bytes) {
  Reader r(bytes);
  ConsentRecord c;
  c.subject = r.str();
  c.purpose = r.str();
  c.scope = r.str();
  c.status = checked_enum<ConsentStatus>(r, 1, "ConsentStatus");
  c.updated_at = r.u64();
  r.expect_done();
  return c;
}

std::string encode_record(const SessionPolicy& s) {
  Writer w;
  w_session_policy(w, s);
  return w.take();
}

SessionPolicy decode_session_policy(std::string_view bytes) {
  Reader r(bytes);
  SessionPolicy s = r_session_policy(r);
  r.expect_done();
  return s;
}

std::string encode(const Envelope& e) {
  Writer w;
  w.u64(e.msg_id);
  w.u8(static_cast<std::uint8_t>(e.interface));
  w_principal(w, e.sender);
  w_principal(w, e.receiver);
  w.u64(e.sent_at);
  w.opt(e.credentials, [](Writer& ww, const Token& t) { w_token(ww, t); });
  w.u8(static_cast<std::uint8_t>(e.payload.index()));
  std::visit(PayloadWriter{w}, e.payload);
  w.opt(e.seal, [](Writer& ww, const SealTag& s) { w_seal(ww, s); });
  return w.take();
}

Envelope decode(std::string_view bytes) {
  Reader r(bytes);
  Envelope e;
  e.msg_id = r.u64();
  e.interface = checked_enum<Flow>(r, kFlowCount - 1, "Flow");
  e.sender = r_principal(r);
  e.receiver = r_principal(r);
  e.sent_at = r.u64();
  e.credentials = r.opt<Token>([](Reader& rr) { return r_token(rr); });
  std::uint8_t tag = r.u8();
  if (tag >= std::variant_size_v<Payload>) r.fail("unknown payload tag");
  e.payload = read_payload(r, tag);
  e.seal = r.opt<SealTag>([](Reader& rr) { return r_seal(rr); });
  r.expect_done();
  return e;
}

std::string to_string(const Payload& p) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SensingRequest>) {
          os << "SensingRequest{" << v.request_id << "}";
        } else if constexpr (std::is_same_v<T, SensingResponse>) {
          os << "SensingResponse{" << v.request_id << ","
             << to_string(v.status) << "}";
        } else if constexpr (std::is_same_v<T, SensingResultItem>) {
          os << "ResultItem{" << v.session_id << ",n=" << v.detections.size()
             << "}";
        } else if constexpr (std::is_same_v<T, Measurement>) {
          os << "Measurement{" << v.su_id << "," << v.task_id
             << ",n=" << v.echoes.size() << "}";
        } else {
          os << "payload";
        }
      },
      p);
  return os.str();
}

std::string_view to_string(TargetClass c) {
  switch (c) {
    case TargetClass::person:
      return "person";
    case TargetClass::vehicle:
      return "vehicle";
    case TargetClass::object:
      return "object";
  }
  return "?";
}

std::string_view to_string(ResultSpec r) {
  switch (r) {
    case ResultSpec::event_notification:
      return "event_notification";
    case ResultSpec::object_list:
      return "object_list";
    case ResultSpec::track_stream:
      return "track_stream";
  }
  return "?";
}

std::string_view to_string(RespStatus s) {
  switch (s) {
    case RespStatus::accepted:
      return "accepted";
    case RespStatus::rejected:
      return "rejected";
    case RespStatus::failed:
      return "failed";
  }
  return "?";
}

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::unauthenticated:
      return "unauthenticated";
    case Reason::unauthorised:
      return "unauthorised";
    case Reason::policy_violation:
      return "policy_violation";
    case Reason::no_consent:
      return "no_consent";
    case Reason::resource_exhausted:
      return "resource_exhausted";
  }
  return "?";
}

std::string_view to_string(TransparencyMode m) {
  switch (m) {
    case TransparencyMode::none:
      return "none";
    case TransparencyMode::notify_after:
      return "notify_after";
    case TransparencyMode::broadcast_during:
      return "broadcast_during";
  }
  return "?";
}

std::optional<TargetClass> target_class_from_string(std::string_view s) {
  if (s == "person") return TargetClass::person;
  if (s == "vehicle") return TargetClass::vehicle;
  if (s == "object") return TargetClass::object;
  return std::nullopt;
}

std::optional<ResultSpec> result_spec_from_string(std::string_view s) {
  if (s == "event_notification") return ResultSpec::event_notification;
  if (s == "object_list") return ResultSpec::object_list;
  if (s == "track_stream") return ResultSpec::track_stream;
  return std::nullopt;
}

std::optional<TransparencyMode> transparency_mode_from_string(
    std::string_view s) {
  if (s == "none") return TransparencyMode::none;
  if (s == "notify_after") return TransparencyMode::notify_after;
  if (s == "broadcast_during") return TransparencyMode::broadcast_during;
  return std::nullopt;
}

}  // namespace jcas
