#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jcas/geometry.hpp"
#include "jcas/ids.hpp"

namespace jcas {

// ---------------------------------------------------------------------------
// Credentials and seals
// ---------------------------------------------------------------------------

struct Token {
  PrincipalId principal;
  Tick issued_at{0};
  Tick expiry{0};
  std::uint64_t nonce{0};
  std::uint64_t tag{0};  // keyed tag over the fields above

  bool operator==(const Token&) const = default;
};

struct SealTag {
  std::uint64_t integrity{0};  // keyed tag over canonical payload+msg_id+sender
  bool confidential{false};    // payload opaque to non-keyholders
  std::uint64_t sequence{0};   // per-channel sequence for the replay window

  bool operator==(const SealTag&) const = default;
};

// ---------------------------------------------------------------------------
// Payload building blocks
// ---------------------------------------------------------------------------

enum class TargetClass : std::uint8_t { person, vehicle, object };

enum class ResultSpec : std::uint8_t {
  event_notification,
  object_list,
  track_stream,
};

enum class RespStatus : std::uint8_t { accepted, rejected, failed };

enum class Reason : std::uint8_t {
  unauthenticated,
  unauthorised,
  policy_violation,
  no_consent,
  resource_exhausted,
};

enum class DisclosureLevel : std::uint8_t { raw, sanitised };

enum class TransparencyMode : std::uint8_t {
  none,
  notify_after,
  broadcast_during,
};

enum class ConsentStatus : std::uint8_t { granted, revoked };

enum class ReportingStyle : std::uint8_t { single, stream, event };

enum class NegotiationVerdict : std::uint8_t { accepted, counter, failed };

enum class OrchVerb : std::uint8_t { start, modify, end };

struct TargetSpec {
  ConvexPolygon area;
  std::optional<TargetClass> class_filter;

  bool operator==(const TargetSpec&) const = default;
};

// Requested quality of data: spatial and temporal resolution floors.
struct QoD {
  double spatial_m{1.0};
  Tick temporal_ticks{1};

  bool operator==(const QoD&) const = default;
};

struct Schedule {
  Tick start{0};
  Tick period{1};
  Tick duration{1};

  bool operator==(const Schedule&) const = default;
};

struct EndpointRef {
  PrincipalId node;
  std::uint64_t port{0};

  bool operator==(const EndpointRef&) const = default;
};

struct Detection {
  std::string object_ref;  // pseudonym after sanitisation, raw id before
  Vec2 position;
  TargetClass cls{TargetClass::object};
  double confidence{0.0};

  bool operator==(const Detection&) const = default;
};

struct Echo {
  double range_m{0.0};
  double bearing_rad{0.0};
  double strength{1.0};
  std::string raw_object_ref;  // present only pre-sanitisation

  bool operator==(const Echo&) const = default;
};

// Constraint record shared by stored policies and composed session policies.
struct PolicyConstraints {
  std::vector<std::string> app_ids;           // empty = any application
  std::vector<TargetClass> target_classes;    // sorted; scope classes
  Rect allowed_area{{0, 0}, {0, 0}};
  std::vector<Rect> restricted_zones;
  std::vector<ResultSpec> sensing_types;      // sorted
  double min_granularity_m{1.0};
  Tick min_granularity_ticks{1};
  DisclosureLevel required_disclosure{DisclosureLevel::sanitised};
  std::string obligations;
  TransparencyMode transparency{TransparencyMode::none};
  Tick retention_ticks{0};

  bool operator==(const PolicyConstraints&) const = default;
};

struct SensingPolicy {
  std::string policy_id;
  PolicyConstraints constraints;

  bool operator==(const SensingPolicy&) const = default;
};

struct ConsentRecord {
  std::string subject;  // target or UE id
  std::string purpose;
  std::string scope;
  ConsentStatus status{ConsentStatus::granted};
  Tick updated_at{0};

  bool operator==(const ConsentRecord&) const = default;
};

struct SessionPolicy {
  std::string session_id;
  PolicyConstraints constraints;
  std::vector<std::string> source_policy_ids;
  std::vector<std::string> excluded_subjects;  // consent-revoked subjects
  std::uint64_t version{1};

  bool operator==(const SessionPolicy&) const = default;
};

// ---------------------------------------------------------------------------
// Flow payloads
// ---------------------------------------------------------------------------

// SENS_REQ and JCAS_API_REQ. policy_ref is empty on the application-facing
// leg and carries the tracking policy id once authorised.
struct SensingRequest {
  std::string request_id;
  PrincipalId app_id;
  TargetSpec target_spec;
  ResultSpec result_spec{ResultSpec::event_notification};
  std::uint8_t qos{3};  // 0 = highest priority
  QoD qod;
  Tick periodicity{1};
  Tick duration{1};
  std::string purpose;
  std::string policy_ref;

  bool operator==(const SensingRequest&) const = default;
};

// SENS_RESPONSE and JCAS_API_RESP.
struct SensingResponse {
  std::string request_id;
  RespStatus status{RespStatus::rejected};
  std::optional<Reason> reason;
  std::optional<std::string> result_channel;
  std::optional<std::string> policy_id;

  bool operator==(const SensingResponse&) const = default;
};

// SENS_POL_REQ.
struct PolicyQuery {
  PrincipalId app_id;
  SensingRequest request;

  bool operator==(const PolicyQuery&) const = default;
};

// SENS_POL_RESP. `unsolicited` marks policy-change pushes.
struct PolicyDecision {
  std::string request_id;
  bool allow{false};
  std::optional<Reason> reason;
  std::string violated;  // violated constraint, for denials
  std::string policy_id;
  std::optional<SessionPolicy> bundle;
  bool unsolicited{false};

  bool operator==(const PolicyDecision&) const = default;
};

// DISCLOSURE_LOG.
struct DisclosureRecord {
  PrincipalId recipient;
  std::string data_description;
  std::string purpose;
  std::string obligations;
  Tick timestamp{0};
  std::string applied_policy_id;

  bool operator==(const DisclosureRecord&) const = default;
};

// POL_REQ.
struct NegotiationProposal {
  std::string session_id;
  PrincipalId requester;
  double granularity_m{1.0};
  Tick granularity_ticks{1};
  std::uint32_t round{1};
  std::vector<std::string> source_policy_ids;  // parents being bundled
  std::string purpose;

  bool operator==(const NegotiationProposal&) const = default;
};

// POL_RESP.
struct NegotiationReply {
  std::string session_id;
  NegotiationVerdict verdict{NegotiationVerdict::failed};
  std::optional<SessionPolicy> policy;
  double counter_granularity_m{0.0};
  Tick counter_granularity_ticks{0};
  std::uint32_t round{1};
  bool unsolicited{false};

  bool operator==(const NegotiationReply&) const = default;
};

struct DataEstimate {
  std::string data_type;
  std::uint64_t bytes_per_report{0};
  Tick period_ticks{1};

  bool operator==(const DataEstimate&) const = default;
};

// PROC_REQ.
struct ProcessingRequest {
  std::string task_id;
  DataEstimate estimate;
  std::uint8_t priority{3};
  ReportingStyle reporting{ReportingStyle::stream};
  std::string policy_id;
  std::uint64_t policy_version{1};
  Schedule schedule;

  bool operator==(const ProcessingRequest&) const = default;
};

// PROC_RESP.
struct ProcessingResponse {
  std::string task_id;
  bool success{false};
  std::optional<Reason> reason;
  std::string session_id;
  std::optional<EndpointRef> ingress;
  std::optional<EndpointRef> egress;

  bool operator==(const ProcessingResponse&) const = default;
};

// CONFIG_RADIO_SESSION.
struct RadioSessionConfig {
  std::string task_id;
  CellRegion area;
  Schedule schedule;
  double granularity_m{1.0};
  Tick granularity_ticks{1};
  EndpointRef ingress;
  std::string purpose;
  bool transparency_expected{false};

  bool operator==(const RadioSessionConfig&) const = default;
};

// CONFIG_TRANSPARENCY.
struct TransparencyConfig {
  std::string task_id;
  TransparencyMode mode{TransparencyMode::none};

  bool operator==(const TransparencyConfig&) const = default;
};

// CONFIG_RADIO_ACK.
struct ConfigAck {
  std::string task_id;
  std::string su_id;
  bool accepted{false};
  std::optional<Reason> reason;

  bool operator==(const ConfigAck&) const = default;
};

// TX_DATA / RX_DATA.
struct Measurement {
  std::string su_id;
  std::string task_id;
  Tick captured_at{0};
  std::vector<Echo> echoes;
  bool preprocessed{false};

  bool operator==(const Measurement&) const = default;
};

// RESULT_STREAM / RECORD_STREAM / INTERPROCESS_STREAM.
struct SensingResultItem {
  std::string session_id;
  Tick produced_at{0};
  std::vector<Detection> detections;
  DisclosureLevel disclosure_level{DisclosureLevel::sanitised};

  bool operator==(const SensingResultItem&) const = default;
};

// PROCESSING_ORCH_FLOW.
struct OrchestrationCommand {
  OrchVerb verb{OrchVerb::start};
  std::string session_id;
  std::uint64_t new_policy_version{0};  // for modify

  bool operator==(const OrchestrationCommand&) const = default;
};

// TRANSPARENCY_DISCLOSURE: query (records empty) or report.
struct TransparencyExchange {
  bool is_query{true};
  std::string subject;
  std::vector<DisclosureRecord> records;

  bool operator==(const TransparencyExchange&) const = default;
};

// TRANSPARENCY_BROADCAST: over-the-air notification of an ongoing session.
struct TransparencyNotice {
  std::string task_id;
  std::string su_id;
  TransparencyMode mode{TransparencyMode::broadcast_during};
  std::vector<std::string> reached_targets;

  bool operator==(const TransparencyNotice&) const = default;
};

using Payload =
    std::variant<SensingRequest, SensingResponse, PolicyQuery, PolicyDecision,
                 DisclosureRecord, NegotiationProposal, NegotiationReply,
                 ProcessingRequest, ProcessingResponse, RadioSessionConfig,
                 TransparencyConfig, ConfigAck, Measurement, SensingResultItem,
                 OrchestrationCommand, TransparencyExchange,
                 TransparencyNotice>;

// ---------------------------------------------------------------------------
// Envelope
// ---------------------------------------------------------------------------

struct Envelope {
  std::uint64_t msg_id{0};
  Flow interface{Flow::SENS_REQ};
  PrincipalId sender;
  PrincipalId receiver;
  Tick sent_at{0};
  std::optional<Token> credentials;
  Payload payload;
  std::optional<SealTag> seal;

  bool operator==(const Envelope&) const = default;
};

// Variant index of the payload type a flow carries. Total over all flows;
// a static_assert in messages.cpp keeps this table exhaustive.
std::size_t payload_index_for(Flow f);
bool payload_matches(Flow f, const Payload& p);

struct ValidationResult {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Schema validation. Pure: never mutates the envelope, and the same envelope
// always yields the same result. Violations are values, not faults.
ValidationResult validate(const Envelope& e);

// Canonical serialization: deterministic field-ordered binary encoding.
// decode(encode(e)) is structurally equal to e for every valid envelope.
std::string encode(const Envelope& e);
Envelope decode(std::string_view bytes);

// Payload-only canonical bytes, used for integrity tags.
std::string encode_payload(const Payload& p);

// Payload with a leading type tag; the store's record value format.
std::string encode_tagged_payload(const Payload& p);
std::optional<Payload> decode_tagged_payload(std::string_view bytes);

// Canonical bytes for stored policy/consent records.
std::string encode_record(const SensingPolicy& p);
SensingPolicy decode_sensing_policy(std::string_view bytes);
std::string encode_record(const ConsentRecord& c);
ConsentRecord decode_consent_record(std::string_view bytes);
std::string encode_record(const SessionPolicy& s);
SessionPolicy decode_session_policy(std::string_view bytes);

std::string to_string(const Payload& p);  // short human-readable summary

std::string_view to_string(TargetClass c);
std::string_view to_string(ResultSpec r);
std::string_view to_string(RespStatus s);
std::string_view to_string(Reason r);
std::string_view to_string(TransparencyMode m);
std::optional<TargetClass> target_class_from_string(std::string_view s);
std::optional<ResultSpec> result_spec_from_string(std::string_view s);
std::optional<TransparencyMode> transparency_mode_from_string(
    std::string_view s);

}  // namespace jcas
