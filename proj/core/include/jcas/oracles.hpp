#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcas/fabric.hpp"
#include "jcas/messages.hpp"

namespace jcas::oracles {

// Pure trace predicates: re-evaluating any of these on the same trace gives
// the same answer.

std::uint64_t count_flow(const Trace& t, Flow f, Verdict v);
std::uint64_t count_delivered_to_kind(const Trace& t, Flow f,
                                      PrincipalKind receiver);
std::optional<Tick> first_delivery(const Trace& t, Flow f);
std::optional<Tick> first_delivery_to_kind(const Trace& t, Flow f,
                                           PrincipalKind receiver);
std::uint64_t count_alerts(const Trace& t, const std::string& control);
bool has_alert(const Trace& t, const std::string& control);

// End-to-end ordering of the baseline request flow: SENS_REQ, policy check,
// JCAS_API_REQ, policy negotiation, PROC_REQ/RESP, CONFIG_RADIO_SESSION,
// TX/RX_DATA, RESULT_STREAM, disclosure log.
struct SequenceCheck {
  bool ok{false};
  std::vector<std::string> errors;
};
SequenceCheck check_happy_sequence(const Trace& t);

// Latest session policy per session id, reconstructed from negotiation
// replies and policy pushes observed in the trace.
std::map<std::string, SessionPolicy> session_policies_from_trace(
    const Trace& t);

// Scans every RESULT_STREAM / RECORD_STREAM envelope for raw identifiers,
// registered PII strings, and positions finer than the session policy
// granularity. Returns one description per offending envelope.
std::vector<std::string> sanitisation_violations(
    const Trace& t, const std::vector<std::string>& raw_ids,
    const std::vector<std::string>& pii_strings);

struct CompletenessCount {
  std::uint64_t items_delivered_to_apps{0};
  std::uint64_t disclosure_records_delivered{0};
  bool losses_on_path{false};  // drops/blocks on either flow
};
CompletenessCount disclosure_completeness(const Trace& t);

std::vector<std::string> causality_violations(
    const Trace& t, const std::map<std::uint64_t, Channel>& channels);

// Tick at which `request_id` received a SENS_RESPONSE with `status`.
std::optional<Tick> response_tick(const Trace& t,
                                  const std::string& request_id,
                                  RespStatus status);

// RESULT_STREAM items delivered to applications after `after` whose
// detections include `object_ref`.
std::uint64_t deliveries_with_object_after(const Trace& t,
                                           const std::string& object_ref,
                                           Tick after);

}  // namespace jcas::oracles
