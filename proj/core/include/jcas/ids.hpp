#pragma once

#include <cstdint>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace jcas {

using Tick = std::uint64_t;

// Administration/ownership domains whose crossings are the threat-analysis
// interfaces.
enum class TrustDomain : std::uint8_t {
  application,
  third_party,
  target,
  su,
  ue_su,
  network,
};

enum class PrincipalKind : std::uint8_t {
  APP,
  NEF,
  SCF,
  SPF,
  SPCTM,
  STORE,
  SU,
  UE_SU,
  TARGET,
  THIRD_PARTY,
  ADVERSARY,
};

// Every control and data flow exchanged between components. REQ/RESP pairs
// are distinct wire interfaces; TRANSPARENCY_BROADCAST and CONFIG_RADIO_ACK
// exist so that over-the-air target notification and SU config acknowledgment
// are observable messages like everything else.
enum class Flow : std::uint8_t {
  SENS_REQ,
  SENS_RESPONSE,
  SENS_POL_REQ,
  SENS_POL_RESP,
  DISCLOSURE_LOG,
  JCAS_API_REQ,
  JCAS_API_RESP,
  POL_REQ,
  POL_RESP,
  PROC_REQ,
  PROC_RESP,
  CONFIG_RADIO_SESSION,
  CONFIG_TRANSPARENCY,
  CONFIG_RADIO_ACK,
  TX_DATA,
  RX_DATA,
  RESULT_STREAM,
  RECORD_STREAM,
  INTERPROCESS_STREAM,
  PROCESSING_ORCH_FLOW,
  TRANSPARENCY_DISCLOSURE,
  TRANSPARENCY_BROADCAST,
};

inline constexpr std::uint8_t kFlowCount = 22;

struct PrincipalId {
  PrincipalKind kind{PrincipalKind::APP};
  std::string name;
  TrustDomain trust_domain{TrustDomain::application};

  auto operator<=>(const PrincipalId&) const = default;
  bool operator==(const PrincipalId&) const = default;
};

// Natural domain for a principal kind. ADVERSARY has none: an attacker may
// claim any position in the topology.
std::optional<TrustDomain> natural_domain(PrincipalKind kind);

// kind <-> trust_domain consistency. Adversaries pass for any domain.
bool domain_consistent(const PrincipalId& id);

PrincipalId make_principal(PrincipalKind kind, std::string name);
PrincipalId make_adversary(std::string name, TrustDomain posing_as);

std::string_view to_string(TrustDomain d);
std::string_view to_string(PrincipalKind k);
std::string_view to_string(Flow f);
std::optional<Flow> flow_from_string(std::string_view s);
std::optional<PrincipalKind> kind_from_string(std::string_view s);

}  // namespace jcas
