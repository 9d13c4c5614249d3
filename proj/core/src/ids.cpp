#include "jcas/ids.hpp"

#include <array>

namespace jcas {

namespace {

constexpr std::array<std::string_view, 6> kDomainNames = {
    "application", "third_party", "target", "su", "ue_su", "network"};

constexpr std::array<std::string_view, 11> kKindNames = {
    "APP",    "NEF",   "SCF",    "SPF",         "SPCTM",    "STORE",
    "SU",     "UE_SU", "TARGET", "THIRD_PARTY", "ADVERSARY"};

constexpr std::array<std::string_view, kFlowCount> kFlowNames = {
    "SENS_REQ",
    "SENS_RESPONSE",
    "SENS_POL_REQ",
    "SENS_POL_RESP",
    "DISCLOSURE_LOG",
    "JCAS_API_REQ",
    "JCAS_API_RESP",
    "POL_REQ",
    "POL_RESP",
    "PROC_REQ",
    "PROC_RESP",
    "CONFIG_RADIO_SESSION",
    "CONFIG_TRANSPARENCY",
    "CONFIG_RADIO_ACK",
    "TX_DATA",
    "RX_DATA",
    "RESULT_STREAM",
    "RECORD_STREAM",
    "INTERPROCESS_STREAM",
    "PROCESSING_ORCH_FLOW",
    "TRANSPARENCY_DISCLOSURE",
    "TRANSPARENCY_BROADCAST",
};

}  // namespace

std::optional<TrustDomain> natural_domain(PrincipalKind kind) {
  switch (kind) {
    case PrincipalKind::APP:
      return TrustDomain::application;
    case PrincipalKind::NEF:
    case PrincipalKind::SCF:
    case PrincipalKind::SPF:
    case PrincipalKind::SPCTM:
    case PrincipalKind::STORE:
      return TrustDomain::network;
    case PrincipalKind::SU:
      return TrustDomain::su;
    case PrincipalKind::UE_SU:
      return TrustDomain::ue_su;
    case PrincipalKind::TARGET:
      return TrustDomain::target;
    case PrincipalKind::THIRD_PARTY:
      return TrustDomain::third_party;
    case PrincipalKind::ADVERSARY:
      return std::nullopt;
  }
  return std::nullopt;
}

bool domain_consistent(const PrincipalId& id) {
  auto natural = natural_domain(id.kind);
  if (!natural) return true;
  return *natural == id.trust_domain;
}

PrincipalId make_principal(PrincipalKind kind, std::string name) {
  auto natural = natural_domain(kind);
  return PrincipalId{kind, std::move(name),
                     natural.value_or(TrustDomain::third_party)};
}

PrincipalId make_adversary(std::string name, TrustDomain posing_as) {
  return PrincipalId{PrincipalKind::ADVERSARY, std::move(name), posing_as};
}

std::string_view to_string(TrustDomain d) {
  return kDomainNames[static_cast<std::size_t>(d)];
}

std::string_view to_string(PrincipalKind k) {
  return kKindNames[static_cast<std::size_t>(k)];
}

std::string_view to_string(Flow f) {
  return kFlowNames[static_cast<std::size_t>(f)];
}

std::optional<Flow> flow_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kFlowNames.size(); ++i) {
    if (kFlowNames[i] == s) return static_cast<Flow>(i);
  }
  return std::nullopt;
}

std::optional<PrincipalKind> kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<PrincipalKind>(i);
  }
  return std::nullopt;
}

}  // namespace jcas
