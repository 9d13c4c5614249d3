#pragma once

#include <string>
#include <vector>

#include "jcas/messages.hpp"
#include "jcas/rng.hpp"

namespace jcas::testkit {

// Deterministic generator for structurally valid wire objects and policy
// records. Fixed seed => fixed sequence, so frozen expectations stay frozen.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  Rng& rng() { return rng_; }

  std::string name(const std::string& prefix);
  PrincipalId principal(PrincipalKind kind);
  PrincipalId any_principal();
  Rect rect();
  ConvexPolygon polygon();
  Token token();
  SensingRequest sensing_request();
  SensingResponse sensing_response();
  Detection detection();
  Echo echo();
  Measurement measurement();
  SensingResultItem result_item();
  DisclosureRecord disclosure_record();
  PolicyConstraints constraints();
  SensingPolicy sensing_policy();
  ConsentRecord consent(const std::string& purpose);
  SessionPolicy session_policy();
  Payload payload_for(Flow f);
  Envelope envelope(Flow f);
  Envelope any_envelope();

 private:
  Rng rng_;
  std::uint64_t counter_{0};
};

}  // namespace jcas::testkit
