#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcas/controls.hpp"
#include "jcas/engine.hpp"
#include "jcas/fabric.hpp"
#include "jcas/messages.hpp"
#include "jcas/store.hpp"

namespace jcas {

// Constraint-wise most-restrictive composition of a policy bundle. Pure and
// order-independent: granularity = coarsest minimum, sensing types and geo =
// intersection, retention = shortest, transparency = strictest, and subjects
// with revoked consent (for `purpose`) are excluded from scope.
struct ComposeResult {
  std::optional<PolicyConstraints> constraints;
  std::vector<std::string> excluded_subjects;
  std::string error;  // "unsatisfiable" on empty effective scope

  bool ok() const { return constraints.has_value(); }
};

ComposeResult compose_constraints(const std::vector<SensingPolicy>& policies,
                                  const std::vector<ConsentRecord>& consents,
                                  const std::string& purpose);

// Sensing Policy, Consent, and Transparency Management. The policy decision
// point evaluates and composes policies, handles the consent lifecycle with
// change pushes to NEF/SCF/SPF, and keeps disclosure and transparency
// records in the sensing store.
class Spctm : public Node {
 public:
  struct Config {
    std::uint32_t negotiation_rounds = 3;
    Tick default_retention = 1000;
  };

  Spctm(Fabric& fabric, ControlEngine& engine, Store& store);
  Spctm(Fabric& fabric, ControlEngine& engine, Store& store, Config config);

  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;

  // --- bootstrap -------------------------------------------------------------
  void add_policy(const SensingPolicy& p);
  void add_consent(const ConsentRecord& c);

  // --- operations (also reachable via flows) ---------------------------------
  PolicyDecision evaluate(const PolicyQuery& query);
  NegotiationReply negotiate(const NegotiationProposal& proposal);
  void record_consent(const ConsentRecord& c);
  // Revoking a consent that was never granted is a warning no-op.
  void revoke_consent(const std::string& subject, const std::string& purpose);
  bool log_disclosure(const DisclosureRecord& rec);
  TransparencyExchange transparency_report(const std::string& subject,
                                           const PrincipalId& requester);

  std::optional<ConsentStatus> consent_status(const std::string& subject,
                                              const std::string& purpose) const;
  std::optional<SessionPolicy> session_policy(const std::string& session_id) const;
  void end_session(const std::string& session_id);

  std::size_t disclosure_count() const;

 private:
  struct EvalContext {
    std::string policy_id;
    PrincipalId app;
    std::string request_id;
    std::string purpose;
    std::vector<std::string> applicable_policy_ids;
  };
  struct SessionContext {
    SessionPolicy current;
    std::string purpose;
    bool active{true};
    std::uint32_t rounds_used{0};
  };

  std::vector<SensingPolicy> load_policies(const std::vector<std::string>& ids);
  std::vector<SensingPolicy> applicable_policies(const std::string& app_name);
  std::vector<ConsentRecord> current_consents() const;
  void push_session_policy(const SessionContext& session);

  Fabric& fabric_;
  ControlEngine& engine_;
  Store& store_;
  Config config_;
  PrincipalId id_;
  std::uint64_t next_policy_id_{0};
  std::uint64_t disclosure_seq_{0};
  std::map<std::string, EvalContext> eval_contexts_;   // by policy_id
  std::map<std::string, SessionContext> sessions_;     // by session/task id
};

}  // namespace jcas
