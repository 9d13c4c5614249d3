#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcas/engine.hpp"
#include "jcas/fabric.hpp"
#include "jcas/messages.hpp"

namespace jcas {

struct AppRegistration {
  PrincipalId app;
  std::vector<Rect> permitted_areas;
  double granularity_floor{1.0};
  std::vector<ResultSpec> sensing_types;  // empty = any
};

// Network exposure: authenticates applications, obtains sensing policies
// from the SPCTM, relays authorised requests to the SCF, applies disclosure
// controls on the result path, and writes a disclosure record for every
// released item.
class NefNode : public Node {
 public:
  struct Config {
    std::uint32_t revalidate_every = 1;
  };

  NefNode(Fabric& fabric, ControlEngine& engine, Config config);

  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;

  void register_app(AppRegistration reg);

 private:
  struct PendingRequest {
    SensingRequest request;
    PrincipalId app;
    std::string policy_id;
  };
  struct Subscriber {
    PrincipalId app;
    std::string request_id;
    std::string policy_id;
    std::string purpose;
    std::string obligations;
  };
  struct SessionRoute {
    std::vector<Subscriber> subscribers;
    std::uint64_t policy_version{1};
    Tick last_policy_change{0};
    double granularity_m{0.0};
    std::uint64_t items_seen{0};
  };

  void handle_sens_req(const Envelope& env);
  void handle_policy_decision(const PolicyDecision& d);
  void handle_api_resp(const SensingResponse& resp);
  void relay_result(const SensingResultItem& item);
  void respond(const PrincipalId& app, SensingResponse resp);
  void suppress(const std::string& why, const SensingResultItem& item);

  Fabric& fabric_;
  ControlEngine& engine_;
  Config config_;
  PrincipalId id_;
  std::map<std::string, AppRegistration> registrations_;
  std::map<std::string, PendingRequest> pending_;      // by request_id
  std::map<std::string, SessionRoute> sessions_;       // by session id
};

}  // namespace jcas
