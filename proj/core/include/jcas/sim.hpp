#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jcas/engine.hpp"
#include "jcas/fabric.hpp"
#include "jcas/nef.hpp"
#include "jcas/scenario.hpp"
#include "jcas/scf.hpp"
#include "jcas/spctm.hpp"
#include "jcas/spf.hpp"
#include "jcas/store.hpp"
#include "jcas/su.hpp"
#include "jcas/world.hpp"

namespace jcas {

// Application endpoint: submits sensing requests, receives responses and
// result items.
class AppNode : public Node {
 public:
  AppNode(Fabric& fabric, ControlEngine& engine, const std::string& name);
  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;

  void submit(SensingRequest req, bool bad_credentials = false);

  struct ReceivedResponse {
    Tick tick;
    SensingResponse response;
  };
  struct ReceivedItem {
    Tick tick;
    SensingResultItem item;
  };
  const std::vector<ReceivedResponse>& responses() const { return responses_; }
  const std::vector<ReceivedItem>& items() const { return items_; }

 private:
  Fabric& fabric_;
  ControlEngine& engine_;
  PrincipalId id_;
  std::vector<ReceivedResponse> responses_;
  std::vector<ReceivedItem> items_;
};

// Trusted third party receiving transparency reports and able to query them.
class ThirdPartyNode : public Node {
 public:
  ThirdPartyNode(Fabric& fabric, ControlEngine& engine);
  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;

  void query(const std::string& subject);
  const std::vector<TransparencyExchange>& reports() const { return reports_; }

 private:
  Fabric& fabric_;
  ControlEngine& engine_;
  PrincipalId id_;
  std::vector<TransparencyExchange> reports_;
};

// Collective endpoint standing in for sensing targets on the air interface;
// counts transparency broadcasts reaching them.
class TargetsNode : public Node {
 public:
  explicit TargetsNode(Fabric& fabric);
  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;

  const std::vector<TransparencyNotice>& notices() const { return notices_; }

 private:
  Fabric& fabric_;
  PrincipalId id_;
  std::vector<TransparencyNotice> notices_;
};

// Store front for RECORD_STREAM writes into use-case data.
class StoreNode : public Node {
 public:
  StoreNode(Fabric& fabric, Store& store, Tick retention);
  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;

 private:
  Fabric& fabric_;
  Store& store_;
  Tick retention_;
  PrincipalId id_;
  std::uint64_t seq_{0};
};

// Attacker endpoint: receives redirected traffic and records everything.
class AdversaryNode : public Node {
 public:
  explicit AdversaryNode(Fabric& fabric);
  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;

  const std::vector<Envelope>& captured() const { return captured_; }

 private:
  Fabric& fabric_;
  PrincipalId id_;
  std::vector<Envelope> captured_;
};

struct RunSummary {
  std::map<std::string, std::uint64_t> counters;
  std::vector<std::string> violations;
  std::string render_text() const;
  std::string render_jsonl() const;
};

// One simulation instance: world + fabric + nodes assembled from a Scenario.
// Strictly single-threaded; independent instances share nothing.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  // Attack hooks run each tick after the world steps and before the script.
  void add_attack_hook(std::function<void(Tick)> hook);

  void run();  // run_until(scenario.duration)
  void run_until(Tick t);

  const Scenario& scenario() const { return scenario_; }
  Fabric& fabric() { return *fabric_; }
  const Fabric& fabric() const { return *fabric_; }
  World& world() { return world_; }
  Store& store() { return *store_; }
  ControlEngine& engine() { return *engine_; }
  Spctm& spctm() { return *spctm_; }
  NefNode& nef() { return *nef_; }
  ScfNode& scf() { return *scf_; }
  SpfNode& spf() { return *spf_; }
  ThirdPartyNode& third_party() { return *third_party_; }
  TargetsNode& targets_sink() { return *targets_; }
  AdversaryNode& adversary() { return *adversary_; }
  AppNode* app(const std::string& name);
  SuNode* su(const std::string& name);
  const Trace& trace() const { return fabric_->trace(); }

  const TagKey& pseudonym_secret() const {
    return engine_->keys().pseudonym_secret();
  }

  // Post-run: counters plus the module-invariant battery.
  RunSummary summarize() const;

  void write_trace(const std::string& path) const;

 private:
  void build();
  void script_tick(Tick now);

  Scenario scenario_;
  World world_;
  std::unique_ptr<Fabric> fabric_;
  std::unique_ptr<ControlEngine> engine_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<StoreNode> store_node_;
  std::unique_ptr<Spctm> spctm_;
  std::unique_ptr<NefNode> nef_;
  std::unique_ptr<ScfNode> scf_;
  std::unique_ptr<SpfNode> spf_;
  std::vector<std::unique_ptr<SuNode>> sus_;
  std::unique_ptr<TargetsNode> targets_;
  std::unique_ptr<ThirdPartyNode> third_party_;
  std::unique_ptr<AdversaryNode> adversary_;
  std::map<std::string, std::unique_ptr<AppNode>> apps_;
  std::vector<std::function<void(Tick)>> attack_hooks_;
};

}  // namespace jcas
