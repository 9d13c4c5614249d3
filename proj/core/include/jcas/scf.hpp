#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcas/engine.hpp"
#include "jcas/fabric.hpp"
#include "jcas/messages.hpp"
#include "jcas/world.hpp"

namespace jcas {

struct ResourceBudget {
  std::uint64_t total{16};
  std::uint64_t comm{16};
  std::uint64_t sensing{0};

  bool conserved() const { return comm + sensing <= total; }
};

// Sensing control and orchestration: turns authorised API requests into
// sensing tasks (aggregating compatible requests, splitting across unit
// coverage), negotiates control policies, acquires processing, configures
// sensing units, and arbitrates the communication/sensing resource trade-off.
class ScfNode : public Node {
 public:
  struct SuInfo {
    PrincipalId id;
    SuPose pose;
  };

  struct Config {
    double aggregation_overlap_fraction = 0.5;
    double comm_floor_fraction = 0.5;
    std::uint64_t budget_total = 16;
    bool accept_counter = true;  // false = insist on proposals (for testing)
    Tick setup_lead = 12;        // plan tick -> schedule start
    Tick end_grace = 2;
  };

  ScfNode(Fabric& fabric, ControlEngine& engine, std::vector<SuInfo> sus,
          Config config);

  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;
  void on_tick() override;

  const ResourceBudget& budget() const { return budget_; }
  std::size_t planned_tasks() const { return tasks_.size(); }

 private:
  enum class Stage : std::uint8_t {
    negotiating,
    awaiting_processing,
    configuring,
    active,
    ended,
    failed,
  };

  struct Parent {
    std::string request_id;
    std::string policy_id;
    ConvexPolygon area;
    ResultSpec result_spec{ResultSpec::event_notification};
    std::uint8_t qos{3};
    Tick periodicity{1};
    Tick duration{1};
    double granularity_m{1.0};
    Tick granularity_ticks{1};
    std::string purpose;
  };

  struct Task {
    std::string task_id;
    std::vector<Parent> parents;
    double granularity_m{1.0};
    Tick granularity_ticks{1};
    Schedule schedule;
    CellRegion area;
    std::map<std::string, CellRegion> su_areas;  // per assigned SU
    std::map<std::string, bool> acks;
    SessionPolicy policy;
    std::optional<EndpointRef> ingress;
    std::string session_id;
    Stage stage{Stage::negotiating};
    std::uint32_t round{1};
    std::uint64_t budget_held{0};
    std::uint64_t comm_taken{0};
    std::vector<std::string> declined;
  };

  void plan(std::vector<SensingRequest> batch);
  bool compatible(const Parent& a, const SensingRequest& b) const;
  void start_negotiation(Task& task);
  void handle_pol_resp(const NegotiationReply& reply);
  // Recomputes task cells against the negotiated policy and partitions them
  // across covering sensing units. Returns false when no unit set covers.
  bool assign_sus(Task& task);
  void acquire_processing(Task& task);
  void handle_proc_resp(const ProcessingResponse& resp);
  void configure_radio(Task& task);
  void handle_ack(const ConfigAck& ack);
  void fail_task(Task& task, Reason reason);
  void activate_task(Task& task);
  void finish_task(Task& task);
  void respond_parent(const Parent& parent, RespStatus status,
                      std::optional<Reason> reason,
                      const std::string& session_id);
  bool reserve_budget(Task& task, std::uint64_t need);
  void release_budget(Task& task);
  void send_orch_end(const Task& task);

  Fabric& fabric_;
  ControlEngine& engine_;
  Config config_;
  PrincipalId id_;
  std::vector<SuInfo> sus_;
  ResourceBudget budget_;
  std::vector<SensingRequest> batch_;
  std::map<std::string, Task> tasks_;
  std::uint64_t next_task_{0};
};

}  // namespace jcas
