#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcas/engine.hpp"
#include "jcas/fabric.hpp"
#include "jcas/messages.hpp"
#include "jcas/world.hpp"

namespace jcas {

enum class SessionState : std::uint8_t { created, active, disposing, disposed };
enum class IsolationClass : std::uint8_t { plain, isolated };

// Sensing processing: transient per-task sessions ingest measurements into an
// ephemeral store, fuse them into detections, attach semantics, apply the
// disclosure privacy controls, and securely dispose of everything at the end.
class SpfNode : public Node {
 public:
  struct Config {
    std::size_t capacity = 4;
    bool record_uc_data = true;
    // Maps raw object references to a semantic class; wired to ground truth
    // by the simulation (classification itself is out of model).
    std::function<std::optional<TargetClass>(const std::string&)> classifier;
  };

  SpfNode(Fabric& fabric, ControlEngine& engine,
          const std::vector<SuPose>& su_registry, Config config);

  const PrincipalId& principal() const override { return id_; }
  void on_deliver(const Envelope& env) override;
  void on_tick() override;

  std::size_t active_sessions() const;
  std::size_t capacity() const { return config_.capacity; }

  // Introspection used by disposal oracles and the snooping threat model.
  std::optional<SessionState> session_state(const std::string& session_id) const;
  // Measurement count still readable for a session; nullopt once disposed.
  std::optional<std::size_t> ephemeral_size(const std::string& session_id) const;
  // Raw object references currently retained anywhere in SPF state.
  std::vector<std::string> retained_raw_refs() const;
  // Co-located compromise surface: readable only for plain-isolation sessions.
  std::optional<std::vector<Measurement>> snoop_ephemeral(
      const std::string& session_id) const;
  IsolationClass isolation_for_new_sessions() const;

  void end_session(const std::string& session_id);
  // Cross-session sharing over INTERPROCESS_STREAM; refused unless both
  // sessions are active, their target scopes intersect, and their policy
  // versions agree.
  bool share(const std::string& from_session, const std::string& to_session,
             const SensingResultItem& item);

 private:
  struct Session {
    std::string session_id;  // == task id
    SessionState state{SessionState::created};
    IsolationClass isolation{IsolationClass::plain};
    EndpointRef ingress;
    std::optional<EndpointRef> egress;
    std::vector<Measurement> buffer;        // ephemeral measurements
    std::vector<SensingResultItem> interim;  // ephemeral interim results
    std::size_t processed_upto{0};
    SessionPolicy policy;
    ProcessingRequest request;
    PrincipalId requester;
    Tick last_data_tick{0};
    Tick last_heartbeat_alert{0};
    std::uint64_t record_seq{0};
  };

  void handle_proc_req(const ProcessingRequest& req, const PrincipalId& from);
  void handle_pol_resp(const NegotiationReply& reply);
  void handle_orch(const OrchestrationCommand& cmd);
  void ingest(const Measurement& m);
  std::vector<SensingResultItem> process_window(Session& session);
  void disclose(Session& session, const SensingResultItem& item);
  void send_orch(OrchVerb verb, const std::string& session_id,
                 std::uint64_t version);

  Fabric& fabric_;
  ControlEngine& engine_;
  std::map<std::string, SuPose> su_poses_;
  Config config_;
  PrincipalId id_;
  std::map<std::string, Session> sessions_;
  std::uint64_t next_port_{1};
};

}  // namespace jcas
